#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace turnover {

// Ordinal turnover band, A = lowest. The five bands are fixed; every label,
// histogram and confusion matrix in the toolkit is indexed by them.
enum class TurnoverClass : std::uint8_t { A = 0, B = 1, C = 2, D = 3, E = 4 };

inline constexpr std::size_t kNumClasses = 5;

char class_to_char(TurnoverClass c);
TurnoverClass class_from_char(char c);
TurnoverClass class_from_index(std::size_t i);
inline std::size_t class_index(TurnoverClass c) { return static_cast<std::size_t>(c); }

using ClassHistogram = std::array<std::int64_t, kNumClasses>;

// Majority class of a histogram; ties resolve toward the lower class.
TurnoverClass argmax_class(const ClassHistogram& counts);

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
  std::string iso() const;
  // Days since 1970-01-01 (proleptic Gregorian); used when dates are encoded
  // as a numeric feature.
  std::int64_t ordinal() const;
};

// One daily trading row.
struct StockRecord {
  Date date;
  std::string company;
  double open_price = 0.0;
  double high_price = 0.0;
  double low_price = 0.0;
  double close_price = 0.0;
  double wap = 0.0;
  std::int64_t no_of_shares = 0;
  std::int64_t no_of_trades = 0;
  std::int64_t deliverable_quantity = 0;
  double spread_high_low = 0.0;
  double spread_close_open = 0.0;  // opaque reported column, never recomputed
  double total_turnover = 0.0;
};

// Empty result means the record is consistent. Violations name the failed
// rule and the offending values; validation never throws.
std::vector<std::string> validate_record(const StockRecord& r);

// Closed currency intervals [lo, hi], strictly increasing, one per class.
// The published bands leave small gaps between consecutive intervals.
class TurnoverBins {
 public:
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
  };

  TurnoverBins() = default;
  explicit TurnoverBins(const std::array<Interval, kNumClasses>& intervals);

  static TurnoverBins default_bins();

  const Interval& interval(TurnoverClass c) const { return intervals_[class_index(c)]; }
  const std::array<Interval, kNumClasses>& intervals() const { return intervals_; }

 private:
  std::array<Interval, kNumClasses> intervals_{};
};

// Total, monotone class assignment:
//   - inside an interval: that interval's class
//   - below the lowest bound: A; above the highest: E
//   - inside an inter-bin gap: the class of the nearest boundary, ties
//     toward the lower class
// Throws std::domain_error for negative or non-finite values.
TurnoverClass discretize_turnover(double value, const TurnoverBins& bins);

// Numeric feature matrix plus per-row class labels. Row-major storage.
class LabeledDataset {
 public:
  std::vector<std::string> feature_names;
  std::vector<double> values;  // n_rows x feature_names.size()
  std::vector<TurnoverClass> labels;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }

  double at(std::size_t row, std::size_t col) const {
    return values[row * feature_names.size() + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return values[row * feature_names.size() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * feature_names.size(), feature_names.size()};
  }

  void append_row(std::span<const double> row_values, TurnoverClass label);

  LabeledDataset select_rows(std::span<const std::size_t> rows) const;
  LabeledDataset select_features(std::span<const std::size_t> features) const;

  ClassHistogram label_histogram() const;

  // Throws std::invalid_argument if shape or finiteness invariants fail.
  void check_invariants() const;
};

}  // namespace turnover
