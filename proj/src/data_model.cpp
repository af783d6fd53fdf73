#include "turnover/data_model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace turnover {

char class_to_char(TurnoverClass c) {
  return static_cast<char>('A' + static_cast<int>(c));
}

TurnoverClass class_from_char(char c) {
  if (c < 'A' || c > 'E') {
    throw std::invalid_argument(std::string("unknown turnover class '") + c + "'");
  }
  return static_cast<TurnoverClass>(c - 'A');
}

TurnoverClass class_from_index(std::size_t i) {
  if (i >= kNumClasses) throw std::invalid_argument("class index out of range");
  return static_cast<TurnoverClass>(i);
}

TurnoverClass argmax_class(const ClassHistogram& counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return static_cast<TurnoverClass>(best);
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::int64_t Date::ordinal() const {
  // Howard Hinnant's days_from_civil.
  const int y = year - (month <= 2 ? 1 : 0);
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> validate_record(const StockRecord& r) {
  std::vector<std::string> violations;
  if (!(r.low_price <= r.high_price)) {
    violations.push_back("low_price <= high_price violated (low=" + fmt(r.low_price) +
                         ", high=" + fmt(r.high_price) + ")");
  }
  if (!(r.low_price <= r.wap && r.wap <= r.high_price)) {
    violations.push_back("low_price <= wap <= high_price violated (low=" + fmt(r.low_price) +
                         ", wap=" + fmt(r.wap) + ", high=" + fmt(r.high_price) + ")");
  }
  if (!(std::fabs(r.spread_high_low - (r.high_price - r.low_price)) <= 1e-6)) {
    violations.push_back("spread_high_low = high_price - low_price violated (spread=" +
                         fmt(r.spread_high_low) + ", high-low=" + fmt(r.high_price - r.low_price) + ")");
  }
  if (r.no_of_shares < 0) {
    violations.push_back("no_of_shares >= 0 violated (" + std::to_string(r.no_of_shares) + ")");
  }
  if (r.no_of_trades < 0) {
    violations.push_back("no_of_trades >= 0 violated (" + std::to_string(r.no_of_trades) + ")");
  }
  if (r.deliverable_quantity < 0) {
    violations.push_back("deliverable_quantity >= 0 violated (" +
                         std::to_string(r.deliverable_quantity) + ")");
  }
  if (!(r.total_turnover >= 0.0) || !std::isfinite(r.total_turnover)) {
    violations.push_back("total_turnover >= 0 violated (" + fmt(r.total_turnover) + ")");
  }
  if (r.deliverable_quantity > r.no_of_shares) {
    violations.push_back("deliverable_quantity <= no_of_shares violated (deliverable=" +
                         std::to_string(r.deliverable_quantity) +
                         ", shares=" + std::to_string(r.no_of_shares) + ")");
  }
  return violations;
}

TurnoverBins::TurnoverBins(const std::array<Interval, kNumClasses>& intervals)
    : intervals_(intervals) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!(intervals_[i].lo <= intervals_[i].hi)) {
      throw std::invalid_argument("bin " + std::string(1, static_cast<char>('A' + i)) +
                                  " has lo > hi");
    }
    if (i > 0 && !(intervals_[i - 1].hi < intervals_[i].lo)) {
      throw std::invalid_argument("bins must be disjoint and strictly increasing");
    }
  }
}

TurnoverBins TurnoverBins::default_bins() {
  return TurnoverBins({{{58320.0, 18291986.0},
                        {18296597.0, 37731606.0},
                        {37749751.0, 121233543.0},
                        {121245870.0, 300360881.0},
                        {300465316.0, 19085311470.0}}});
}

TurnoverClass discretize_turnover(double value, const TurnoverBins& bins) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::domain_error("turnover value must be finite and non-negative");
  }
  const auto& iv = bins.intervals();
  if (value < iv[0].lo) return TurnoverClass::A;
  if (value > iv[kNumClasses - 1].hi) return TurnoverClass::E;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (value >= iv[i].lo && value <= iv[i].hi) return static_cast<TurnoverClass>(i);
  }
  // In a gap: nearest boundary, ties toward the lower class.
  for (std::size_t i = 0; i + 1 < kNumClasses; ++i) {
    if (value > iv[i].hi && value < iv[i + 1].lo) {
      const double d_lo = value - iv[i].hi;
      const double d_hi = iv[i + 1].lo - value;
      return static_cast<TurnoverClass>(d_lo <= d_hi ? i : i + 1);
    }
  }
  throw std::logic_error("unreachable: bins do not cover value");
}

void LabeledDataset::append_row(std::span<const double> row_values, TurnoverClass label) {
  if (row_values.size() != feature_names.size()) {
    throw std::invalid_argument("row arity does not match feature count");
  }
  values.insert(values.end(), row_values.begin(), row_values.end());
  labels.push_back(label);
}

LabeledDataset LabeledDataset::select_rows(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.values.reserve(rows.size() * n_features());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
  }
  return out;
}

LabeledDataset LabeledDataset::select_features(std::span<const std::size_t> features) const {
  LabeledDataset out;
  out.feature_names.reserve(features.size());
  for (std::size_t f : features) out.feature_names.push_back(feature_names[f]);
  out.values.reserve(n_rows() * features.size());
  for (std::size_t r = 0; r < n_rows(); ++r) {
    for (std::size_t f : features) out.values.push_back(at(r, f));
  }
  out.labels = labels;
  return out;
}

ClassHistogram LabeledDataset::label_histogram() const {
  ClassHistogram h{};
  for (TurnoverClass c : labels) ++h[class_index(c)];
  return h;
}

void LabeledDataset::check_invariants() const {
  if (values.size() != n_rows() * n_features()) {
    throw std::invalid_argument("dataset storage size does not match rows x features");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset contains a non-finite value");
  }
}

}  // namespace turnover
