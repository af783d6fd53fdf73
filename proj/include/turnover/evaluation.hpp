#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "turnover/data_model.hpp"

namespace turnover {

// counts[i][j]: rows of true class i predicted as class j.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t total() const;
  std::int64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const TurnoverClass> truth,
                                 std::span<const TurnoverClass> predicted);

// 100 * correctly classified / total. Throws std::domain_error on an empty
// matrix.
double accuracy_percent(const ConfusionMatrix& c);

// A trained classifier under a report name. n_features is the arity the
// predictor expects; train_seconds is carried through to the report.
struct NamedPredictor {
  std::string name;
  std::size_t n_features = 0;
  std::function<TurnoverClass(std::span<const double>)> predict;
  double train_seconds = 0.0;
};

struct ModelEvaluation {
  std::string name;
  double accuracy = 0.0;  // percent, full precision
  ConfusionMatrix confusion;
  double train_seconds = 0.0;
};

struct DatasetFingerprint {
  std::size_t train_rows = 0;
  std::size_t valid_rows = 0;
  ClassHistogram train_histogram{};
  ClassHistogram valid_histogram{};
  std::uint64_t split_seed = 0;
};

// Rows sorted by descending accuracy; equal accuracies order by name.
struct ComparativeReport {
  std::vector<ModelEvaluation> rows;
  DatasetFingerprint fingerprint;
};

// Evaluates every model on the same validation rows. Throws
// std::domain_error naming the model whose arity does not match `valid`.
ComparativeReport comparative_report(std::span<const NamedPredictor> models,
                                     const LabeledDataset& valid,
                                     const DatasetFingerprint& fingerprint);

// CSV: model,accuracy_percent,train_seconds (2 and 3 decimal places).
std::string report_csv(const ComparativeReport& report);

// 5x5 grid with class letters on both the header row and first column.
std::string confusion_csv(const ConfusionMatrix& c);

struct YearlyAverage {
  std::string company;
  int year = 0;
  double mean_turnover = 0.0;

  bool operator==(const YearlyAverage&) const = default;
};

// Mean total_turnover per (company, calendar year), ordered by company then
// year. The data behind the yearly trend line chart.
std::vector<YearlyAverage> yearly_average_turnover(std::span<const StockRecord> records);

// Sum of no_of_shares per discretized turnover class; classes with no rows
// report 0. The data behind the shares-by-class bar chart.
std::array<std::int64_t, kNumClasses> shares_sum_by_class(std::span<const StockRecord> records,
                                                          const TurnoverBins& bins);

std::string figure3_csv(std::span<const YearlyAverage> series);
std::string figure3_svg(std::span<const YearlyAverage> series);
std::string figure4_csv(const std::array<std::int64_t, kNumClasses>& sums);
std::string figure4_svg(const std::array<std::int64_t, kNumClasses>& sums);

struct SyntheticSpec {
  std::size_t n_rows = 1000;
  std::size_t n_informative = 10;
  std::size_t n_noise = 10;
  double noise_level = 0.1;  // in [0, 1)
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<StockRecord> records;
  LabeledDataset dataset;  // inf_* columns then noise_* columns
};

// Deterministic synthetic market data. A latent turnover value is drawn
// log-uniformly inside a uniformly chosen class band (quantized to 32
// in-band levels, so the noiseless feature space is exactly learnable);
// informative features are monotone transforms of the latent value plus
// noise_level-scaled Gaussian noise, noise features are pure N(0,1) draws.
// Emitted records satisfy every StockRecord validation rule and carry the
// latent value as total_turnover.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace turnover
