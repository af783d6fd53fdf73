#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "turnover/forest.hpp"

namespace turnover {

enum class FeatureDecision : std::uint8_t { Confirmed, Tentative, Rejected };

const char* to_string(FeatureDecision d);

enum class MultipleTesting : std::uint8_t { Bonferroni, None };

struct BorutaConfig {
  std::size_t max_iterations = 100;
  double alpha = 0.05;
  MultipleTesting multiple_testing = MultipleTesting::Bonferroni;
  TreeParams forest_params;
  std::size_t n_trees_per_iteration = 200;
  std::uint64_t seed = 0;
  std::size_t n_workers = 1;
};

// Outcome of the shadow-feature selection run. Vectors are parallel to
// feature_names; a feature rejected at iteration i stops accruing trials,
// so its z_history is shorter than a survivor's.
struct BorutaReport {
  std::vector<std::string> feature_names;
  std::vector<FeatureDecision> decisions;
  std::vector<std::int64_t> hits;
  std::vector<std::int64_t> trials;
  std::vector<std::vector<double>> z_history;  // [feature][trial]
  std::vector<double> mzsa_history;            // [iteration]
  std::size_t iterations_run = 0;

  // Non-rejected feature indices, ascending.
  std::vector<std::size_t> selected() const;
};

// Exact two-sided binomial test at success probability 1/2:
// min(1, 2 * min(P(X <= hits), P(X >= hits))) for X ~ Binomial(trials, 1/2).
// Exact dyadic arithmetic for trials <= 62, multiplicative recurrence above.
double binomial_two_sided_p(std::int64_t hits, std::int64_t trials);

// Appends one permuted copy of every column: output has 2F features, the F
// originals followed by `shadow_<name>` columns holding the same values
// independently permuted across rows. Labels are unchanged.
LabeledDataset add_shadow_features(const LabeledDataset& d, std::uint64_t seed);

struct BorutaIteration {
  std::vector<double> z;  // parallel to the active span
  double mzsa = 0.0;
  std::vector<bool> hit;  // parallel to the active span; z strictly above mzsa
};

// One selection round over the active columns: extends them with fresh
// shadows, trains a forest of cfg.n_trees_per_iteration trees, and scores
// permutation-importance z. All randomness derives from (cfg.seed, iteration).
BorutaIteration boruta_iteration(const LabeledDataset& d, std::span<const std::size_t> active,
                                 const BorutaConfig& cfg, std::size_t iteration);

// Classifies each still-undecided feature from its hit count. hits[i] is the
// count for the i-th undecided feature after `trials` shared trials; with
// Bonferroni the p-values are compared against alpha / hits.size().
// Significantly above trials/2 is Confirmed, below is Rejected, anything
// else stays Tentative.
std::vector<FeatureDecision> decide_features(std::span<const std::int64_t> hits,
                                             std::int64_t trials, const BorutaConfig& cfg);

// Full procedure: iterate, accumulate hits, decide after every round, drop
// Rejected columns from the active set, stop once nothing is Tentative or
// cfg.max_iterations rounds have run. Deterministic given cfg.seed.
// Throws std::domain_error when d has no features.
BorutaReport run_boruta(const LabeledDataset& d, const BorutaConfig& cfg);

// CSV report, one row per feature: feature, decision, hits, trials, mean_z.
std::string boruta_report_csv(const BorutaReport& report);

// JSON document with per-feature z_history and the global mzsa_history.
std::string boruta_history_json(const BorutaReport& report);

}  // namespace turnover
