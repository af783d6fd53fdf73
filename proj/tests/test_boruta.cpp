#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "turnover/boruta.hpp"
#include "turnover/rng.hpp"

using namespace turnover;

namespace {

// Exact tail enumeration with dyadic doubles; C(n, k) stays below 2^53 for
// n <= 30 so every term is exact.
double enumeration_two_sided_p(std::int64_t hits, std::int64_t trials) {
  auto choose = [](std::int64_t n, std::int64_t k) {
    double c = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) {
      c = c * static_cast<double>(n - i + 1) / static_cast<double>(i);
    }
    return c;
  };
  double lower = 0.0;
  for (std::int64_t k = 0; k <= hits; ++k) lower += choose(trials, k);
  double upper = 0.0;
  for (std::int64_t k = hits; k <= trials; ++k) upper += choose(trials, k);
  const double tail = std::min(lower, upper);
  return std::min(1.0, 2.0 * std::ldexp(tail, static_cast<int>(-trials)));
}

LabeledDataset signal_noise_dataset(std::size_t n_rows, std::size_t n_signal,
                                    std::size_t n_noise, std::uint64_t seed) {
  LabeledDataset d;
  for (std::size_t f = 0; f < n_signal; ++f) d.feature_names.push_back("sig" + std::to_string(f));
  for (std::size_t f = 0; f < n_noise; ++f) d.feature_names.push_back("noise" + std::to_string(f));
  Rng rng(seed);
  std::vector<double> row(n_signal + n_noise);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t cls = rng.uniform_index(3);
    for (std::size_t f = 0; f < n_signal; ++f) {
      row[f] = static_cast<double>(cls) + 0.15 * rng.normal();
    }
    for (std::size_t f = 0; f < n_noise; ++f) row[n_signal + f] = rng.normal();
    d.append_row(row, class_from_index(cls));
  }
  return d;
}

}  // namespace

TEST_CASE("binomial test matches exact enumeration for every small case") {
  for (std::int64_t trials = 0; trials <= 30; ++trials) {
    for (std::int64_t hits = 0; hits <= trials; ++hits) {
      const double got = binomial_two_sided_p(hits, trials);
      const double want = enumeration_two_sided_p(hits, trials);
      CHECK(std::fabs(got - want) <= 1e-12);
    }
  }
}

TEST_CASE("binomial test known values") {
  CHECK(binomial_two_sided_p(15, 15) == doctest::Approx(2.0 / 32768.0).epsilon(1e-12));
  CHECK(binomial_two_sided_p(0, 15) == doctest::Approx(2.0 / 32768.0).epsilon(1e-12));
  CHECK(binomial_two_sided_p(8, 15) == 1.0);
  CHECK(binomial_two_sided_p(5, 10) == 1.0);
  CHECK(binomial_two_sided_p(0, 0) == 1.0);
  // symmetric by construction
  for (std::int64_t h = 0; h <= 40; ++h) {
    CHECK(binomial_two_sided_p(h, 40) == binomial_two_sided_p(40 - h, 40));
  }
  // large-trials path stays a probability and decays with extremity
  CHECK(binomial_two_sided_p(50, 100) == 1.0);
  CHECK(binomial_two_sided_p(90, 100) < binomial_two_sided_p(70, 100));
  CHECK(binomial_two_sided_p(100, 100) > 0.0);
}

TEST_CASE("decide_features classifies the worked examples") {
  BorutaConfig cfg;  // alpha 0.05, Bonferroni
  const std::int64_t hits[] = {15, 0, 8};
  // threshold 0.05 / 3; p(15/15) = p(0/15) ~ 6.1e-5, p(8/15) = 1
  const auto decisions = decide_features(hits, 15, cfg);
  REQUIRE(decisions.size() == 3);
  CHECK(decisions[0] == FeatureDecision::Confirmed);
  CHECK(decisions[1] == FeatureDecision::Rejected);
  CHECK(decisions[2] == FeatureDecision::Tentative);
}

TEST_CASE("Bonferroni is stricter than no correction") {
  BorutaConfig cfg;
  cfg.alpha = 0.05;
  // p(12/14) ~ 0.0129: significant alone, not after dividing by 40
  std::vector<std::int64_t> hits(40, 7);
  hits[0] = 12;
  cfg.multiple_testing = MultipleTesting::None;
  CHECK(decide_features(hits, 14, cfg)[0] == FeatureDecision::Confirmed);
  cfg.multiple_testing = MultipleTesting::Bonferroni;
  CHECK(decide_features(hits, 14, cfg)[0] == FeatureDecision::Tentative);
}

TEST_CASE("one trial can never decide") {
  BorutaConfig cfg;
  const std::int64_t hits[] = {1, 0};
  const auto decisions = decide_features(hits, 1, cfg);
  CHECK(decisions[0] == FeatureDecision::Tentative);
  CHECK(decisions[1] == FeatureDecision::Tentative);
}

TEST_CASE("shadow features are per-column permutations") {
  LabeledDataset d;
  d.feature_names = {"a", "b"};
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    d.append_row(std::vector<double>{static_cast<double>(i), rng.normal()},
                 class_from_index(rng.uniform_index(2)));
  }
  const LabeledDataset shadowed = add_shadow_features(d, 7);
  REQUIRE(shadowed.n_features() == 4);
  CHECK(shadowed.feature_names ==
        std::vector<std::string>{"a", "b", "shadow_a", "shadow_b"});
  CHECK(shadowed.n_rows() == d.n_rows());
  CHECK(shadowed.labels == d.labels);

  for (std::size_t f = 0; f < 2; ++f) {
    std::vector<double> original, shadow;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      original.push_back(shadowed.at(r, f));
      shadow.push_back(shadowed.at(r, f + 2));
      CHECK(shadowed.at(r, f) == d.at(r, f));
    }
    std::sort(original.begin(), original.end());
    std::sort(shadow.begin(), shadow.end());
    CHECK(original == shadow);  // same multiset, different order
  }

  // the permutation actually moves something on 20 distinct values
  bool moved = false;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    if (shadowed.at(r, 2) != shadowed.at(r, 0)) moved = true;
  }
  CHECK(moved);

  // single row: shadow equals the row
  LabeledDataset tiny;
  tiny.feature_names = {"x"};
  tiny.append_row(std::vector<double>{5.0}, TurnoverClass::A);
  const LabeledDataset tiny_shadowed = add_shadow_features(tiny, 1);
  CHECK(tiny_shadowed.at(0, 1) == 5.0);
}

TEST_CASE("run_boruta separates strong signal from noise") {
  const LabeledDataset d = signal_noise_dataset(150, 2, 2, 19);
  BorutaConfig cfg;
  cfg.n_trees_per_iteration = 60;
  cfg.max_iterations = 30;
  cfg.seed = 5;
  const BorutaReport report = run_boruta(d, cfg);

  REQUIRE(report.decisions.size() == 4);
  CHECK(report.decisions[0] == FeatureDecision::Confirmed);
  CHECK(report.decisions[1] == FeatureDecision::Confirmed);
  CHECK(report.decisions[2] == FeatureDecision::Rejected);
  CHECK(report.decisions[3] == FeatureDecision::Rejected);
  CHECK(report.iterations_run <= 30);

  const auto picked = report.selected();
  CHECK(picked == std::vector<std::size_t>{0, 1});

  // confirmed features keep accruing trials; rejected ones stop when dropped
  CHECK(report.trials[0] == static_cast<std::int64_t>(report.iterations_run));
  CHECK(report.trials[2] <= report.trials[0]);
  CHECK(report.z_history[0].size() == report.iterations_run);
  CHECK(report.z_history[2].size() == static_cast<std::size_t>(report.trials[2]));
  CHECK(report.mzsa_history.size() == report.iterations_run);
}

TEST_CASE("run_boruta is deterministic in the seed") {
  const LabeledDataset d = signal_noise_dataset(80, 1, 2, 23);
  BorutaConfig cfg;
  cfg.n_trees_per_iteration = 40;
  cfg.max_iterations = 8;
  cfg.seed = 11;
  const BorutaReport a = run_boruta(d, cfg);
  const BorutaReport b = run_boruta(d, cfg);
  CHECK(a.decisions == b.decisions);
  CHECK(a.hits == b.hits);
  CHECK(a.z_history == b.z_history);
  CHECK(a.mzsa_history == b.mzsa_history);
  CHECK(boruta_report_csv(a) == boruta_report_csv(b));
  CHECK(boruta_history_json(a) == boruta_history_json(b));
}

TEST_CASE("max_iterations caps the run and leaves ties tentative") {
  const LabeledDataset d = signal_noise_dataset(60, 1, 1, 29);
  BorutaConfig cfg;
  cfg.n_trees_per_iteration = 30;
  cfg.max_iterations = 1;
  const BorutaReport report = run_boruta(d, cfg);
  CHECK(report.iterations_run == 1);
  for (FeatureDecision dec : report.decisions) CHECK(dec == FeatureDecision::Tentative);
}

TEST_CASE("run_boruta validates its inputs") {
  LabeledDataset empty;
  BorutaConfig cfg;
  CHECK_THROWS_AS(run_boruta(empty, cfg), std::domain_error);

  const LabeledDataset d = signal_noise_dataset(30, 1, 1, 31);
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(run_boruta(d, cfg), std::invalid_argument);
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(run_boruta(d, cfg), std::invalid_argument);
  cfg.alpha = 0.05;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(run_boruta(d, cfg), std::invalid_argument);
}

TEST_CASE("boruta report CSV shape") {
  const LabeledDataset d = signal_noise_dataset(60, 1, 1, 37);
  BorutaConfig cfg;
  cfg.n_trees_per_iteration = 30;
  cfg.max_iterations = 3;
  const BorutaReport report = run_boruta(d, cfg);
  const std::string text = boruta_report_csv(report);
  CHECK(text.rfind("feature,decision,hits,trials,mean_z\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + 2 features
  CHECK(text.find("sig0") != std::string::npos);
  CHECK(text.find("noise0") != std::string::npos);
}
