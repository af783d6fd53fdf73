#include "turnover/boruta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "turnover/csv.hpp"
#include "turnover/rng.hpp"

namespace turnover {

const char* to_string(FeatureDecision d) {
  switch (d) {
    case FeatureDecision::Confirmed: return "Confirmed";
    case FeatureDecision::Tentative: return "Tentative";
    case FeatureDecision::Rejected: return "Rejected";
  }
  return "Tentative";
}

std::vector<std::size_t> BorutaReport::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < decisions.size(); ++f) {
    if (decisions[f] != FeatureDecision::Rejected) out.push_back(f);
  }
  return out;
}

double binomial_two_sided_p(std::int64_t hits, std::int64_t trials) {
  if (trials < 0) throw std::invalid_argument("negative trial count");
  if (hits < 0 || hits > trials) throw std::invalid_argument("hits outside [0, trials]");
  if (trials == 0) return 1.0;  // no evidence either way

  const std::int64_t m = std::min(hits, trials - hits);
  double tail;
  if (trials <= 62) {
    // C(n,i) fits in 64 bits up to n=62; the tail sum stays below 2^(n-1),
    // so the dyadic scaling is the only rounding step.
    std::uint64_t c = 1;
    std::uint64_t sum = 1;
    for (std::int64_t i = 1; i <= m; ++i) {
      c = static_cast<std::uint64_t>((static_cast<unsigned __int128>(c) *
                                      static_cast<std::uint64_t>(trials - i + 1)) /
                                     static_cast<std::uint64_t>(i));
      sum += c;
    }
    tail = std::ldexp(static_cast<double>(sum), -static_cast<int>(trials));
  } else {
    double term = std::ldexp(1.0, -static_cast<int>(trials));
    tail = term;
    for (std::int64_t i = 1; i <= m; ++i) {
      term *= static_cast<double>(trials - i + 1) / static_cast<double>(i);
      tail += term;
    }
  }
  return std::min(1.0, 2.0 * tail);
}

LabeledDataset add_shadow_features(const LabeledDataset& d, std::uint64_t seed) {
  const std::size_t n = d.n_rows();
  const std::size_t f_count = d.n_features();
  LabeledDataset out;
  out.feature_names = d.feature_names;
  for (const std::string& name : d.feature_names) out.feature_names.push_back("shadow_" + name);
  out.labels = d.labels;
  out.values.resize(n * 2 * f_count);

  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  for (std::size_t f = 0; f < f_count; ++f) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    for (std::size_t r = 0; r < n; ++r) {
      out.values[r * 2 * f_count + f] = d.at(r, f);
      out.values[r * 2 * f_count + f_count + f] = d.at(perm[r], f);
    }
  }
  out.check_invariants();
  return out;
}

BorutaIteration boruta_iteration(const LabeledDataset& d, std::span<const std::size_t> active,
                                 const BorutaConfig& cfg, std::size_t iteration) {
  if (active.empty()) throw std::invalid_argument("boruta iteration with no active features");

  const LabeledDataset narrowed = d.select_features(active);
  const LabeledDataset shadowed =
      add_shadow_features(narrowed, derive_seed(cfg.seed, 3 * iteration));

  ForestTrainOptions options;
  options.n_workers = cfg.n_workers;
  const ForestModel forest = train_forest(shadowed, cfg.n_trees_per_iteration, cfg.forest_params,
                                          derive_seed(cfg.seed, 3 * iteration + 1), options);
  const ImportanceScores scores =
      permutation_importance(forest, shadowed, derive_seed(cfg.seed, 3 * iteration + 2));

  const std::size_t f_count = active.size();
  BorutaIteration result;
  result.z.assign(scores.z_score.begin(), scores.z_score.begin() + f_count);
  result.mzsa = *std::max_element(scores.z_score.begin() + f_count, scores.z_score.end());
  result.hit.resize(f_count);
  for (std::size_t i = 0; i < f_count; ++i) result.hit[i] = result.z[i] > result.mzsa;
  return result;
}

std::vector<FeatureDecision> decide_features(std::span<const std::int64_t> hits,
                                             std::int64_t trials, const BorutaConfig& cfg) {
  if (trials < 0) throw std::invalid_argument("negative trial count");
  const double threshold = cfg.multiple_testing == MultipleTesting::Bonferroni
                               ? cfg.alpha / static_cast<double>(hits.size())
                               : cfg.alpha;
  std::vector<FeatureDecision> out(hits.size(), FeatureDecision::Tentative);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const double p = binomial_two_sided_p(hits[i], trials);
    if (p < threshold) {
      out[i] = 2 * hits[i] > trials ? FeatureDecision::Confirmed : FeatureDecision::Rejected;
    }
  }
  return out;
}

BorutaReport run_boruta(const LabeledDataset& d, const BorutaConfig& cfg) {
  if (d.n_features() == 0) throw std::domain_error("no features to select from");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha outside (0, 1)");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");

  const std::size_t f_count = d.n_features();
  BorutaReport report;
  report.feature_names = d.feature_names;
  report.decisions.assign(f_count, FeatureDecision::Tentative);
  report.hits.assign(f_count, 0);
  report.trials.assign(f_count, 0);
  report.z_history.assign(f_count, {});

  std::vector<std::size_t> active(f_count);
  std::iota(active.begin(), active.end(), std::size_t{0});

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    bool any_tentative = false;
    for (FeatureDecision dec : report.decisions) {
      any_tentative = any_tentative || dec == FeatureDecision::Tentative;
    }
    if (!any_tentative) break;

    const BorutaIteration round = boruta_iteration(d, active, cfg, iter);
    report.mzsa_history.push_back(round.mzsa);
    ++report.iterations_run;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t f = active[i];
      report.z_history[f].push_back(round.z[i]);
      ++report.trials[f];
      if (round.hit[i]) ++report.hits[f];
    }

    std::vector<std::size_t> undecided;
    std::vector<std::int64_t> undecided_hits;
    for (std::size_t f = 0; f < f_count; ++f) {
      if (report.decisions[f] == FeatureDecision::Tentative) {
        undecided.push_back(f);
        undecided_hits.push_back(report.hits[f]);
      }
    }
    const auto verdicts =
        decide_features(undecided_hits, static_cast<std::int64_t>(report.iterations_run), cfg);
    bool any_rejected = false;
    for (std::size_t i = 0; i < undecided.size(); ++i) {
      report.decisions[undecided[i]] = verdicts[i];
      any_rejected = any_rejected || verdicts[i] == FeatureDecision::Rejected;
    }
    if (any_rejected) {
      std::erase_if(active, [&](std::size_t f) {
        return report.decisions[f] == FeatureDecision::Rejected;
      });
      if (active.empty()) break;
    }
  }
  return report;
}

std::string boruta_report_csv(const BorutaReport& report) {
  std::string out = "feature,decision,hits,trials,mean_z\n";
  for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
    const auto& history = report.z_history[f];
    double mean_z = 0.0;
    if (!history.empty()) {
      for (double z : history) mean_z += z;
      mean_z /= static_cast<double>(history.size());
    }
    out += csv::join_row({report.feature_names[f], to_string(report.decisions[f]),
                          std::to_string(report.hits[f]), std::to_string(report.trials[f]),
                          csv::format_double(mean_z)});
  }
  return out;
}

std::string boruta_history_json(const BorutaReport& report) {
  nlohmann::ordered_json doc;
  doc["iterations_run"] = report.iterations_run;
  doc["mzsa_history"] = report.mzsa_history;
  nlohmann::ordered_json features = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
    nlohmann::ordered_json entry;
    entry["decision"] = to_string(report.decisions[f]);
    entry["hits"] = report.hits[f];
    entry["trials"] = report.trials[f];
    entry["z_history"] = report.z_history[f];
    features[report.feature_names[f]] = std::move(entry);
  }
  doc["features"] = std::move(features);
  return doc.dump(2) + "\n";
}

}  // namespace turnover
