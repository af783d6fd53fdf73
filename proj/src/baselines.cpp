#include "turnover/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "turnover/errors.hpp"
#include "turnover/rng.hpp"

namespace turnover {

const char* to_string(LinearKind k) {
  return k == LinearKind::MultinomialLogistic ? "multinomial_logistic" : "svm_ovr";
}

const char* to_string(TreeVariant v) { return v == TreeVariant::Partylike ? "partylike" : "rpartlike"; }

namespace {

constexpr std::size_t K = kNumClasses;

std::size_t weight_count(std::size_t n_features) { return K * (n_features + 1); }

// Population standard deviation; constant columns report 1 so that
// standardizing maps them to exactly zero.
void fit_standardization(const LabeledDataset& d, std::vector<double>& means,
                         std::vector<double>& stddevs) {
  const std::size_t n = d.n_rows();
  const std::size_t f_count = d.n_features();
  means.assign(f_count, 0.0);
  stddevs.assign(f_count, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < f_count; ++f) means[f] += d.at(r, f);
  }
  for (double& m : means) m /= static_cast<double>(n);
  for (std::size_t f = 0; f < f_count; ++f) {
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double delta = d.at(r, f) - means[f];
      ss += delta * delta;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    stddevs[f] = sd > 0.0 ? sd : 1.0;
  }
}

std::vector<double> standardized_matrix(const LabeledDataset& d, const std::vector<double>& means,
                                        const std::vector<double>& stddevs) {
  const std::size_t n = d.n_rows();
  const std::size_t f_count = d.n_features();
  std::vector<double> x(n * f_count);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < f_count; ++f) {
      x[r * f_count + f] = (d.at(r, f) - means[f]) / stddevs[f];
    }
  }
  return x;
}

void class_scores(std::span<const double> weights, std::size_t f_count,
                  std::span<const double> row, std::array<double, K>& out) {
  for (std::size_t k = 0; k < K; ++k) {
    const double* w = weights.data() + k * (f_count + 1);
    double s = w[f_count];
    for (std::size_t f = 0; f < f_count; ++f) s += w[f] * row[f];
    out[k] = s;
  }
}

double l2_penalty(std::span<const double> weights, std::size_t f_count, double l2) {
  double ss = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double* w = weights.data() + k * (f_count + 1);
    for (std::size_t f = 0; f < f_count; ++f) ss += w[f] * w[f];
  }
  return 0.5 * l2 * ss;
}

void add_l2_gradient(std::span<const double> weights, std::size_t f_count, double l2,
                     std::vector<double>& grad) {
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t base = k * (f_count + 1);
    for (std::size_t f = 0; f < f_count; ++f) grad[base + f] += l2 * weights[base + f];
  }
}

struct EpochPlan {
  std::vector<std::size_t> order;
  std::size_t batch = 0;
};

}  // namespace

std::array<double, kNumClasses> linear_scores(const LinearModel& m, std::span<const double> row) {
  if (row.size() != m.n_features()) {
    throw std::domain_error("row arity " + std::to_string(row.size()) +
                            " does not match model feature count " +
                            std::to_string(m.n_features()));
  }
  std::vector<double> standardized(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) {
    standardized[f] = (row[f] - m.feature_means[f]) / m.feature_stddevs[f];
  }
  std::array<double, K> scores{};
  class_scores(m.weights, m.n_features(), standardized, scores);
  return scores;
}

std::array<double, kNumClasses> softmax_probabilities(const LinearModel& m,
                                                      std::span<const double> row) {
  auto scores = linear_scores(m, row);
  const double peak = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - peak);
    total += s;
  }
  for (double& s : scores) s /= total;
  return scores;
}

TurnoverClass predict_linear(const LinearModel& m, std::span<const double> row) {
  const auto scores = linear_scores(m, row);
  std::size_t best = 0;
  for (std::size_t k = 1; k < K; ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return static_cast<TurnoverClass>(best);
}

double logreg_loss(std::span<const double> weights, std::size_t n_features,
                   std::span<const double> x, std::span<const TurnoverClass> labels, double l2) {
  const std::size_t n = labels.size();
  std::array<double, K> scores{};
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    class_scores(weights, n_features, x.subspan(r * n_features, n_features), scores);
    const double peak = *std::max_element(scores.begin(), scores.end());
    double sum_exp = 0.0;
    for (double s : scores) sum_exp += std::exp(s - peak);
    total += peak + std::log(sum_exp) - scores[class_index(labels[r])];
  }
  return total / static_cast<double>(n) + l2_penalty(weights, n_features, l2);
}

std::vector<double> logreg_gradient(std::span<const double> weights, std::size_t n_features,
                                    std::span<const double> x,
                                    std::span<const TurnoverClass> labels, double l2) {
  const std::size_t n = labels.size();
  std::vector<double> grad(weight_count(n_features), 0.0);
  std::array<double, K> scores{};
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.subspan(r * n_features, n_features);
    class_scores(weights, n_features, row, scores);
    const double peak = *std::max_element(scores.begin(), scores.end());
    double sum_exp = 0.0;
    for (double& s : scores) {
      s = std::exp(s - peak);
      sum_exp += s;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double coeff = scores[k] / sum_exp - (class_index(labels[r]) == k ? 1.0 : 0.0);
      double* g = grad.data() + k * (n_features + 1);
      for (std::size_t f = 0; f < n_features; ++f) g[f] += coeff * row[f];
      g[n_features] += coeff;
    }
  }
  for (double& g : grad) g /= static_cast<double>(n);
  add_l2_gradient(weights, n_features, l2, grad);
  return grad;
}

double svm_objective(std::span<const double> weights, std::size_t n_features,
                     std::span<const double> x, std::span<const TurnoverClass> labels, double l2) {
  const std::size_t n = labels.size();
  std::array<double, K> scores{};
  double hinge = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    class_scores(weights, n_features, x.subspan(r * n_features, n_features), scores);
    for (std::size_t k = 0; k < K; ++k) {
      const double y = class_index(labels[r]) == k ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - y * scores[k]);
    }
  }
  return hinge / static_cast<double>(n) + l2_penalty(weights, n_features, l2);
}

std::vector<double> svm_subgradient(std::span<const double> weights, std::size_t n_features,
                                    std::span<const double> x,
                                    std::span<const TurnoverClass> labels, double l2) {
  const std::size_t n = labels.size();
  std::vector<double> grad(weight_count(n_features), 0.0);
  std::array<double, K> scores{};
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.subspan(r * n_features, n_features);
    class_scores(weights, n_features, row, scores);
    for (std::size_t k = 0; k < K; ++k) {
      const double y = class_index(labels[r]) == k ? 1.0 : -1.0;
      if (y * scores[k] < 1.0) {
        double* g = grad.data() + k * (n_features + 1);
        for (std::size_t f = 0; f < n_features; ++f) g[f] -= y * row[f];
        g[n_features] -= y;
      }
    }
  }
  for (double& g : grad) g /= static_cast<double>(n);
  add_l2_gradient(weights, n_features, l2, grad);
  return grad;
}

namespace {

void validate_gd_config(const GdConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (cfg.l2 < 0.0) throw std::invalid_argument("l2 must be non-negative");
}

LinearModel init_linear(const LabeledDataset& d, LinearKind kind) {
  if (d.n_rows() == 0) throw std::invalid_argument("cannot train a linear model on no rows");
  LinearModel m;
  m.kind = kind;
  m.feature_names = d.feature_names;
  m.weights.assign(weight_count(d.n_features()), 0.0);
  fit_standardization(d, m.feature_means, m.feature_stddevs);
  return m;
}

EpochPlan make_plan(std::size_t n, std::size_t batch, std::uint64_t seed, std::size_t epoch) {
  EpochPlan plan;
  plan.batch = batch == 0 || batch >= n ? n : batch;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
  if (plan.batch < n) {
    Rng rng(derive_seed(seed, epoch));
    rng.shuffle(plan.order);
  }
  return plan;
}

// Gathers the rows of one mini-batch into a dense matrix.
void gather_batch(std::span<const double> x, std::span<const TurnoverClass> labels,
                  std::size_t f_count, std::span<const std::size_t> rows,
                  std::vector<double>& bx, std::vector<TurnoverClass>& blabels) {
  bx.resize(rows.size() * f_count);
  blabels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.subspan(rows[i] * f_count, f_count);
    std::copy(src.begin(), src.end(), bx.begin() + static_cast<std::ptrdiff_t>(i * f_count));
    blabels[i] = labels[rows[i]];
  }
}

}  // namespace

LinearModel train_multinomial_logreg(const LabeledDataset& d, const GdConfig& cfg) {
  validate_gd_config(cfg);
  LinearModel m = init_linear(d, LinearKind::MultinomialLogistic);
  const std::size_t f_count = d.n_features();
  const std::vector<double> x = standardized_matrix(d, m.feature_means, m.feature_stddevs);

  double loss = logreg_loss(m.weights, f_count, x, d.labels, cfg.l2);
  m.loss_history.push_back(loss);
  std::vector<double> trial(m.weights.size());
  std::vector<double> bx;
  std::vector<TurnoverClass> blabels;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const EpochPlan plan = make_plan(d.n_rows(), cfg.batch, cfg.seed, epoch);
    if (plan.batch == d.n_rows()) {
      // Step halving keeps the full-batch loss non-increasing.
      const std::vector<double> grad = logreg_gradient(m.weights, f_count, x, d.labels, cfg.l2);
      double step = cfg.learning_rate;
      for (int attempt = 0; attempt < 60; ++attempt) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = m.weights[i] - step * grad[i];
        const double candidate = logreg_loss(trial, f_count, x, d.labels, cfg.l2);
        if (std::isfinite(candidate) && candidate <= loss) {
          m.weights = trial;
          loss = candidate;
          break;
        }
        step *= 0.5;
      }
    } else {
      for (std::size_t start = 0; start < plan.order.size(); start += plan.batch) {
        const std::size_t len = std::min(plan.batch, plan.order.size() - start);
        gather_batch(x, d.labels, f_count, {plan.order.data() + start, len}, bx, blabels);
        const std::vector<double> grad = logreg_gradient(m.weights, f_count, bx, blabels, cfg.l2);
        for (std::size_t i = 0; i < m.weights.size(); ++i) {
          m.weights[i] -= cfg.learning_rate * grad[i];
        }
      }
      loss = logreg_loss(m.weights, f_count, x, d.labels, cfg.l2);
    }
    if (!std::isfinite(loss)) {
      throw TrainingError("logistic regression diverged at epoch " + std::to_string(epoch));
    }
    m.loss_history.push_back(loss);
  }
  return m;
}

LinearModel train_svm_ovr(const LabeledDataset& d, const GdConfig& cfg) {
  validate_gd_config(cfg);
  LinearModel m = init_linear(d, LinearKind::SvmOvr);
  const std::size_t f_count = d.n_features();
  const std::vector<double> x = standardized_matrix(d, m.feature_means, m.feature_stddevs);
  const ClassHistogram histogram = d.label_histogram();

  // Absent classes never win the argmax: constant -1 margin, zero weights.
  std::array<bool, K> present{};
  for (std::size_t k = 0; k < K; ++k) {
    present[k] = histogram[k] > 0;
    if (!present[k]) m.weights[k * (f_count + 1) + f_count] = -1.0;
  }

  std::vector<double> best = m.weights;
  double best_objective = svm_objective(m.weights, f_count, x, d.labels, cfg.l2);
  m.loss_history.push_back(best_objective);
  std::vector<double> bx;
  std::vector<TurnoverClass> blabels;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double step = cfg.learning_rate / std::sqrt(static_cast<double>(epoch));
    const EpochPlan plan = make_plan(d.n_rows(), cfg.batch, cfg.seed, epoch);
    for (std::size_t start = 0; start < plan.order.size(); start += plan.batch) {
      const std::size_t len = std::min(plan.batch, plan.order.size() - start);
      std::vector<double> grad;
      if (plan.batch == d.n_rows()) {
        grad = svm_subgradient(m.weights, f_count, x, d.labels, cfg.l2);
      } else {
        gather_batch(x, d.labels, f_count, {plan.order.data() + start, len}, bx, blabels);
        grad = svm_subgradient(m.weights, f_count, bx, blabels, cfg.l2);
      }
      for (std::size_t k = 0; k < K; ++k) {
        if (!present[k]) continue;  // frozen constant scorer
        const std::size_t base = k * (f_count + 1);
        for (std::size_t j = 0; j <= f_count; ++j) {
          m.weights[base + j] -= step * grad[base + j];
        }
      }
    }
    const double objective = svm_objective(m.weights, f_count, x, d.labels, cfg.l2);
    if (!std::isfinite(objective)) {
      throw TrainingError("svm diverged at epoch " + std::to_string(epoch));
    }
    m.loss_history.push_back(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best = m.weights;
    }
  }
  m.weights = std::move(best);
  return m;
}

TurnoverClass SingleTreeModel::predict(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw std::domain_error("row arity " + std::to_string(row.size()) +
                            " does not match model feature count " +
                            std::to_string(feature_names.size()));
  }
  return tree.predict(row);
}

SingleTreeModel train_single_tree(const LabeledDataset& d, TreeVariant variant) {
  if (d.n_rows() == 0) throw std::invalid_argument("cannot train a tree on no rows");
  TreeParams params;
  params.mtry = d.n_features();
  if (variant == TreeVariant::Rpartlike) {
    params.min_samples_leaf = 5;
  } else {
    params.significance_alpha = 0.05;
  }
  std::vector<std::size_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  SingleTreeModel model;
  model.variant = variant;
  model.feature_names = d.feature_names;
  model.tree = train_tree(d, rows, params, 0);
  return model;
}

}  // namespace turnover
