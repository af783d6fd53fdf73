#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "turnover/forest.hpp"

namespace turnover {

enum class LinearKind : std::uint8_t { MultinomialLogistic, SvmOvr };

const char* to_string(LinearKind k);

// Linear per-class scorer over standardized features. weights is a
// kNumClasses x (n_features + 1) row-major matrix; the trailing column of
// each row is the class bias and is never regularized.
struct LinearModel {
  LinearKind kind = LinearKind::MultinomialLogistic;
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  std::vector<double> feature_means;
  std::vector<double> feature_stddevs;  // entries > 0; constant columns get 1
  std::vector<double> loss_history;     // full-dataset loss/objective per epoch

  std::size_t n_features() const { return feature_names.size(); }
};

struct GdConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::size_t batch = 0;  // 0 trains full-batch
  std::uint64_t seed = 0;
};

// Per-class decision values for a raw (unstandardized) row.
std::array<double, kNumClasses> linear_scores(const LinearModel& m, std::span<const double> row);

// Softmax of linear_scores; sums to 1 for any finite scores.
std::array<double, kNumClasses> softmax_probabilities(const LinearModel& m,
                                                      std::span<const double> row);

// argmax of the decision values, ties toward the lower class letter.
// Throws std::domain_error on arity mismatch.
TurnoverClass predict_linear(const LinearModel& m, std::span<const double> row);

// Loss / gradient kernels, exposed so finite-difference checks can drive
// them directly. `x` is row-major n x F and already standardized; `weights`
// is the full K x (F+1) matrix described on LinearModel. The l2 term is
// (l2/2) * sum of squared non-bias weights.
double logreg_loss(std::span<const double> weights, std::size_t n_features,
                   std::span<const double> x, std::span<const TurnoverClass> labels, double l2);
std::vector<double> logreg_gradient(std::span<const double> weights, std::size_t n_features,
                                    std::span<const double> x,
                                    std::span<const TurnoverClass> labels, double l2);

// Sum over classes of the one-vs-rest hinge objective:
// (1/n) sum_i max(0, 1 - y_ik s_ik) + (l2/2)|w_k|^2 with y_ik = +-1.
double svm_objective(std::span<const double> weights, std::size_t n_features,
                     std::span<const double> x, std::span<const TurnoverClass> labels, double l2);
std::vector<double> svm_subgradient(std::span<const double> weights, std::size_t n_features,
                                    std::span<const double> x,
                                    std::span<const TurnoverClass> labels, double l2);

// Full-batch gradient descent with step halving on the softmax
// cross-entropy; the recorded loss never increases between epochs.
// Throws TrainingError when the loss turns non-finite.
LinearModel train_multinomial_logreg(const LabeledDataset& d, const GdConfig& cfg);

// One-vs-rest subgradient descent on the hinge objective with a
// learning_rate/sqrt(epoch) step. Each class keeps its best iterate, so the
// returned objective never exceeds the zero-weight starting point. A class
// with no training rows becomes a constant -1 scorer.
LinearModel train_svm_ovr(const LabeledDataset& d, const GdConfig& cfg);

enum class TreeVariant : std::uint8_t { Partylike, Rpartlike };

const char* to_string(TreeVariant v);

struct SingleTreeModel {
  TreeVariant variant = TreeVariant::Rpartlike;
  std::vector<std::string> feature_names;
  DecisionTree tree;

  TurnoverClass predict(std::span<const double> row) const;
};

// Single CART tree with every feature available at every node.
// `Rpartlike` grows plain CART with min_samples_leaf = 5; `Partylike`
// accepts a split only when a chi-squared test on the split/label table is
// significant at 0.05 after Bonferroni correction over the candidates.
SingleTreeModel train_single_tree(const LabeledDataset& d, TreeVariant variant);

}  // namespace turnover
