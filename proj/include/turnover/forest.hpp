#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "turnover/data_model.hpp"

namespace turnover {

struct TreeParams {
  static constexpr int kUnlimitedDepth = -1;

  int max_depth = kUnlimitedDepth;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  // Features sampled per node; 0 selects floor(sqrt(F)) at training time.
  std::size_t mtry = 0;
  // When > 0, a found split is kept only if a chi-squared independence test
  // between the split indicator and the label is significant at this level,
  // Bonferroni-corrected over the node's candidate features. 0 disables the
  // gate. Used by the conditional-inference-style single-tree baseline.
  double significance_alpha = 0.0;

  std::size_t resolved_mtry(std::size_t n_features) const;
};

// Binary CART tree over real-valued features. Internal nodes route
// value <= threshold left, > threshold right. Stored as a flat node vector
// with the root at index 0; children are created in pre-order, left first.
class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassHistogram counts{};  // training-row class counts (leaves)
    TurnoverClass predicted = TurnoverClass::A;

    bool is_leaf() const { return feature < 0; }

    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;

  TurnoverClass predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
  // Features referenced by at least one internal node.
  std::vector<bool> used_features(std::size_t n_features) const;

  bool operator==(const DecisionTree&) const = default;
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;
};

// 1 - sum_k p_k^2 over the histogram; throws std::domain_error on an empty
// histogram.
double gini_impurity(const ClassHistogram& counts);

// Exhaustive best split over the given rows and candidate features.
// Thresholds are midpoints between consecutive distinct sorted values.
// Ties break toward the lower feature index, then the lower threshold.
// Returns nullopt when no split has a positive weighted Gini decrease or
// when no side can satisfy min_leaf.
std::optional<SplitCandidate> best_split(const LabeledDataset& d,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_leaf = 1);

// Grows a CART tree over the given rows. At every node a fresh uniform
// sample of mtry features is drawn from the tree's RNG (seeded by rng_seed;
// nodes are processed pre-order, left child first, so the draw sequence is
// reproducible). Deterministic given (d, rows, params, rng_seed).
DecisionTree train_tree(const LabeledDataset& d, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t rng_seed);

struct ForestPrediction {
  TurnoverClass predicted = TurnoverClass::A;
  ClassHistogram votes{};
};

// Bagged ensemble of CART trees. Per-tree seeds are derived from the master
// seed before any parallel work starts, so the model is identical for any
// worker count.
struct ForestModel {
  TreeParams params;
  std::vector<std::string> feature_names;
  std::vector<std::uint64_t> per_tree_seeds;
  std::vector<DecisionTree> trees;
  // Rows left out of each tree's bootstrap sample, ascending. Not part of
  // the serialized model; used for OOB estimates and permutation importance.
  std::vector<std::vector<std::uint32_t>> oob_rows;
  std::size_t n_training_rows = 0;

  std::size_t n_trees() const { return trees.size(); }
  ForestPrediction predict(std::span<const double> row) const;
};

struct ForestTrainOptions {
  std::size_t n_workers = 1;
  // Test hook: when false every tree trains on all rows and no row is OOB.
  bool bootstrap = true;
};

ForestModel train_forest(const LabeledDataset& d, std::size_t n_trees, const TreeParams& params,
                         std::uint64_t seed, const ForestTrainOptions& options = {});

// Per-feature permutation importance over each tree's out-of-bag rows.
struct ImportanceScores {
  std::vector<std::string> feature_names;
  // raw[f][t]: OOB accuracy drop of tree t when feature f is permuted.
  std::vector<std::vector<double>> raw;
  std::vector<double> mean;
  std::vector<double> z_score;  // mean / (stddev / sqrt(n_trees)); 0 when stddev is 0
  // Trees with fewer than two OOB rows; they contribute 0 for every feature.
  std::size_t degenerate_trees = 0;
};

// d must be the dataset the forest was trained on. Permutations are drawn
// from `seed` per (tree, feature), so scores do not depend on evaluation
// order. A feature a tree never splits on has exactly zero importance for
// that tree.
ImportanceScores permutation_importance(const ForestModel& m, const LabeledDataset& d,
                                        std::uint64_t seed);

// Majority vote over each row's OOB trees; rows that are OOB for no tree get
// an empty histogram and count as misclassified by oob_accuracy.
std::vector<ClassHistogram> oob_vote_histograms(const ForestModel& m, const LabeledDataset& d);
double oob_accuracy(const ForestModel& m, const LabeledDataset& d);

}  // namespace turnover
