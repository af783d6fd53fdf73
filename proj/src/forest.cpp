#include "turnover/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "turnover/rng.hpp"

namespace turnover {

std::size_t TreeParams::resolved_mtry(std::size_t n_features) const {
  if (mtry == 0) {
    const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features))));
    return std::max<std::size_t>(1, root);
  }
  return std::min(mtry, n_features);
}

TurnoverClass DecisionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const Node& node = nodes[i];
    i = row[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? static_cast<std::size_t>(node.left)
            : static_cast<std::size_t>(node.right);
  }
  return nodes[i].predicted;
}

std::size_t DecisionTree::leaf_count() const {
  std::size_t count = 0;
  for (const Node& n : nodes) count += n.is_leaf() ? 1 : 0;
  return count;
}

std::size_t DecisionTree::depth() const {
  // Iterative: depth of node = depth of parent + 1.
  std::vector<std::size_t> depths(nodes.size(), 0);
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      max_depth = std::max(max_depth, depths[i]);
    } else {
      depths[static_cast<std::size_t>(nodes[i].left)] = depths[i] + 1;
      depths[static_cast<std::size_t>(nodes[i].right)] = depths[i] + 1;
    }
  }
  return max_depth;
}

std::vector<bool> DecisionTree::used_features(std::size_t n_features) const {
  std::vector<bool> used(n_features, false);
  for (const Node& n : nodes) {
    if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = true;
  }
  return used;
}

double gini_impurity(const ClassHistogram& counts) {
  std::int64_t total = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::domain_error("negative class count");
    total += c;
  }
  if (total == 0) throw std::domain_error("gini impurity of an empty histogram");
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

// Weighted Gini decrease for a (left, right) partition of a parent node.
// The same expression is used by the training sweep and by the brute-force
// oracle in the tests, so candidate comparisons are reproducible.
double weighted_decrease(double parent_gini, const ClassHistogram& left, std::int64_t n_left,
                         const ClassHistogram& right, std::int64_t n_right) {
  const double n = static_cast<double>(n_left + n_right);
  return parent_gini - (static_cast<double>(n_left) / n) * gini_impurity(left) -
         (static_cast<double>(n_right) / n) * gini_impurity(right);
}

struct ValueLabel {
  double value;
  std::uint8_t label;
};

}  // namespace

std::optional<SplitCandidate> best_split(const LabeledDataset& d,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_leaf) {
  if (rows.empty()) throw std::invalid_argument("best_split over an empty row set");

  ClassHistogram parent_counts{};
  for (std::size_t r : rows) ++parent_counts[class_index(d.labels[r])];
  const double parent_gini = gini_impurity(parent_counts);
  if (parent_gini == 0.0) return std::nullopt;

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<SplitCandidate> best;
  std::vector<ValueLabel> column(rows.size());
  const std::int64_t n = static_cast<std::int64_t>(rows.size());

  for (std::size_t f : features) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {d.at(rows[i], f), static_cast<std::uint8_t>(class_index(d.labels[rows[i]]))};
    }
    std::sort(column.begin(), column.end(),
              [](const ValueLabel& a, const ValueLabel& b) { return a.value < b.value; });

    ClassHistogram left{};
    ClassHistogram right = parent_counts;
    std::int64_t n_left = 0;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[column[i].label];
      --right[column[i].label];
      ++n_left;
      if (column[i].value == column[i + 1].value) continue;  // not a boundary
      const std::int64_t n_right = n - n_left;
      if (static_cast<std::size_t>(n_left) < min_leaf ||
          static_cast<std::size_t>(n_right) < min_leaf) {
        continue;
      }
      const double decrease = weighted_decrease(parent_gini, left, n_left, right, n_right);
      if (decrease <= 0.0) continue;
      if (!best || decrease > best->impurity_decrease) {
        const double threshold = (column[i].value + column[i + 1].value) / 2.0;
        best = SplitCandidate{f, threshold, decrease};
      }
    }
  }
  return best;
}

namespace {

// Two-sided chi-squared independence test between the split indicator and
// the labels present at the node. Returns the unadjusted p-value.
double split_chi_squared_p(const ClassHistogram& left, const ClassHistogram& right) {
  ClassHistogram total{};
  std::int64_t n_left = 0, n_right = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    total[k] = left[k] + right[k];
    n_left += left[k];
    n_right += right[k];
  }
  const double n = static_cast<double>(n_left + n_right);
  int present = 0;
  double statistic = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (total[k] == 0) continue;
    ++present;
    const double expected_left = static_cast<double>(n_left) * static_cast<double>(total[k]) / n;
    const double expected_right = static_cast<double>(n_right) * static_cast<double>(total[k]) / n;
    const double dl = static_cast<double>(left[k]) - expected_left;
    const double dr = static_cast<double>(right[k]) - expected_right;
    statistic += dl * dl / expected_left + dr * dr / expected_right;
  }
  if (present < 2) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(present - 1));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

struct PendingNode {
  std::int32_t index;
  std::vector<std::size_t> rows;
  int depth;
};

void finalize_leaf(DecisionTree::Node& node, const LabeledDataset& d,
                   std::span<const std::size_t> rows) {
  node.feature = -1;
  node.counts = ClassHistogram{};
  for (std::size_t r : rows) ++node.counts[class_index(d.labels[r])];
  node.predicted = argmax_class(node.counts);
}

}  // namespace

DecisionTree train_tree(const LabeledDataset& d, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t rng_seed) {
  if (rows.empty()) throw std::invalid_argument("train_tree over an empty row set");
  const std::size_t n_features = d.n_features();
  const std::size_t mtry = params.resolved_mtry(n_features);

  Rng rng(rng_seed);
  DecisionTree tree;
  tree.nodes.emplace_back();

  std::vector<PendingNode> stack;
  stack.push_back({0, {rows.begin(), rows.end()}, 0});

  while (!stack.empty()) {
    PendingNode pending = std::move(stack.back());
    stack.pop_back();
    DecisionTree::Node& node = tree.nodes[static_cast<std::size_t>(pending.index)];

    const bool depth_capped =
        params.max_depth != TreeParams::kUnlimitedDepth && pending.depth >= params.max_depth;
    if (depth_capped || pending.rows.size() < params.min_samples_split) {
      finalize_leaf(node, d, pending.rows);
      continue;
    }

    std::vector<std::size_t> candidates;
    if (mtry >= n_features) {
      candidates.resize(n_features);
      for (std::size_t i = 0; i < n_features; ++i) candidates[i] = i;
    } else {
      candidates = rng.sample_without_replacement(n_features, mtry);
    }

    const auto split = best_split(d, pending.rows, candidates, params.min_samples_leaf);
    if (!split) {
      finalize_leaf(node, d, pending.rows);
      continue;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : pending.rows) {
      (d.at(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
    }

    if (params.significance_alpha > 0.0) {
      ClassHistogram lc{}, rc{};
      for (std::size_t r : left_rows) ++lc[class_index(d.labels[r])];
      for (std::size_t r : right_rows) ++rc[class_index(d.labels[r])];
      const double p = split_chi_squared_p(lc, rc);
      if (!(p < params.significance_alpha / static_cast<double>(candidates.size()))) {
        finalize_leaf(node, d, pending.rows);
        continue;
      }
    }

    node.feature = static_cast<std::int32_t>(split->feature);
    node.threshold = split->threshold;
    node.left = static_cast<std::int32_t>(tree.nodes.size());
    node.right = node.left + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    const std::int32_t left_index = tree.nodes[static_cast<std::size_t>(pending.index)].left;
    const std::int32_t right_index = tree.nodes[static_cast<std::size_t>(pending.index)].right;
    stack.push_back({right_index, std::move(right_rows), pending.depth + 1});
    stack.push_back({left_index, std::move(left_rows), pending.depth + 1});
  }
  return tree;
}

ForestPrediction ForestModel::predict(std::span<const double> row) const {
  if (row.size() != feature_names.size()) {
    throw std::domain_error("row arity " + std::to_string(row.size()) +
                            " does not match model feature count " +
                            std::to_string(feature_names.size()));
  }
  ForestPrediction out;
  for (const DecisionTree& tree : trees) ++out.votes[class_index(tree.predict(row))];
  out.predicted = argmax_class(out.votes);
  return out;
}

ForestModel train_forest(const LabeledDataset& d, std::size_t n_trees, const TreeParams& params,
                         std::uint64_t seed, const ForestTrainOptions& options) {
  if (d.n_rows() == 0) throw std::invalid_argument("cannot train a forest on an empty dataset");
  if (n_trees == 0) throw std::invalid_argument("n_trees must be at least 1");

  ForestModel model;
  model.params = params;
  model.feature_names = d.feature_names;
  model.n_training_rows = d.n_rows();
  model.per_tree_seeds.resize(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) model.per_tree_seeds[t] = derive_seed(seed, t);
  model.trees.resize(n_trees);
  model.oob_rows.resize(n_trees);

  const std::size_t n = d.n_rows();
  auto train_one = [&](std::size_t t) {
    // Bootstrap draw and tree growth use separate streams off the tree seed.
    std::vector<std::size_t> bag;
    std::vector<bool> in_bag(n, false);
    if (options.bootstrap) {
      Rng bag_rng(derive_seed(model.per_tree_seeds[t], 0));
      bag.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        bag[i] = bag_rng.uniform_index(n);
        in_bag[bag[i]] = true;
      }
    } else {
      bag.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        bag[i] = i;
        in_bag[i] = true;
      }
    }
    model.trees[t] = train_tree(d, bag, params, derive_seed(model.per_tree_seeds[t], 1));
    auto& oob = model.oob_rows[t];
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_bag[i]) oob.push_back(static_cast<std::uint32_t>(i));
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, options.n_workers);
  if (workers == 1 || n_trees == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) train_one(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min(workers, n_trees); ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < n_trees; t = next.fetch_add(1)) train_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

ImportanceScores permutation_importance(const ForestModel& m, const LabeledDataset& d,
                                        std::uint64_t seed) {
  if (d.n_rows() != m.n_training_rows || d.n_features() != m.feature_names.size()) {
    throw std::invalid_argument("permutation importance requires the forest's training dataset");
  }
  const std::size_t n_features = d.n_features();
  const std::size_t n_trees = m.n_trees();

  ImportanceScores scores;
  scores.feature_names = m.feature_names;
  scores.raw.assign(n_features, std::vector<double>(n_trees, 0.0));

  std::vector<double> probe;
  for (std::size_t t = 0; t < n_trees; ++t) {
    const auto& oob = m.oob_rows[t];
    if (oob.size() < 2) {
      ++scores.degenerate_trees;
      continue;
    }
    const DecisionTree& tree = m.trees[t];
    const auto used = tree.used_features(n_features);

    std::int64_t correct = 0;
    for (std::uint32_t r : oob) {
      if (tree.predict(d.row(r)) == d.labels[r]) ++correct;
    }
    const double base_acc = static_cast<double>(correct) / static_cast<double>(oob.size());

    std::vector<std::size_t> positions(oob.size());
    for (std::size_t f = 0; f < n_features; ++f) {
      if (!used[f]) continue;  // permuting an unread column cannot change anything
      Rng perm_rng(derive_seed(seed, t * n_features + f));
      for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
      perm_rng.shuffle(positions);

      std::int64_t perm_correct = 0;
      for (std::size_t i = 0; i < oob.size(); ++i) {
        const auto row = d.row(oob[i]);
        probe.assign(row.begin(), row.end());
        probe[f] = d.at(oob[positions[i]], f);
        if (tree.predict(probe) == d.labels[oob[i]]) ++perm_correct;
      }
      const double perm_acc = static_cast<double>(perm_correct) / static_cast<double>(oob.size());
      scores.raw[f][t] = base_acc - perm_acc;
    }
  }

  scores.mean.resize(n_features);
  scores.z_score.resize(n_features);
  for (std::size_t f = 0; f < n_features; ++f) {
    double mean = 0.0;
    for (double v : scores.raw[f]) mean += v;
    mean /= static_cast<double>(n_trees);
    double ss = 0.0;
    for (double v : scores.raw[f]) ss += (v - mean) * (v - mean);
    const double stddev =
        n_trees > 1 ? std::sqrt(ss / static_cast<double>(n_trees - 1)) : 0.0;
    scores.mean[f] = mean;
    scores.z_score[f] =
        stddev > 0.0 ? mean / (stddev / std::sqrt(static_cast<double>(n_trees))) : 0.0;
  }
  return scores;
}

std::vector<ClassHistogram> oob_vote_histograms(const ForestModel& m, const LabeledDataset& d) {
  std::vector<ClassHistogram> votes(d.n_rows(), ClassHistogram{});
  for (std::size_t t = 0; t < m.n_trees(); ++t) {
    for (std::uint32_t r : m.oob_rows[t]) {
      ++votes[r][class_index(m.trees[t].predict(d.row(r)))];
    }
  }
  return votes;
}

double oob_accuracy(const ForestModel& m, const LabeledDataset& d) {
  const auto votes = oob_vote_histograms(m, d);
  std::int64_t correct = 0;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    std::int64_t total = 0;
    for (std::int64_t v : votes[r]) total += v;
    if (total > 0 && argmax_class(votes[r]) == d.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(d.n_rows());
}

}  // namespace turnover
