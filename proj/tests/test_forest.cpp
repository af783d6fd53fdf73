#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "turnover/evaluation.hpp"
#include "turnover/forest.hpp"
#include "turnover/model_io.hpp"
#include "turnover/rng.hpp"

using namespace turnover;

namespace {

LabeledDataset two_column_dataset() {
  LabeledDataset d;
  d.feature_names = {"x", "y"};
  d.append_row(std::vector<double>{1.0, 5.0}, TurnoverClass::A);
  d.append_row(std::vector<double>{2.0, 5.0}, TurnoverClass::A);
  d.append_row(std::vector<double>{10.0, 5.0}, TurnoverClass::B);
  d.append_row(std::vector<double>{11.0, 5.0}, TurnoverClass::B);
  return d;
}

// Independent split search: every feature, every value boundary, histograms
// rebuilt from scratch. Uses the same decrease expression as the trainer so
// agreement is exact, and makes the tie-break explicit.
std::optional<SplitCandidate> brute_force_split(const LabeledDataset& d,
                                                const std::vector<std::size_t>& rows,
                                                std::vector<std::size_t> features,
                                                std::size_t min_leaf) {
  ClassHistogram parent{};
  for (std::size_t r : rows) ++parent[class_index(d.labels[r])];
  const double parent_gini = gini_impurity(parent);
  if (parent_gini == 0.0) return std::nullopt;

  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::optional<SplitCandidate> best;
  for (std::size_t f : features) {
    std::vector<std::pair<double, std::size_t>> column;
    for (std::size_t r : rows) column.emplace_back(d.at(r, f), class_index(d.labels[r]));
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      if (column[i].first == column[i + 1].first) continue;
      const std::int64_t n_left = static_cast<std::int64_t>(i + 1);
      const std::int64_t n_right = static_cast<std::int64_t>(column.size()) - n_left;
      if (static_cast<std::size_t>(n_left) < min_leaf ||
          static_cast<std::size_t>(n_right) < min_leaf) {
        continue;
      }
      ClassHistogram left{};
      for (std::size_t j = 0; j <= i; ++j) ++left[column[j].second];
      ClassHistogram right{};
      for (std::size_t k = 0; k < kNumClasses; ++k) right[k] = parent[k] - left[k];

      const double n = static_cast<double>(n_left + n_right);
      const double decrease = parent_gini -
                              (static_cast<double>(n_left) / n) * gini_impurity(left) -
                              (static_cast<double>(n_right) / n) * gini_impurity(right);
      if (decrease <= 0.0) continue;
      const double threshold = (column[i].first + column[i + 1].first) / 2.0;
      const bool better =
          !best || decrease > best->impurity_decrease ||
          (decrease == best->impurity_decrease &&
           (f < best->feature || (f == best->feature && threshold < best->threshold)));
      if (better) best = SplitCandidate{f, threshold, decrease};
    }
  }
  return best;
}

LabeledDataset random_dataset(Rng& rng, std::size_t n_rows, std::size_t n_features,
                              std::size_t n_distinct) {
  LabeledDataset d;
  for (std::size_t f = 0; f < n_features; ++f) d.feature_names.push_back("f" + std::to_string(f));
  std::vector<double> row(n_features);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t f = 0; f < n_features; ++f) {
      // few distinct values so ties and repeated boundaries actually occur
      row[f] = static_cast<double>(rng.uniform_index(n_distinct));
    }
    d.append_row(row, class_from_index(rng.uniform_index(3)));
  }
  return d;
}

std::vector<std::size_t> all_rows(const LabeledDataset& d) {
  std::vector<std::size_t> rows(d.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

}  // namespace

TEST_CASE("gini impurity on reference histograms") {
  CHECK(gini_impurity({10, 0, 0, 0, 0}) == 0.0);
  CHECK(gini_impurity({5, 5, 0, 0, 0}) == 0.5);
  CHECK(gini_impurity({2, 2, 2, 2, 2}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(gini_impurity({0, 0, 0, 0, 0}), std::domain_error);
  CHECK_THROWS_AS(gini_impurity({-1, 2, 0, 0, 0}), std::domain_error);
}

TEST_CASE("best_split reproduces the worked example") {
  const LabeledDataset d = two_column_dataset();
  const auto rows = all_rows(d);
  const std::vector<std::size_t> features = {0, 1};
  const auto split = best_split(d, rows, features);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == 6.0);
  CHECK(split->impurity_decrease == 0.5);

  // constant column alone gives no split
  const std::vector<std::size_t> constant = {1};
  CHECK(!best_split(d, rows, constant).has_value());
}

TEST_CASE("best_split agrees exactly with the brute-force oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_rows = 2 + rng.uniform_index(49);
    const std::size_t n_features = 1 + rng.uniform_index(4);
    const std::size_t n_distinct = 1 + rng.uniform_index(8);
    const std::size_t min_leaf = 1 + rng.uniform_index(3);
    const LabeledDataset d = random_dataset(rng, n_rows, n_features, n_distinct);
    const auto rows = all_rows(d);
    std::vector<std::size_t> features(n_features);
    for (std::size_t f = 0; f < n_features; ++f) features[f] = f;

    const auto got = best_split(d, rows, features, min_leaf);
    const auto want = brute_force_split(d, rows, features, min_leaf);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->feature == want->feature);
      CHECK(got->threshold == want->threshold);
      CHECK(got->impurity_decrease == want->impurity_decrease);
    }
  }
}

TEST_CASE("train_tree honours stopping controls") {
  const LabeledDataset d = two_column_dataset();
  TreeParams params;
  params.mtry = 2;

  SUBCASE("depth zero forces a leaf") {
    params.max_depth = 0;
    const DecisionTree t = train_tree(d, all_rows(d), params, 1);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].is_leaf());
    CHECK(t.nodes[0].predicted == TurnoverClass::A);  // 2-2 tie goes down
  }

  SUBCASE("full depth memorizes the toy data") {
    const DecisionTree t = train_tree(d, all_rows(d), params, 1);
    for (std::size_t r = 0; r < d.n_rows(); ++r) CHECK(t.predict(d.row(r)) == d.labels[r]);
    CHECK(t.depth() == 1);
    CHECK(t.leaf_count() == 2);
    const auto used = t.used_features(2);
    CHECK(used[0]);
    CHECK(!used[1]);
  }

  SUBCASE("min_samples_split larger than the node keeps it a leaf") {
    params.min_samples_split = 5;
    const DecisionTree t = train_tree(d, all_rows(d), params, 1);
    CHECK(t.nodes.size() == 1);
  }

  SUBCASE("min_samples_leaf can forbid the only useful split") {
    params.min_samples_leaf = 3;
    const DecisionTree t = train_tree(d, all_rows(d), params, 1);
    CHECK(t.nodes.size() == 1);
  }
}

TEST_CASE("pure nodes stop immediately") {
  LabeledDataset d;
  d.feature_names = {"x"};
  for (int i = 0; i < 6; ++i) {
    d.append_row(std::vector<double>{static_cast<double>(i)}, TurnoverClass::C);
  }
  TreeParams params;
  params.mtry = 1;
  const DecisionTree t = train_tree(d, all_rows(d), params, 9);
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].predicted == TurnoverClass::C);
  CHECK(t.nodes[0].counts[2] == 6);
}

TEST_CASE("forest determinism and worker invariance") {
  Rng rng(23);
  const LabeledDataset d = random_dataset(rng, 80, 5, 16);
  TreeParams params;

  ForestTrainOptions one;
  one.n_workers = 1;
  ForestTrainOptions four;
  four.n_workers = 4;

  const ForestModel a = train_forest(d, 25, params, 99, one);
  const ForestModel b = train_forest(d, 25, params, 99, four);
  const ForestModel c = train_forest(d, 25, params, 100, one);

  CHECK(model_to_json(Model(a)) == model_to_json(Model(b)));
  CHECK(model_to_json(Model(a)) != model_to_json(Model(c)));
  CHECK(a.oob_rows == b.oob_rows);

  // every OOB list is ascending and disjoint from the bag by construction
  for (const auto& oob : a.oob_rows) {
    CHECK(std::is_sorted(oob.begin(), oob.end()));
  }
  CHECK(a.n_training_rows == d.n_rows());
  CHECK(a.n_trees() == 25);
}

TEST_CASE("single-tree forest without bootstrap equals train_tree") {
  Rng rng(31);
  const LabeledDataset d = random_dataset(rng, 40, 3, 10);
  TreeParams params;
  params.mtry = 3;

  ForestTrainOptions options;
  options.bootstrap = false;
  const ForestModel f = train_forest(d, 1, params, 7, options);
  REQUIRE(f.n_trees() == 1);
  CHECK(f.oob_rows[0].empty());

  const std::uint64_t tree_seed = derive_seed(7, 0);
  const DecisionTree reference = train_tree(d, all_rows(d), params, derive_seed(tree_seed, 1));
  CHECK(f.trees[0] == reference);
}

TEST_CASE("forest prediction is the vote argmax") {
  Rng rng(37);
  const LabeledDataset d = random_dataset(rng, 60, 4, 6);
  const ForestModel f = train_forest(d, 15, TreeParams{}, 3);
  for (std::size_t r = 0; r < 10; ++r) {
    const ForestPrediction p = f.predict(d.row(r));
    std::int64_t total = 0;
    for (std::int64_t v : p.votes) total += v;
    CHECK(total == 15);
    CHECK(p.predicted == argmax_class(p.votes));
  }
  CHECK_THROWS_AS(f.predict(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("permutation importance separates signal from noise") {
  // label is a pure function of feature 0; feature 1 is noise
  LabeledDataset d;
  d.feature_names = {"signal", "noise"};
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform_real();
    d.append_row(std::vector<double>{x, rng.normal()},
                 x < 0.5 ? TurnoverClass::A : TurnoverClass::D);
  }
  const ForestModel f = train_forest(d, 40, TreeParams{}, 11);
  const ImportanceScores scores = permutation_importance(f, d, 13);

  REQUIRE(scores.mean.size() == 2);
  CHECK(scores.mean[0] > 0.2);
  CHECK(scores.z_score[0] > 3.0);
  CHECK(std::fabs(scores.mean[1]) < 0.05);
  CHECK(scores.z_score[0] > scores.z_score[1]);

  // deterministic in the seed
  const ImportanceScores again = permutation_importance(f, d, 13);
  CHECK(scores.raw == again.raw);
  CHECK(scores.z_score == again.z_score);
}

TEST_CASE("a feature no tree uses scores exactly zero") {
  LabeledDataset d;
  d.feature_names = {"x", "constant"};
  Rng rng(43);
  for (int i = 0; i < 60; ++i) {
    const double x = rng.uniform_real();
    d.append_row(std::vector<double>{x, 7.0}, x < 0.5 ? TurnoverClass::A : TurnoverClass::B);
  }
  const ForestModel f = train_forest(d, 10, TreeParams{}, 5);
  for (const DecisionTree& t : f.trees) CHECK(!t.used_features(2)[1]);
  const ImportanceScores scores = permutation_importance(f, d, 5);
  CHECK(scores.mean[1] == 0.0);
  CHECK(scores.z_score[1] == 0.0);
  for (double r : scores.raw[1]) CHECK(r == 0.0);
}

TEST_CASE("oob accuracy sits in range and matches the vote histograms") {
  Rng rng(47);
  const LabeledDataset d = random_dataset(rng, 100, 4, 8);
  const ForestModel f = train_forest(d, 30, TreeParams{}, 21);
  const auto votes = oob_vote_histograms(f, d);
  REQUIRE(votes.size() == d.n_rows());

  std::int64_t correct = 0;
  std::int64_t counted = 0;
  for (std::size_t r = 0; r < votes.size(); ++r) {
    std::int64_t total = 0;
    for (std::int64_t v : votes[r]) total += v;
    ++counted;
    if (total > 0 && argmax_class(votes[r]) == d.labels[r]) ++correct;
  }
  const double expected = static_cast<double>(correct) / static_cast<double>(counted);
  CHECK(oob_accuracy(f, d) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(oob_accuracy(f, d) >= 0.0);
  CHECK(oob_accuracy(f, d) <= 1.0);
}
