#include "turnover/model_io.hpp"

#include <json.hpp>

#include "turnover/errors.hpp"
#include "turnover/ingestion.hpp"

namespace turnover {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json tree_to_json(const DecisionTree& tree) {
  json t;
  auto& feature = t["feature"] = json::array();
  auto& threshold = t["threshold"] = json::array();
  auto& left = t["left"] = json::array();
  auto& right = t["right"] = json::array();
  auto& counts = t["counts"] = json::array();
  auto& predicted = t["predicted"] = json::array();
  for (const auto& node : tree.nodes) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    counts.push_back(node.counts);
    predicted.push_back(std::string(1, class_to_char(node.predicted)));
  }
  return t;
}

DecisionTree tree_from_json(const json& t) {
  DecisionTree tree;
  const auto& feature = t.at("feature");
  const auto& threshold = t.at("threshold");
  const auto& left = t.at("left");
  const auto& right = t.at("right");
  const auto& counts = t.at("counts");
  const auto& predicted = t.at("predicted");
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || counts.size() != n ||
      predicted.size() != n) {
    throw UserInputError("tree arrays disagree on node count");
  }
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node.feature = feature[i].get<std::int32_t>();
    node.threshold = threshold[i].get<double>();
    node.left = left[i].get<std::int32_t>();
    node.right = right[i].get<std::int32_t>();
    node.counts = counts[i].get<ClassHistogram>();
    const std::string letter = predicted[i].get<std::string>();
    if (letter.size() != 1) throw UserInputError("tree node prediction is not a class letter");
    node.predicted = class_from_char(letter[0]);
  }
  return tree;
}

json forest_to_json(const ForestModel& m) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "random_forest";
  doc["feature_names"] = m.feature_names;
  doc["params"] = tree_params_to_json(m.params);
  doc["n_trees"] = m.n_trees();
  doc["per_tree_seeds"] = m.per_tree_seeds;
  doc["n_training_rows"] = m.n_training_rows;
  auto& trees = doc["trees"] = json::array();
  for (const auto& tree : m.trees) trees.push_back(tree_to_json(tree));
  return doc;
}

ForestModel forest_from_json(const json& doc) {
  ForestModel m;
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  m.params = tree_params_from_json(doc.at("params"));
  m.per_tree_seeds = doc.at("per_tree_seeds").get<std::vector<std::uint64_t>>();
  m.n_training_rows = doc.at("n_training_rows").get<std::size_t>();
  for (const auto& t : doc.at("trees")) m.trees.push_back(tree_from_json(t));
  if (doc.at("n_trees").get<std::size_t>() != m.trees.size() ||
      m.per_tree_seeds.size() != m.trees.size()) {
    throw UserInputError("forest document tree count mismatch");
  }
  return m;
}

json single_tree_to_json(const SingleTreeModel& m) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "decision_tree";
  doc["variant"] = to_string(m.variant);
  doc["feature_names"] = m.feature_names;
  doc["tree"] = tree_to_json(m.tree);
  return doc;
}

SingleTreeModel single_tree_from_json(const json& doc) {
  SingleTreeModel m;
  const std::string variant = doc.at("variant").get<std::string>();
  if (variant == "partylike") {
    m.variant = TreeVariant::Partylike;
  } else if (variant == "rpartlike") {
    m.variant = TreeVariant::Rpartlike;
  } else {
    throw UserInputError("unknown tree variant \"" + variant + "\"");
  }
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  m.tree = tree_from_json(doc.at("tree"));
  return m;
}

json linear_to_json(const LinearModel& m) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "linear_model";
  doc["linear_kind"] = to_string(m.kind);
  doc["feature_names"] = m.feature_names;
  doc["weights"] = m.weights;
  doc["feature_means"] = m.feature_means;
  doc["feature_stddevs"] = m.feature_stddevs;
  doc["loss_history"] = m.loss_history;
  return doc;
}

LinearModel linear_from_json(const json& doc) {
  LinearModel m;
  const std::string kind = doc.at("linear_kind").get<std::string>();
  if (kind == "multinomial_logistic") {
    m.kind = LinearKind::MultinomialLogistic;
  } else if (kind == "svm_ovr") {
    m.kind = LinearKind::SvmOvr;
  } else {
    throw UserInputError("unknown linear kind \"" + kind + "\"");
  }
  m.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  m.weights = doc.at("weights").get<std::vector<double>>();
  m.feature_means = doc.at("feature_means").get<std::vector<double>>();
  m.feature_stddevs = doc.at("feature_stddevs").get<std::vector<double>>();
  m.loss_history = doc.at("loss_history").get<std::vector<double>>();
  const std::size_t expected = kNumClasses * (m.feature_names.size() + 1);
  if (m.weights.size() != expected || m.feature_means.size() != m.feature_names.size() ||
      m.feature_stddevs.size() != m.feature_names.size()) {
    throw UserInputError("linear model arrays disagree with the feature count");
  }
  return m;
}

}  // namespace

nlohmann::json tree_params_to_json(const TreeParams& p) {
  json j;
  j["max_depth"] = p.max_depth;
  j["min_samples_split"] = p.min_samples_split;
  j["min_samples_leaf"] = p.min_samples_leaf;
  j["mtry"] = p.mtry;
  j["significance_alpha"] = p.significance_alpha;
  return j;
}

TreeParams tree_params_from_json(const nlohmann::json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  p.mtry = j.at("mtry").get<std::size_t>();
  p.significance_alpha = j.at("significance_alpha").get<double>();
  return p;
}

std::string model_to_json(const Model& m) {
  const json doc = std::visit(
      [](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, ForestModel>) {
          return forest_to_json(model);
        } else if constexpr (std::is_same_v<T, SingleTreeModel>) {
          return single_tree_to_json(model);
        } else {
          return linear_to_json(model);
        }
      },
      m);
  return doc.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UserInputError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw UserInputError("unsupported model schema_version");
    }
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "random_forest") return forest_from_json(doc);
    if (kind == "decision_tree") return single_tree_from_json(doc);
    if (kind == "linear_model") return linear_from_json(doc);
    throw UserInputError("unknown model kind \"" + kind + "\"");
  } catch (const json::exception& e) {
    throw UserInputError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::string& path, const Model& m) {
  write_text_file(path, model_to_json(m));
}

Model load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

const std::vector<std::string>& model_feature_names(const Model& m) {
  return std::visit([](const auto& model) -> const std::vector<std::string>& {
    return model.feature_names;
  }, m);
}

TurnoverClass model_predict(const Model& m, std::span<const double> row) {
  return std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, ForestModel>) {
          return model.predict(row).predicted;
        } else if constexpr (std::is_same_v<T, SingleTreeModel>) {
          return model.predict(row);
        } else {
          return predict_linear(model, row);
        }
      },
      m);
}

}  // namespace turnover
