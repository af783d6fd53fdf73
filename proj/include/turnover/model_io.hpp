#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "turnover/baselines.hpp"
#include "turnover/forest.hpp"

namespace turnover {

using Model = std::variant<ForestModel, SingleTreeModel, LinearModel>;

// Shared by model documents and pipeline configs.
nlohmann::json tree_params_to_json(const TreeParams& p);
TreeParams tree_params_from_json(const nlohmann::json& j);

// Versioned JSON document (schema_version 1). Kinds: random_forest,
// decision_tree, linear_model. Keys are emitted sorted, doubles in
// shortest-round-trip form, so serialization is byte-deterministic and
// parse(serialize(m)) predicts identically to m. Out-of-bag bookkeeping is
// not part of the document.
std::string model_to_json(const Model& m);

// Throws UserInputError for malformed documents, unknown kinds or an
// unsupported schema_version.
Model model_from_json(const std::string& text);

void save_model(const std::string& path, const Model& m);
Model load_model(const std::string& path);

const std::vector<std::string>& model_feature_names(const Model& m);
TurnoverClass model_predict(const Model& m, std::span<const double> row);

}  // namespace turnover
