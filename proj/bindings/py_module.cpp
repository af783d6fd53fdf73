// Python surface of the toolkit: dataset construction, the synthetic
// generator, the shadow-feature selector, the five trainers and model JSON
// round-tripping. File-level pipeline stages stay in the CLI.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "turnover/baselines.hpp"
#include "turnover/boruta.hpp"
#include "turnover/data_model.hpp"
#include "turnover/evaluation.hpp"
#include "turnover/forest.hpp"
#include "turnover/ingestion.hpp"
#include "turnover/model_io.hpp"
#include "turnover/rng.hpp"

namespace py = pybind11;

namespace {

using namespace turnover;

std::string label_string(const std::vector<TurnoverClass>& labels) {
  std::string s;
  s.reserve(labels.size());
  for (TurnoverClass c : labels) s += class_to_char(c);
  return s;
}

TurnoverBins bins_from_pairs(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() != kNumClasses) {
    throw std::invalid_argument("bins must list five (lo, hi) pairs");
  }
  std::array<TurnoverBins::Interval, kNumClasses> intervals{};
  for (std::size_t k = 0; k < kNumClasses; ++k) intervals[k] = {pairs[k].first, pairs[k].second};
  return TurnoverBins(intervals);
}

std::vector<std::pair<double, double>> bins_to_pairs(const TurnoverBins& bins) {
  std::vector<std::pair<double, double>> out;
  for (const auto& i : bins.intervals()) out.emplace_back(i.lo, i.hi);
  return out;
}

LabeledDataset make_dataset(const std::vector<std::string>& feature_names,
                            const std::vector<std::vector<double>>& rows,
                            const std::string& labels) {
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("rows and labels must have the same length");
  }
  LabeledDataset d;
  d.feature_names = feature_names;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != feature_names.size()) {
      throw std::invalid_argument("row " + std::to_string(r) + " has the wrong width");
    }
    d.append_row(rows[r], class_from_char(labels[r]));
  }
  d.check_invariants();
  return d;
}

struct PyModel {
  Model model;

  std::string predict(const std::vector<double>& row) const {
    return std::string(1, class_to_char(model_predict(model, row)));
  }

  std::string predict_dataset(const LabeledDataset& d) const {
    std::string out;
    out.reserve(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      out += class_to_char(model_predict(model, d.row(r)));
    }
    return out;
  }

  double accuracy(const LabeledDataset& d) const {
    std::vector<TurnoverClass> predicted;
    predicted.reserve(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) predicted.push_back(model_predict(model, d.row(r)));
    return accuracy_percent(confusion_matrix(d.labels, predicted));
  }
};

TreeParams tree_params(std::size_t mtry, long long max_depth, std::size_t min_samples_split,
                       std::size_t min_samples_leaf) {
  TreeParams p;
  p.mtry = mtry;
  p.max_depth = static_cast<int>(max_depth);
  p.min_samples_split = min_samples_split;
  p.min_samples_leaf = min_samples_leaf;
  return p;
}

}  // namespace

PYBIND11_MODULE(_turnover, m) {
  m.doc() = "share turnover class prediction toolkit";

  py::class_<LabeledDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("feature_names"), py::arg("rows"), py::arg("labels"))
      .def_readonly("feature_names", &LabeledDataset::feature_names)
      .def_property_readonly("n_rows", &LabeledDataset::n_rows)
      .def_property_readonly("n_features", &LabeledDataset::n_features)
      .def_property_readonly("labels",
                             [](const LabeledDataset& d) { return label_string(d.labels); })
      .def("row",
           [](const LabeledDataset& d, std::size_t r) {
             if (r >= d.n_rows()) throw py::index_error();
             const auto row = d.row(r);
             return std::vector<double>(row.begin(), row.end());
           })
      .def("select_features", [](const LabeledDataset& d, const std::vector<std::size_t>& f) {
        return d.select_features(f);
      });

  py::class_<PyModel>(m, "Model")
      .def("predict", &PyModel::predict, py::arg("row"))
      .def("predict_dataset", &PyModel::predict_dataset, py::arg("dataset"))
      .def("accuracy", &PyModel::accuracy, py::arg("dataset"))
      .def_property_readonly(
          "feature_names", [](const PyModel& m_) { return model_feature_names(m_.model); })
      .def("to_json", [](const PyModel& m_) { return model_to_json(m_.model); })
      .def_static("from_json",
                  [](const std::string& text) { return PyModel{model_from_json(text)}; });

  m.def("default_bins", [] { return bins_to_pairs(TurnoverBins::default_bins()); });

  m.def(
      "discretize",
      [](double value, const std::vector<std::pair<double, double>>& bins) {
        const TurnoverBins b = bins.empty() ? TurnoverBins::default_bins() : bins_from_pairs(bins);
        return std::string(1, class_to_char(discretize_turnover(value, b)));
      },
      py::arg("value"), py::arg("bins") = std::vector<std::pair<double, double>>{});

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("stream"));

  m.def(
      "split",
      [](const LabeledDataset& d, double train_fraction, std::uint64_t seed,
         const std::string& strategy) {
        SplitConfig cfg;
        cfg.train_fraction = train_fraction;
        cfg.seed = seed;
        if (strategy == "stratified_random") {
          cfg.strategy = SplitStrategy::StratifiedRandom;
        } else if (strategy == "sequential") {
          cfg.strategy = SplitStrategy::Sequential;
        } else {
          throw std::invalid_argument("unknown split strategy \"" + strategy + "\"");
        }
        SplitResult r = split_train_validation(d, cfg);
        return py::make_tuple(std::move(r.train), std::move(r.valid));
      },
      py::arg("dataset"), py::arg("train_fraction") = 0.6, py::arg("seed") = 0,
      py::arg("strategy") = "stratified_random");

  m.def(
      "generate_synthetic",
      [](std::size_t n_rows, std::size_t n_informative, std::size_t n_noise, double noise_level,
         std::uint64_t seed) {
        SyntheticSpec spec;
        spec.n_rows = n_rows;
        spec.n_informative = n_informative;
        spec.n_noise = n_noise;
        spec.noise_level = noise_level;
        spec.seed = seed;
        return generate_synthetic(spec).dataset;
      },
      py::arg("n_rows") = 1000, py::arg("n_informative") = 10, py::arg("n_noise") = 10,
      py::arg("noise_level") = 0.1, py::arg("seed") = 0);

  m.def(
      "train_forest",
      [](const LabeledDataset& d, std::size_t n_trees, std::uint64_t seed, std::size_t mtry,
         long long max_depth, std::size_t min_samples_split, std::size_t min_samples_leaf,
         std::size_t workers) {
        ForestTrainOptions options;
        options.n_workers = workers;
        return PyModel{train_forest(
            d, n_trees, tree_params(mtry, max_depth, min_samples_split, min_samples_leaf), seed,
            options)};
      },
      py::arg("dataset"), py::arg("n_trees") = 500, py::arg("seed") = 0, py::arg("mtry") = 0,
      py::arg("max_depth") = -1, py::arg("min_samples_split") = 2,
      py::arg("min_samples_leaf") = 1, py::arg("workers") = 1);

  m.def(
      "train_tree",
      [](const LabeledDataset& d, const std::string& variant) {
        if (variant == "partylike") return PyModel{train_single_tree(d, TreeVariant::Partylike)};
        if (variant == "rpartlike") return PyModel{train_single_tree(d, TreeVariant::Rpartlike)};
        throw std::invalid_argument("unknown tree variant \"" + variant + "\"");
      },
      py::arg("dataset"), py::arg("variant") = "rpartlike");

  m.def(
      "train_logreg",
      [](const LabeledDataset& d, double learning_rate, std::size_t epochs, double l2,
         std::size_t batch, std::uint64_t seed) {
        GdConfig cfg{learning_rate, epochs, l2, batch, seed};
        return PyModel{train_multinomial_logreg(d, cfg)};
      },
      py::arg("dataset"), py::arg("learning_rate") = 0.1, py::arg("epochs") = 200,
      py::arg("l2") = 1e-4, py::arg("batch") = 0, py::arg("seed") = 0);

  m.def(
      "train_svm",
      [](const LabeledDataset& d, double learning_rate, std::size_t epochs, double l2,
         std::size_t batch, std::uint64_t seed) {
        GdConfig cfg{learning_rate, epochs, l2, batch, seed};
        return PyModel{train_svm_ovr(d, cfg)};
      },
      py::arg("dataset"), py::arg("learning_rate") = 0.1, py::arg("epochs") = 200,
      py::arg("l2") = 1e-4, py::arg("batch") = 0, py::arg("seed") = 0);

  m.def(
      "run_boruta",
      [](const LabeledDataset& d, std::size_t max_iterations, double alpha,
         const std::string& multiple_testing, std::size_t n_trees, std::uint64_t seed) {
        BorutaConfig cfg;
        cfg.max_iterations = max_iterations;
        cfg.alpha = alpha;
        if (multiple_testing == "bonferroni") {
          cfg.multiple_testing = MultipleTesting::Bonferroni;
        } else if (multiple_testing == "none") {
          cfg.multiple_testing = MultipleTesting::None;
        } else {
          throw std::invalid_argument("unknown multiple_testing mode \"" + multiple_testing +
                                      "\"");
        }
        cfg.n_trees_per_iteration = n_trees;
        cfg.seed = seed;
        const BorutaReport report = run_boruta(d, cfg);

        py::dict decisions;
        for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
          decisions[py::str(report.feature_names[f])] = to_string(report.decisions[f]);
        }
        std::vector<std::string> selected;
        for (std::size_t f : report.selected()) selected.push_back(report.feature_names[f]);
        py::dict out;
        out["decisions"] = decisions;
        out["selected"] = selected;
        out["iterations"] = report.iterations_run;
        return out;
      },
      py::arg("dataset"), py::arg("max_iterations") = 100, py::arg("alpha") = 0.05,
      py::arg("multiple_testing") = "bonferroni", py::arg("n_trees") = 200, py::arg("seed") = 0);

  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("path"), py::arg("dataset"));
  m.def("save_model", [](const std::string& path, const PyModel& m_) { save_model(path, m_.model); },
        py::arg("path"), py::arg("model"));
  m.def("load_model", [](const std::string& path) { return PyModel{load_model(path)}; },
        py::arg("path"));
}
