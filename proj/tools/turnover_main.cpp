// Command line front end. Subcommands mirror the pipeline stages; every
// scalar in the config file has a dedicated override flag.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turnover/errors.hpp"
#include "turnover/pipeline.hpp"

namespace {

using turnover::PipelineConfig;

struct CommonFlags {
  std::string config_path;
  std::string workdir;
  std::string input;
  std::uint64_t master_seed = 0;

  double train_fraction = 0.6;
  std::uint64_t split_seed = 0;
  std::string split_strategy;

  double boruta_alpha = 0.05;
  std::size_t boruta_max_iterations = 100;
  std::size_t boruta_trees = 200;
  std::uint64_t boruta_seed = 0;
  std::string multiple_testing;
  std::size_t boruta_workers = 1;

  std::size_t n_trees = 500;
  std::uint64_t forest_seed = 0;
  std::size_t forest_workers = 1;

  long long mtry = 0;
  long long max_depth = -1;
  long long min_samples_split = 2;
  long long min_samples_leaf = 1;

  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::size_t batch = 0;
  std::uint64_t gd_seed = 0;

  bool no_boruta_selection = false;
  std::vector<std::string> exclude;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_workdir = nullptr;
  CLI::Option* o_input = nullptr;
  CLI::Option* o_master_seed = nullptr;
  CLI::Option* o_train_fraction = nullptr;
  CLI::Option* o_split_seed = nullptr;
  CLI::Option* o_split_strategy = nullptr;
  CLI::Option* o_boruta_alpha = nullptr;
  CLI::Option* o_boruta_max_iterations = nullptr;
  CLI::Option* o_boruta_trees = nullptr;
  CLI::Option* o_boruta_seed = nullptr;
  CLI::Option* o_multiple_testing = nullptr;
  CLI::Option* o_boruta_workers = nullptr;
  CLI::Option* o_n_trees = nullptr;
  CLI::Option* o_forest_seed = nullptr;
  CLI::Option* o_forest_workers = nullptr;
  CLI::Option* o_mtry = nullptr;
  CLI::Option* o_max_depth = nullptr;
  CLI::Option* o_min_samples_split = nullptr;
  CLI::Option* o_min_samples_leaf = nullptr;
  CLI::Option* o_learning_rate = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_l2 = nullptr;
  CLI::Option* o_batch = nullptr;
  CLI::Option* o_gd_seed = nullptr;
  CLI::Option* o_exclude = nullptr;
};

void add_common_flags(CLI::App* sub, CommonFlags& f, bool with_master_seed) {
  f.o_config = sub->add_option("--config", f.config_path,
                               "JSON config file (a manifest.json also works)");
  f.o_workdir = sub->add_option("--workdir", f.workdir, "artifact directory");
  f.o_input = sub->add_option("--input", f.input, "raw record CSV to ingest");
  if (with_master_seed) {
    f.o_master_seed = sub->add_option(
        "--seed", f.master_seed, "master seed; derives the split/boruta/forest/gd stream seeds");
  }
  f.o_train_fraction =
      sub->add_option("--train-fraction", f.train_fraction, "training share of the rows");
  f.o_split_seed = sub->add_option("--split-seed", f.split_seed, "train/validation shuffle seed");
  f.o_split_strategy = sub->add_option("--split-strategy", f.split_strategy,
                                       "stratified_random or sequential");
  f.o_boruta_alpha = sub->add_option("--boruta-alpha", f.boruta_alpha, "selection test level");
  f.o_boruta_max_iterations =
      sub->add_option("--boruta-max-iterations", f.boruta_max_iterations,
                      "selection iteration cap");
  f.o_boruta_trees = sub->add_option("--boruta-trees", f.boruta_trees,
                                     "trees per selection iteration");
  f.o_boruta_seed = sub->add_option("--boruta-seed", f.boruta_seed, "selection seed");
  f.o_multiple_testing = sub->add_option("--multiple-testing", f.multiple_testing,
                                         "bonferroni or none");
  f.o_boruta_workers =
      sub->add_option("--boruta-workers", f.boruta_workers, "selection forest worker threads");
  f.o_n_trees = sub->add_option("--n-trees", f.n_trees, "forest size");
  f.o_forest_seed = sub->add_option("--forest-seed", f.forest_seed, "forest training seed");
  f.o_forest_workers =
      sub->add_option("--forest-workers", f.forest_workers, "forest worker threads");
  f.o_mtry = sub->add_option(
      "--mtry", f.mtry, "features sampled per node, 0 for sqrt; model and selection forests");
  f.o_max_depth = sub->add_option("--max-depth", f.max_depth, "tree depth cap, -1 unlimited");
  f.o_min_samples_split =
      sub->add_option("--min-samples-split", f.min_samples_split, "minimum rows to split a node");
  f.o_min_samples_leaf =
      sub->add_option("--min-samples-leaf", f.min_samples_leaf, "minimum rows per leaf");
  f.o_learning_rate = sub->add_option("--learning-rate", f.learning_rate,
                                      "gradient descent step size");
  f.o_epochs = sub->add_option("--epochs", f.epochs, "gradient descent epochs");
  f.o_l2 = sub->add_option("--l2", f.l2, "L2 penalty strength");
  f.o_batch = sub->add_option("--batch", f.batch, "mini-batch size, 0 for full batch");
  f.o_gd_seed = sub->add_option("--gd-seed", f.gd_seed, "mini-batch shuffle seed");
  sub->add_flag("--no-boruta-selection", f.no_boruta_selection,
                "train on all features even when boruta.csv exists");
  f.o_exclude = sub->add_option("--exclude", f.exclude,
                                "extra encoded column to exclude (repeatable)");
}

PipelineConfig make_config(const CommonFlags& f) {
  PipelineConfig cfg;
  if (f.o_config->count() > 0) {
    cfg = turnover::pipeline_config_from_json(turnover::read_text_file(f.config_path));
  }
  if (f.o_master_seed != nullptr && f.o_master_seed->count() > 0) {
    turnover::apply_master_seed(cfg, f.master_seed);
  }
  if (f.o_workdir->count() > 0) cfg.workdir = f.workdir;
  if (f.o_input->count() > 0) cfg.input_csv = f.input;

  if (f.o_train_fraction->count() > 0) cfg.split.train_fraction = f.train_fraction;
  if (f.o_split_seed->count() > 0) cfg.split.seed = f.split_seed;
  if (f.o_split_strategy->count() > 0) {
    if (f.split_strategy == "stratified_random") {
      cfg.split.strategy = turnover::SplitStrategy::StratifiedRandom;
    } else if (f.split_strategy == "sequential") {
      cfg.split.strategy = turnover::SplitStrategy::Sequential;
    } else {
      throw turnover::UserInputError("unknown split strategy \"" + f.split_strategy + "\"");
    }
  }

  if (f.o_boruta_alpha->count() > 0) cfg.boruta.alpha = f.boruta_alpha;
  if (f.o_boruta_max_iterations->count() > 0) cfg.boruta.max_iterations = f.boruta_max_iterations;
  if (f.o_boruta_trees->count() > 0) cfg.boruta.n_trees_per_iteration = f.boruta_trees;
  if (f.o_boruta_seed->count() > 0) cfg.boruta.seed = f.boruta_seed;
  if (f.o_multiple_testing->count() > 0) {
    if (f.multiple_testing == "bonferroni") {
      cfg.boruta.multiple_testing = turnover::MultipleTesting::Bonferroni;
    } else if (f.multiple_testing == "none") {
      cfg.boruta.multiple_testing = turnover::MultipleTesting::None;
    } else {
      throw turnover::UserInputError("unknown multiple_testing mode \"" + f.multiple_testing +
                                     "\"");
    }
  }
  if (f.o_boruta_workers->count() > 0) cfg.boruta.n_workers = f.boruta_workers;

  if (f.o_n_trees->count() > 0) cfg.forest.n_trees = f.n_trees;
  if (f.o_forest_seed->count() > 0) cfg.forest.seed = f.forest_seed;
  if (f.o_forest_workers->count() > 0) cfg.forest.n_workers = f.forest_workers;

  if (f.o_mtry->count() > 0) {
    cfg.forest.params.mtry = static_cast<std::size_t>(f.mtry);
    cfg.boruta.forest_params.mtry = static_cast<std::size_t>(f.mtry);
  }
  if (f.o_max_depth->count() > 0) {
    cfg.forest.params.max_depth = static_cast<int>(f.max_depth);
    cfg.boruta.forest_params.max_depth = static_cast<int>(f.max_depth);
  }
  if (f.o_min_samples_split->count() > 0) {
    cfg.forest.params.min_samples_split = static_cast<std::size_t>(f.min_samples_split);
    cfg.boruta.forest_params.min_samples_split = static_cast<std::size_t>(f.min_samples_split);
  }
  if (f.o_min_samples_leaf->count() > 0) {
    cfg.forest.params.min_samples_leaf = static_cast<std::size_t>(f.min_samples_leaf);
    cfg.boruta.forest_params.min_samples_leaf = static_cast<std::size_t>(f.min_samples_leaf);
  }

  if (f.o_learning_rate->count() > 0) cfg.gd.learning_rate = f.learning_rate;
  if (f.o_epochs->count() > 0) cfg.gd.epochs = f.epochs;
  if (f.o_l2->count() > 0) cfg.gd.l2 = f.l2;
  if (f.o_batch->count() > 0) cfg.gd.batch = f.batch;
  if (f.o_gd_seed->count() > 0) cfg.gd.seed = f.gd_seed;

  if (f.no_boruta_selection) cfg.use_boruta_selection = false;
  for (const std::string& name : f.exclude) {
    if (std::find(cfg.feature_exclusions.begin(), cfg.feature_exclusions.end(), name) ==
        cfg.feature_exclusions.end()) {
      cfg.feature_exclusions.push_back(name);
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"share turnover class prediction toolkit"};
  app.require_subcommand(1);

  CommonFlags ingest_flags, features_flags, train_flags, evaluate_flags, predict_flags,
      synth_flags;

  CLI::App* ingest = app.add_subcommand("ingest", "clean, encode and split a raw record CSV");
  add_common_flags(ingest, ingest_flags, true);

  CLI::App* features = app.add_subcommand("features", "shadow-feature selection on train.csv");
  add_common_flags(features, features_flags, true);

  CLI::App* train = app.add_subcommand("train", "train the five models");
  add_common_flags(train, train_flags, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "score trained models on valid.csv");
  add_common_flags(evaluate, evaluate_flags, true);

  CLI::App* predict = app.add_subcommand("predict", "apply a stored model to new rows");
  add_common_flags(predict, predict_flags, true);
  std::string model_path, rows_csv;
  predict->add_option("--model", model_path, "model JSON file")->required();
  predict->add_option("--rows", rows_csv, "record CSV or encoded feature CSV")->required();

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic record CSV");
  add_common_flags(synth, synth_flags, false);
  turnover::SynthOptions synth_options;
  synth->add_option("--out", synth_options.out_csv, "output record CSV path")->required();
  synth->add_option("--rows", synth_options.spec.n_rows, "number of records");
  synth->add_option("--informative", synth_options.spec.n_informative,
                    "label-dependent feature count");
  synth->add_option("--noise", synth_options.spec.n_noise, "pure-noise feature count");
  synth->add_option("--noise-level", synth_options.spec.noise_level,
                    "noise scale on the informative features");
  synth->add_option("--seed", synth_options.spec.seed, "generator seed");
  synth->add_option("--emit-workdir", synth_options.emit_workdir,
                    "also materialize a ready-to-train workdir here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      turnover::cmd_ingest(make_config(ingest_flags), std::cout);
    } else if (features->parsed()) {
      turnover::cmd_features(make_config(features_flags), std::cout);
    } else if (train->parsed()) {
      turnover::cmd_train(make_config(train_flags), std::cout);
    } else if (evaluate->parsed()) {
      turnover::cmd_evaluate(make_config(evaluate_flags), std::cout);
    } else if (predict->parsed()) {
      turnover::cmd_predict(make_config(predict_flags), model_path, rows_csv, std::cout);
    } else if (synth->parsed()) {
      turnover::cmd_synth(make_config(synth_flags), synth_options, std::cout);
    }
  } catch (const turnover::UserInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
