#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "turnover/baselines.hpp"
#include "turnover/boruta.hpp"
#include "turnover/evaluation.hpp"
#include "turnover/ingestion.hpp"

namespace turnover {

struct ForestConfig {
  TreeParams params;
  std::size_t n_trees = 500;
  std::size_t n_workers = 1;
  std::uint64_t seed = 0;
};

// Everything a full ingest -> features -> train -> evaluate run needs;
// serializable so a run is reproducible from its manifest alone.
struct PipelineConfig {
  std::string input_csv;
  std::string workdir = ".";
  SplitConfig split;
  TurnoverBins bins = TurnoverBins::default_bins();
  BorutaConfig boruta;
  ForestConfig forest;
  GdConfig gd;
  std::vector<std::string> feature_exclusions = {"total_turnover", "date"};
  bool use_boruta_selection = true;
};

std::string pipeline_config_json(const PipelineConfig& cfg);

// Accepts either a bare config document or a manifest (the config is then
// taken from its "config" member). Missing keys keep their defaults.
PipelineConfig pipeline_config_from_json(const std::string& text);

// One master seed drives every stage: split, boruta, forest and gradient
// descent get derive_seed(master, 1..4).
void apply_master_seed(PipelineConfig& cfg, std::uint64_t master);

// Ingest provenance written next to the split artifacts; enough to rerun
// the pipeline and to validate prediction-time companies.
struct WorkdirManifest {
  PipelineConfig config;
  std::vector<std::string> company_vocabulary;
  std::size_t rows_input = 0;
  std::size_t rows_clean = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_invalid = 0;
  ClassHistogram class_histogram{};
  ClassHistogram train_histogram{};
  ClassHistogram valid_histogram{};
  std::vector<std::string> encoded_feature_names;
  std::vector<std::string> warnings;
};

std::string manifest_json(const WorkdirManifest& m);
WorkdirManifest manifest_from_json(const std::string& text);

// Loads <workdir>/manifest.json; UserInputError with a "run ingest first"
// hint when it is missing.
WorkdirManifest load_manifest(const std::string& workdir);

// Names of the five trained models, in training order.
const std::vector<std::string>& model_registry();

// Reads cfg.input_csv, drops incomplete and inconsistent rows, encodes
// features and splits. Writes clean.csv, encoded.csv, train.csv, valid.csv
// and manifest.json into cfg.workdir.
void cmd_ingest(const PipelineConfig& cfg, std::ostream& out);

// Runs the shadow-feature selection on train.csv; writes boruta.csv and
// boruta_history.json.
void cmd_features(const PipelineConfig& cfg, std::ostream& out);

// Trains the five models on the (optionally selection-filtered) training
// features; writes model_<name>.json per success and timings.json.
// Throws TrainingError when no model could be trained.
void cmd_train(const PipelineConfig& cfg, std::ostream& out);

// Scores every trained model on valid.csv; writes report.csv, per-model
// confusion CSVs and the figure data (figure3/figure4 CSV + SVG).
void cmd_evaluate(const PipelineConfig& cfg, std::ostream& out);

// Applies one stored model to new rows. The rows file is either a raw
// record CSV (validated against the manifest's company vocabulary) or an
// already-encoded feature CSV. Writes <workdir>/predictions.csv with a
// prediction column plus per-class vote counts for forest models.
void cmd_predict(const PipelineConfig& cfg, const std::string& model_path,
                 const std::string& rows_csv, std::ostream& out);

struct SynthOptions {
  SyntheticSpec spec;
  std::string out_csv;
  std::string emit_workdir;  // empty: records CSV only
};

// Writes a synthetic raw-record CSV; with emit_workdir also materializes a
// ready-to-train workdir whose encoded features are the generator's
// informative/noise matrix (not the record encoding).
void cmd_synth(const PipelineConfig& cfg, const SynthOptions& options, std::ostream& out);

}  // namespace turnover
