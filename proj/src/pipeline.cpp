#include "turnover/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <json.hpp>

#include "turnover/csv.hpp"
#include "turnover/errors.hpp"
#include "turnover/model_io.hpp"
#include "turnover/rng.hpp"

namespace turnover {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kManifestVersion = 1;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return fs::exists(fs::path(path), ec);
}

std::int64_t histogram_total(const ClassHistogram& h) {
  std::int64_t total = 0;
  for (std::int64_t c : h) total += c;
  return total;
}

std::string histogram_line(const ClassHistogram& h) {
  std::string out;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (!out.empty()) out += ' ';
    out += class_to_char(class_from_index(k));
    out += '=';
    out += std::to_string(h[k]);
  }
  return out;
}

json histogram_to_json(const ClassHistogram& h) {
  json j;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    j[std::string(1, class_to_char(class_from_index(k)))] = h[k];
  }
  return j;
}

ClassHistogram histogram_from_json(const json& j) {
  ClassHistogram h{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    h[k] = j.value(std::string(1, class_to_char(class_from_index(k))), std::int64_t{0});
  }
  return h;
}

json split_to_json(const SplitConfig& s) {
  json j;
  j["train_fraction"] = s.train_fraction;
  j["seed"] = s.seed;
  j["strategy"] =
      s.strategy == SplitStrategy::StratifiedRandom ? "stratified_random" : "sequential";
  return j;
}

SplitConfig split_from_json(const json& j) {
  SplitConfig s;
  s.train_fraction = j.value("train_fraction", s.train_fraction);
  s.seed = j.value("seed", s.seed);
  const std::string strategy =
      j.value("strategy", std::string("stratified_random"));
  if (strategy == "stratified_random") {
    s.strategy = SplitStrategy::StratifiedRandom;
  } else if (strategy == "sequential") {
    s.strategy = SplitStrategy::Sequential;
  } else {
    throw UserInputError("unknown split strategy \"" + strategy + "\"");
  }
  return s;
}

json bins_to_json(const TurnoverBins& bins) {
  json j = json::array();
  for (const auto& interval : bins.intervals()) j.push_back({interval.lo, interval.hi});
  return j;
}

TurnoverBins bins_from_json(const json& j) {
  if (j.size() != kNumClasses) throw UserInputError("bins must list five intervals");
  std::array<TurnoverBins::Interval, kNumClasses> intervals{};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    if (j[k].size() != 2) throw UserInputError("each bin is a [lo, hi] pair");
    intervals[k] = {j[k][0].get<double>(), j[k][1].get<double>()};
  }
  return TurnoverBins(intervals);
}

json boruta_to_json(const BorutaConfig& b) {
  json j;
  j["max_iterations"] = b.max_iterations;
  j["alpha"] = b.alpha;
  j["multiple_testing"] = b.multiple_testing == MultipleTesting::Bonferroni ? "bonferroni" : "none";
  j["forest_params"] = tree_params_to_json(b.forest_params);
  j["n_trees_per_iteration"] = b.n_trees_per_iteration;
  j["seed"] = b.seed;
  j["n_workers"] = b.n_workers;
  return j;
}

BorutaConfig boruta_from_json(const json& j) {
  BorutaConfig b;
  b.max_iterations = j.value("max_iterations", b.max_iterations);
  b.alpha = j.value("alpha", b.alpha);
  const std::string testing = j.value("multiple_testing", std::string("bonferroni"));
  if (testing == "bonferroni") {
    b.multiple_testing = MultipleTesting::Bonferroni;
  } else if (testing == "none") {
    b.multiple_testing = MultipleTesting::None;
  } else {
    throw UserInputError("unknown multiple_testing mode \"" + testing + "\"");
  }
  if (j.contains("forest_params")) b.forest_params = tree_params_from_json(j.at("forest_params"));
  b.n_trees_per_iteration = j.value("n_trees_per_iteration", b.n_trees_per_iteration);
  b.seed = j.value("seed", b.seed);
  b.n_workers = j.value("n_workers", b.n_workers);
  return b;
}

json forest_to_json(const ForestConfig& f) {
  json j;
  j["params"] = tree_params_to_json(f.params);
  j["n_trees"] = f.n_trees;
  j["n_workers"] = f.n_workers;
  j["seed"] = f.seed;
  return j;
}

ForestConfig forest_from_json(const json& j) {
  ForestConfig f;
  if (j.contains("params")) f.params = tree_params_from_json(j.at("params"));
  f.n_trees = j.value("n_trees", f.n_trees);
  f.n_workers = j.value("n_workers", f.n_workers);
  f.seed = j.value("seed", f.seed);
  return f;
}

json gd_to_json(const GdConfig& g) {
  json j;
  j["learning_rate"] = g.learning_rate;
  j["epochs"] = g.epochs;
  j["l2"] = g.l2;
  j["batch"] = g.batch;
  j["seed"] = g.seed;
  return j;
}

GdConfig gd_from_json(const json& j) {
  GdConfig g;
  g.learning_rate = j.value("learning_rate", g.learning_rate);
  g.epochs = j.value("epochs", g.epochs);
  g.l2 = j.value("l2", g.l2);
  g.batch = j.value("batch", g.batch);
  g.seed = j.value("seed", g.seed);
  return g;
}

json config_to_json_obj(const PipelineConfig& c) {
  // The workdir itself is deliberately not recorded; a workdir stays
  // byte-identical when rerun under another path.
  json j;
  j["input_csv"] = c.input_csv;
  j["split"] = split_to_json(c.split);
  j["bins"] = bins_to_json(c.bins);
  j["boruta"] = boruta_to_json(c.boruta);
  j["forest"] = forest_to_json(c.forest);
  j["gd"] = gd_to_json(c.gd);
  j["feature_exclusions"] = c.feature_exclusions;
  j["use_boruta_selection"] = c.use_boruta_selection;
  return j;
}

PipelineConfig config_from_json_obj(const json& j) {
  PipelineConfig c;
  c.input_csv = j.value("input_csv", c.input_csv);
  if (j.contains("split")) c.split = split_from_json(j.at("split"));
  if (j.contains("bins")) c.bins = bins_from_json(j.at("bins"));
  if (j.contains("boruta")) c.boruta = boruta_from_json(j.at("boruta"));
  if (j.contains("forest")) c.forest = forest_from_json(j.at("forest"));
  if (j.contains("gd")) c.gd = gd_from_json(j.at("gd"));
  if (j.contains("feature_exclusions")) {
    c.feature_exclusions = j.at("feature_exclusions").get<std::vector<std::string>>();
  }
  c.use_boruta_selection = j.value("use_boruta_selection", c.use_boruta_selection);
  return c;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UserInputError(what + " is not valid JSON: " + e.what());
  }
}

bool is_excluded(const PipelineConfig& cfg, const std::string& name) {
  return std::find(cfg.feature_exclusions.begin(), cfg.feature_exclusions.end(), name) !=
         cfg.feature_exclusions.end();
}

// Raw-record table in canonical column order; the inverse of
// records_from_table for freshly generated data.
RawTable records_to_table(const std::vector<StockRecord>& records) {
  RawTable t;
  t.header = {"date",
              "company",
              "open_price",
              "high_price",
              "low_price",
              "close_price",
              "wap",
              "no_of_shares",
              "no_of_trades",
              "deliverable_quantity",
              "spread_high_low",
              "spread_close_open",
              "total_turnover"};
  for (const StockRecord& r : records) {
    t.rows.push_back({r.date.iso(), r.company, csv::format_double(r.open_price),
                      csv::format_double(r.high_price), csv::format_double(r.low_price),
                      csv::format_double(r.close_price), csv::format_double(r.wap),
                      std::to_string(r.no_of_shares), std::to_string(r.no_of_trades),
                      std::to_string(r.deliverable_quantity),
                      csv::format_double(r.spread_high_low),
                      csv::format_double(r.spread_close_open),
                      csv::format_double(r.total_turnover)});
  }
  return t;
}

LabeledDataset read_required_dataset(const std::string& workdir, const std::string& name) {
  const std::string path = join_path(workdir, name);
  if (!file_exists(path)) {
    throw UserInputError(path + " is missing; run ingest first");
  }
  return read_dataset_csv(path);
}

// decision per feature name out of boruta.csv; empty when the file is absent.
std::map<std::string, std::string> read_boruta_decisions(const std::string& workdir) {
  std::map<std::string, std::string> decisions;
  const std::string path = join_path(workdir, "boruta.csv");
  if (!file_exists(path)) return decisions;
  const auto grid = csv::parse_text(read_text_file(path));
  if (grid.empty()) throw UserInputError(path + " is empty");
  const auto& header = grid[0];
  std::size_t feature_col = header.size(), decision_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "feature") feature_col = i;
    if (header[i] == "decision") decision_col = i;
  }
  if (feature_col == header.size() || decision_col == header.size()) {
    throw UserInputError(path + " lacks feature/decision columns");
  }
  for (std::size_t r = 1; r < grid.size(); ++r) {
    decisions[grid[r][feature_col]] = grid[r][decision_col];
  }
  return decisions;
}

std::map<std::string, double> read_timings(const std::string& workdir) {
  std::map<std::string, double> seconds;
  const std::string path = join_path(workdir, "timings.json");
  if (!file_exists(path)) return seconds;
  const json doc = parse_json_text(read_text_file(path), path);
  if (doc.contains("models")) {
    for (const auto& [name, value] : doc.at("models").items()) {
      seconds[name] = value.get<double>();
    }
  }
  return seconds;
}

std::vector<StockRecord> read_clean_records(const std::string& workdir) {
  const std::string path = join_path(workdir, "clean.csv");
  if (!file_exists(path)) {
    throw UserInputError(path + " is missing; run ingest first");
  }
  return records_from_table(parse_csv_file(path));
}

}  // namespace

std::string pipeline_config_json(const PipelineConfig& cfg) {
  return config_to_json_obj(cfg).dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  const json doc = parse_json_text(text, "config");
  try {
    if (doc.contains("config")) return config_from_json_obj(doc.at("config"));
    return config_from_json_obj(doc);
  } catch (const json::exception& e) {
    throw UserInputError(std::string("malformed config: ") + e.what());
  }
}

void apply_master_seed(PipelineConfig& cfg, std::uint64_t master) {
  cfg.split.seed = derive_seed(master, 1);
  cfg.boruta.seed = derive_seed(master, 2);
  cfg.forest.seed = derive_seed(master, 3);
  cfg.gd.seed = derive_seed(master, 4);
}

std::string manifest_json(const WorkdirManifest& m) {
  json doc;
  doc["schema_version"] = kManifestVersion;
  doc["config"] = config_to_json_obj(m.config);
  doc["company_vocabulary"] = m.company_vocabulary;
  doc["rows_input"] = m.rows_input;
  doc["rows_clean"] = m.rows_clean;
  doc["dropped_missing"] = m.dropped_missing;
  doc["dropped_invalid"] = m.dropped_invalid;
  doc["class_histogram"] = histogram_to_json(m.class_histogram);
  doc["train_class_histogram"] = histogram_to_json(m.train_histogram);
  doc["valid_class_histogram"] = histogram_to_json(m.valid_histogram);
  doc["encoded_feature_names"] = m.encoded_feature_names;
  doc["warnings"] = m.warnings;
  return doc.dump(2) + "\n";
}

WorkdirManifest manifest_from_json(const std::string& text) {
  const json doc = parse_json_text(text, "manifest");
  WorkdirManifest m;
  try {
    m.config = config_from_json_obj(doc.at("config"));
    m.company_vocabulary = doc.value("company_vocabulary", m.company_vocabulary);
    m.rows_input = doc.value("rows_input", m.rows_input);
    m.rows_clean = doc.value("rows_clean", m.rows_clean);
    m.dropped_missing = doc.value("dropped_missing", m.dropped_missing);
    m.dropped_invalid = doc.value("dropped_invalid", m.dropped_invalid);
    if (doc.contains("class_histogram")) {
      m.class_histogram = histogram_from_json(doc.at("class_histogram"));
    }
    if (doc.contains("train_class_histogram")) {
      m.train_histogram = histogram_from_json(doc.at("train_class_histogram"));
    }
    if (doc.contains("valid_class_histogram")) {
      m.valid_histogram = histogram_from_json(doc.at("valid_class_histogram"));
    }
    m.encoded_feature_names = doc.value("encoded_feature_names", m.encoded_feature_names);
    m.warnings = doc.value("warnings", m.warnings);
  } catch (const json::exception& e) {
    throw UserInputError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

WorkdirManifest load_manifest(const std::string& workdir) {
  const std::string path = join_path(workdir, "manifest.json");
  if (!file_exists(path)) {
    throw UserInputError("no manifest.json in " + workdir + "; run ingest first");
  }
  return manifest_from_json(read_text_file(path));
}

const std::vector<std::string>& model_registry() {
  static const std::vector<std::string> names = {"randforest", "tree_party", "tree_rpart", "svm",
                                                 "mlr"};
  return names;
}

void cmd_ingest(const PipelineConfig& cfg, std::ostream& out) {
  if (cfg.input_csv.empty()) throw UserInputError("no input CSV configured");
  if (!file_exists(cfg.input_csv)) {
    throw UserInputError("input file " + cfg.input_csv + " does not exist");
  }

  RawTable raw = parse_csv_file(cfg.input_csv);
  const std::size_t rows_input = raw.rows.size();
  DropResult complete = drop_missing(raw);
  std::vector<StockRecord> parsed = records_from_table(complete.table);

  WorkdirManifest manifest;
  manifest.config = cfg;
  manifest.warnings = raw.warnings;
  manifest.rows_input = rows_input;
  manifest.dropped_missing = complete.dropped;

  RawTable clean;
  clean.header = complete.table.header;
  std::vector<StockRecord> records;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto violations = validate_record(parsed[i]);
    if (violations.empty()) {
      records.push_back(std::move(parsed[i]));
      clean.rows.push_back(complete.table.rows[i]);
    } else {
      ++manifest.dropped_invalid;
      manifest.warnings.push_back("dropped inconsistent row " + std::to_string(i + 1) + ": " +
                                  violations.front());
    }
  }
  if (records.empty()) throw UserInputError("no usable rows after cleaning " + cfg.input_csv);
  manifest.rows_clean = records.size();
  manifest.company_vocabulary = company_vocabulary(records);

  EncodeOptions enc;
  enc.include_total_turnover = !is_excluded(cfg, "total_turnover");
  enc.include_date = !is_excluded(cfg, "date");
  LabeledDataset encoded = encode_features(records, cfg.bins, enc);
  std::vector<std::size_t> keep;
  for (std::size_t f = 0; f < encoded.n_features(); ++f) {
    if (!is_excluded(cfg, encoded.feature_names[f])) keep.push_back(f);
  }
  if (keep.empty()) throw UserInputError("feature exclusions remove every encoded column");
  if (keep.size() < encoded.n_features()) encoded = encoded.select_features(keep);
  manifest.encoded_feature_names = encoded.feature_names;
  manifest.class_histogram = encoded.label_histogram();

  SplitResult split = split_train_validation(encoded, cfg.split);
  manifest.train_histogram = split.train.label_histogram();
  manifest.valid_histogram = split.valid.label_histogram();
  for (const auto& w : split.warnings) manifest.warnings.push_back(w);

  fs::create_directories(cfg.workdir);
  write_raw_table_csv(join_path(cfg.workdir, "clean.csv"), clean);
  write_dataset_csv(join_path(cfg.workdir, "encoded.csv"), encoded);
  write_dataset_csv(join_path(cfg.workdir, "train.csv"), split.train);
  write_dataset_csv(join_path(cfg.workdir, "valid.csv"), split.valid);
  write_text_file(join_path(cfg.workdir, "manifest.json"), manifest_json(manifest));

  out << "rows: " << rows_input << " read, " << manifest.dropped_missing
      << " dropped incomplete, " << manifest.dropped_invalid << " dropped inconsistent, "
      << records.size() << " kept\n";
  out << "classes: " << histogram_line(manifest.class_histogram) << "\n";
  out << "split: " << split.train.n_rows() << " train / " << split.valid.n_rows() << " valid\n";
  for (const auto& w : manifest.warnings) out << "warning: " << w << "\n";
  out << "wrote clean.csv, encoded.csv, train.csv, valid.csv, manifest.json to " << cfg.workdir
      << "\n";
}

void cmd_features(const PipelineConfig& cfg, std::ostream& out) {
  load_manifest(cfg.workdir);
  const LabeledDataset train = read_required_dataset(cfg.workdir, "train.csv");
  const BorutaReport report = run_boruta(train, cfg.boruta);

  write_text_file(join_path(cfg.workdir, "boruta.csv"), boruta_report_csv(report));
  write_text_file(join_path(cfg.workdir, "boruta_history.json"), boruta_history_json(report));

  const char* const section_names[] = {"Confirmed", "Tentative", "Rejected"};
  const FeatureDecision sections[] = {FeatureDecision::Confirmed, FeatureDecision::Tentative,
                                      FeatureDecision::Rejected};
  for (int s = 0; s < 3; ++s) {
    std::vector<std::string> names;
    for (std::size_t f = 0; f < report.feature_names.size(); ++f) {
      if (report.decisions[f] == sections[s]) names.push_back(report.feature_names[f]);
    }
    out << section_names[s] << " (" << names.size() << ")";
    for (std::size_t i = 0; i < names.size(); ++i) out << (i == 0 ? ": " : ", ") << names[i];
    out << "\n";
  }
  out << "iterations: " << report.iterations_run << "\n";
  out << "wrote boruta.csv, boruta_history.json to " << cfg.workdir << "\n";
}

void cmd_train(const PipelineConfig& cfg, std::ostream& out) {
  load_manifest(cfg.workdir);
  const LabeledDataset train = read_required_dataset(cfg.workdir, "train.csv");

  LabeledDataset used = train;
  if (cfg.use_boruta_selection) {
    const auto decisions = read_boruta_decisions(cfg.workdir);
    if (!decisions.empty()) {
      std::vector<std::size_t> keep;
      for (std::size_t f = 0; f < train.n_features(); ++f) {
        const auto it = decisions.find(train.feature_names[f]);
        if (it == decisions.end() || it->second != "Rejected") keep.push_back(f);
      }
      if (keep.empty()) throw TrainingError("no features remain after feature selection");
      if (keep.size() < train.n_features()) used = train.select_features(keep);
      out << "feature selection: " << keep.size() << " of " << train.n_features()
          << " columns kept\n";
    }
  }

  struct Job {
    std::string name;
    std::function<Model()> train;
  };
  ForestTrainOptions forest_options;
  forest_options.n_workers = cfg.forest.n_workers;
  const std::vector<Job> jobs = {
      {"randforest",
       [&] {
         return Model(train_forest(used, cfg.forest.n_trees, cfg.forest.params, cfg.forest.seed,
                                   forest_options));
       }},
      {"tree_party", [&] { return Model(train_single_tree(used, TreeVariant::Partylike)); }},
      {"tree_rpart", [&] { return Model(train_single_tree(used, TreeVariant::Rpartlike)); }},
      {"svm", [&] { return Model(train_svm_ovr(used, cfg.gd)); }},
      {"mlr", [&] { return Model(train_multinomial_logreg(used, cfg.gd)); }},
  };

  json timing_doc;
  auto& timing_models = timing_doc["models"] = json::object();
  std::size_t trained = 0;
  for (const Job& job : jobs) {
    const auto started = std::chrono::steady_clock::now();
    try {
      const Model model = job.train();
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      save_model(join_path(cfg.workdir, "model_" + job.name + ".json"), model);
      timing_models[job.name] = seconds;
      ++trained;
      out << job.name << ": trained in " << csv::format_fixed(seconds, 3) << " s\n";
    } catch (const std::exception& e) {
      out << job.name << ": FAILED (" << e.what() << ")\n";
    }
  }
  if (trained == 0) throw TrainingError("no model trained");
  write_text_file(join_path(cfg.workdir, "timings.json"), timing_doc.dump(2) + "\n");
  out << trained << " of " << jobs.size() << " models written to " << cfg.workdir << "\n";
}

void cmd_evaluate(const PipelineConfig& cfg, std::ostream& out) {
  const WorkdirManifest manifest = load_manifest(cfg.workdir);
  const LabeledDataset valid = read_required_dataset(cfg.workdir, "valid.csv");
  const auto timings = read_timings(cfg.workdir);

  std::vector<NamedPredictor> predictors;
  for (const std::string& name : model_registry()) {
    const std::string path = join_path(cfg.workdir, "model_" + name + ".json");
    if (!file_exists(path)) continue;
    auto model = std::make_shared<const Model>(load_model(path));

    std::vector<std::size_t> indices;
    for (const std::string& feature : model_feature_names(*model)) {
      const auto it =
          std::find(valid.feature_names.begin(), valid.feature_names.end(), feature);
      if (it == valid.feature_names.end()) {
        throw std::domain_error("model " + name + " uses feature \"" + feature +
                                "\" absent from the validation data");
      }
      indices.push_back(static_cast<std::size_t>(it - valid.feature_names.begin()));
    }

    NamedPredictor p;
    p.name = name;
    p.n_features = valid.n_features();
    const auto timing = timings.find(name);
    p.train_seconds = timing == timings.end() ? 0.0 : timing->second;
    p.predict = [model, indices](std::span<const double> row) {
      std::vector<double> projected(indices.size());
      for (std::size_t i = 0; i < indices.size(); ++i) projected[i] = row[indices[i]];
      return model_predict(*model, projected);
    };
    predictors.push_back(std::move(p));
  }
  if (predictors.empty()) {
    throw UserInputError("no trained models in " + cfg.workdir + "; run train first");
  }

  DatasetFingerprint fingerprint;
  fingerprint.train_rows = static_cast<std::size_t>(histogram_total(manifest.train_histogram));
  fingerprint.valid_rows = valid.n_rows();
  fingerprint.train_histogram = manifest.train_histogram;
  fingerprint.valid_histogram = manifest.valid_histogram;
  fingerprint.split_seed = manifest.config.split.seed;

  const ComparativeReport report = comparative_report(predictors, valid, fingerprint);
  write_text_file(join_path(cfg.workdir, "report.csv"), report_csv(report));
  for (const ModelEvaluation& row : report.rows) {
    write_text_file(join_path(cfg.workdir, "confusion_" + row.name + ".csv"),
                    confusion_csv(row.confusion));
  }

  const std::vector<StockRecord> records = read_clean_records(cfg.workdir);
  const auto yearly = yearly_average_turnover(records);
  const auto shares = shares_sum_by_class(records, manifest.config.bins);
  write_text_file(join_path(cfg.workdir, "figure3.csv"), figure3_csv(yearly));
  write_text_file(join_path(cfg.workdir, "figure3.svg"), figure3_svg(yearly));
  write_text_file(join_path(cfg.workdir, "figure4.csv"), figure4_csv(shares));
  write_text_file(join_path(cfg.workdir, "figure4.svg"), figure4_svg(shares));

  std::size_t width = 5;
  for (const ModelEvaluation& row : report.rows) width = std::max(width, row.name.size());
  out << "model";
  out << std::string(width - 5, ' ') << "  accuracy_percent  train_seconds\n";
  for (const ModelEvaluation& row : report.rows) {
    out << row.name << std::string(width - row.name.size(), ' ') << "  "
        << csv::format_fixed(row.accuracy, 2) << "  " << csv::format_fixed(row.train_seconds, 3)
        << "\n";
  }
  out << "wrote report.csv, confusion CSVs and figure data to " << cfg.workdir << "\n";
}

void cmd_predict(const PipelineConfig& cfg, const std::string& model_path,
                 const std::string& rows_csv, std::ostream& out) {
  const Model model = load_model(model_path);
  const auto& feature_names = model_feature_names(model);
  const ForestModel* forest = std::get_if<ForestModel>(&model);

  std::string header_line = "prediction";
  if (forest != nullptr) {
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      header_line += ",vote_";
      header_line += class_to_char(class_from_index(k));
    }
  }

  const std::string text = read_text_file(rows_csv);
  const auto grid = csv::parse_text(text);
  const std::string predictions_path = join_path(cfg.workdir, "predictions.csv");

  std::vector<std::vector<double>> rows;
  if (grid.empty()) {
    // nothing to predict; still emit the header so the artifact exists
  } else {
    std::set<std::string> canonical;
    for (const auto& cell : grid[0]) {
      if (const auto key = canonical_column(cell)) canonical.insert(*key);
    }
    const bool record_input = canonical.size() >= 13;

    if (record_input) {
      RawTable raw = parse_csv(text);
      DropResult complete = drop_missing(raw);
      if (complete.dropped > 0) {
        throw UserInputError(std::to_string(complete.dropped) +
                             " prediction rows have missing values");
      }
      const auto records = records_from_table(complete.table);
      const WorkdirManifest manifest = load_manifest(cfg.workdir);
      EncodeOptions enc;
      enc.include_total_turnover =
          std::find(manifest.encoded_feature_names.begin(), manifest.encoded_feature_names.end(),
                    "total_turnover") != manifest.encoded_feature_names.end();
      enc.include_date =
          std::find(manifest.encoded_feature_names.begin(), manifest.encoded_feature_names.end(),
                    "date") != manifest.encoded_feature_names.end();
      enc.vocabulary = manifest.company_vocabulary;
      const LabeledDataset encoded = encode_features(records, manifest.config.bins, enc);

      std::vector<std::size_t> indices;
      for (const std::string& feature : feature_names) {
        const auto it =
            std::find(encoded.feature_names.begin(), encoded.feature_names.end(), feature);
        if (it == encoded.feature_names.end()) {
          throw UserInputError("model feature \"" + feature +
                               "\" cannot be derived from record columns");
        }
        indices.push_back(static_cast<std::size_t>(it - encoded.feature_names.begin()));
      }
      for (std::size_t r = 0; r < encoded.n_rows(); ++r) {
        std::vector<double> row(indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i) row[i] = encoded.at(r, indices[i]);
        rows.push_back(std::move(row));
      }
    } else {
      const auto& header = grid[0];
      std::vector<std::size_t> indices;
      for (const std::string& feature : feature_names) {
        const auto it = std::find(header.begin(), header.end(), feature);
        if (it == header.end()) {
          throw UserInputError("column \"" + feature + "\" required by the model is missing from " +
                               rows_csv);
        }
        indices.push_back(static_cast<std::size_t>(it - header.begin()));
      }
      for (std::size_t r = 1; r < grid.size(); ++r) {
        if (grid[r].size() != header.size()) {
          throw ParseError("row " + std::to_string(r) + " has " + std::to_string(grid[r].size()) +
                           " cells, expected " + std::to_string(header.size()));
        }
        std::vector<double> row(indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i) {
          row[i] = parse_numeric(grid[r][indices[i]], r, feature_names[i]);
        }
        rows.push_back(std::move(row));
      }
    }
  }

  std::string output = header_line + "\n";
  for (const auto& row : rows) {
    if (forest != nullptr) {
      const ForestPrediction p = forest->predict(row);
      output += class_to_char(p.predicted);
      for (std::size_t k = 0; k < kNumClasses; ++k) {
        output += ',';
        output += std::to_string(p.votes[k]);
      }
    } else {
      output += class_to_char(model_predict(model, row));
    }
    output += '\n';
  }
  fs::create_directories(cfg.workdir);
  write_text_file(predictions_path, output);
  out << "wrote " << rows.size() << " predictions to " << predictions_path << "\n";
}

void cmd_synth(const PipelineConfig& cfg, const SynthOptions& options, std::ostream& out) {
  if (options.out_csv.empty()) throw UserInputError("synth needs an output CSV path");
  const SyntheticData data = generate_synthetic(options.spec);
  const RawTable table = records_to_table(data.records);

  const fs::path out_path(options.out_csv);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_raw_table_csv(options.out_csv, table);
  out << "wrote " << data.records.size() << " synthetic records to " << options.out_csv << "\n";

  if (options.emit_workdir.empty()) return;
  fs::create_directories(options.emit_workdir);

  WorkdirManifest manifest;
  manifest.config = cfg;
  manifest.config.input_csv = options.out_csv;
  manifest.company_vocabulary = company_vocabulary(data.records);
  manifest.rows_input = data.records.size();
  manifest.rows_clean = data.records.size();
  manifest.class_histogram = data.dataset.label_histogram();
  manifest.encoded_feature_names = data.dataset.feature_names;

  SplitResult split = split_train_validation(data.dataset, cfg.split);
  manifest.train_histogram = split.train.label_histogram();
  manifest.valid_histogram = split.valid.label_histogram();
  for (const auto& w : split.warnings) manifest.warnings.push_back(w);

  write_raw_table_csv(join_path(options.emit_workdir, "clean.csv"), table);
  write_dataset_csv(join_path(options.emit_workdir, "encoded.csv"), data.dataset);
  write_dataset_csv(join_path(options.emit_workdir, "train.csv"), split.train);
  write_dataset_csv(join_path(options.emit_workdir, "valid.csv"), split.valid);
  write_text_file(join_path(options.emit_workdir, "manifest.json"), manifest_json(manifest));
  out << "workdir ready at " << options.emit_workdir << " (" << split.train.n_rows()
      << " train / " << split.valid.n_rows() << " valid rows)\n";
}

}  // namespace turnover
