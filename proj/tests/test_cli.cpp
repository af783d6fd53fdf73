// Drives the installed binary end to end through std::system. The binary
// path arrives in TURNOVER_CLI.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

const std::string& cli_path() {
  static const std::string path = [] {
    const char* env = std::getenv("TURNOVER_CLI");
    return std::string(env == nullptr ? "" : env);
  }();
  return path;
}

const fs::path& scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("turnover_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out << content;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path capture =
      scratch_root() / ("capture_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      "\"" + cli_path() + "\" " + args + " > \"" + capture.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status != -1 && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.output = read_file(capture);
  return r;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("binary path is configured") {
  REQUIRE_FALSE(cli_path().empty());
  REQUIRE(fs::exists(cli_path()));
}

TEST_CASE("full pipeline over a synthetic corpus") {
  const fs::path dir = scratch_root() / "flow";
  fs::create_directories(dir);
  const std::string raw = (dir / "raw.csv").string();
  const std::string work = (dir / "work").string();

  auto synth = run("synth --out " + raw +
                   " --rows 200 --informative 3 --noise 2 --noise-level 0.2 --seed 9");
  REQUIRE_MESSAGE(synth.exit_code == 0, synth.output);
  CHECK(contains(synth.output, "200 synthetic records"));
  REQUIRE(fs::exists(raw));

  auto ingest = run("ingest --input " + raw + " --workdir " + work + " --seed 4");
  REQUIRE_MESSAGE(ingest.exit_code == 0, ingest.output);
  for (const char* name : {"manifest.json", "clean.csv", "encoded.csv", "train.csv", "valid.csv"}) {
    CHECK_MESSAGE(fs::exists(fs::path(work) / name), name);
  }
  CHECK(contains(ingest.output, "split: 120 train / 80 valid"));

  auto features = run("features --workdir " + work +
                      " --boruta-max-iterations 6 --boruta-trees 25 --boruta-seed 3");
  REQUIRE_MESSAGE(features.exit_code == 0, features.output);
  CHECK(contains(features.output, "Confirmed"));
  const auto boruta_lines = lines_of(read_file(fs::path(work) / "boruta.csv"));
  REQUIRE_FALSE(boruta_lines.empty());
  CHECK(boruta_lines[0] == "feature,decision,hits,trials,mean_z");
  CHECK(boruta_lines.size() == 15);  // 10 numeric + 4 company columns + header
  CHECK(fs::exists(fs::path(work) / "boruta_history.json"));

  auto train = run("train --workdir " + work +
                   " --n-trees 30 --epochs 60 --forest-seed 1 --no-boruta-selection");
  REQUIRE_MESSAGE(train.exit_code == 0, train.output);
  CHECK(contains(train.output, "5 of 5 models written"));
  for (const char* name : {"model_randforest.json", "model_tree_party.json",
                           "model_tree_rpart.json", "model_svm.json", "model_mlr.json",
                           "timings.json"}) {
    CHECK_MESSAGE(fs::exists(fs::path(work) / name), name);
  }

  auto evaluate = run("evaluate --workdir " + work);
  REQUIRE_MESSAGE(evaluate.exit_code == 0, evaluate.output);
  for (const char* name : {"report.csv", "confusion_randforest.csv", "confusion_mlr.csv",
                           "figure3.csv", "figure3.svg", "figure4.csv", "figure4.svg"}) {
    CHECK_MESSAGE(fs::exists(fs::path(work) / name), name);
  }
  const auto report_lines = lines_of(read_file(fs::path(work) / "report.csv"));
  REQUIRE(report_lines.size() == 6);
  CHECK(report_lines[0] == "model,accuracy_percent,train_seconds");

  // encoded rows: valid.csv itself works, the label column is just ignored
  auto predict = run("predict --workdir " + work + " --model " + work +
                     "/model_tree_rpart.json --rows " + work + "/valid.csv");
  REQUIRE_MESSAGE(predict.exit_code == 0, predict.output);
  auto pred_lines = lines_of(read_file(fs::path(work) / "predictions.csv"));
  REQUIRE(pred_lines.size() == 81);
  CHECK(pred_lines[0] == "prediction");
  for (std::size_t i = 1; i < pred_lines.size(); ++i) {
    REQUIRE(pred_lines[i].size() == 1);
    CHECK(pred_lines[i][0] >= 'A');
    CHECK(pred_lines[i][0] <= 'E');
  }

  // a forest model also reports per-class vote counts
  auto forest_predict = run("predict --workdir " + work + " --model " + work +
                            "/model_randforest.json --rows " + work + "/valid.csv");
  REQUIRE_MESSAGE(forest_predict.exit_code == 0, forest_predict.output);
  pred_lines = lines_of(read_file(fs::path(work) / "predictions.csv"));
  REQUIRE(pred_lines.size() == 81);
  CHECK(pred_lines[0] == "prediction,vote_A,vote_B,vote_C,vote_D,vote_E");
  for (std::size_t i = 1; i < pred_lines.size(); ++i) {
    const auto fields = split_fields(pred_lines[i]);
    REQUIRE(fields.size() == 6);
    long votes = 0;
    for (int k = 1; k <= 5; ++k) votes += std::stol(fields[k]);
    CHECK(votes == 30);
  }

  // raw record rows are encoded through the manifest vocabulary and bins
  auto record_predict = run("predict --workdir " + work + " --model " + work +
                            "/model_randforest.json --rows " + raw);
  REQUIRE_MESSAGE(record_predict.exit_code == 0, record_predict.output);
  CHECK(contains(record_predict.output, "wrote 200 predictions"));

  // reruns reproduce artifacts byte for byte
  const std::string manifest_before = read_file(fs::path(work) / "manifest.json");
  const std::string train_csv_before = read_file(fs::path(work) / "train.csv");
  REQUIRE(run("ingest --input " + raw + " --workdir " + work + " --seed 4").exit_code == 0);
  CHECK(read_file(fs::path(work) / "manifest.json") == manifest_before);
  CHECK(read_file(fs::path(work) / "train.csv") == train_csv_before);

  const std::string forest_before = read_file(fs::path(work) / "model_randforest.json");
  const std::string mlr_before = read_file(fs::path(work) / "model_mlr.json");
  REQUIRE(run("train --workdir " + work +
              " --n-trees 30 --epochs 60 --forest-seed 1 --no-boruta-selection")
              .exit_code == 0);
  CHECK(read_file(fs::path(work) / "model_randforest.json") == forest_before);
  CHECK(read_file(fs::path(work) / "model_mlr.json") == mlr_before);
}

TEST_CASE("synth can emit a ready workdir and a noiseless tree memorizes it") {
  const fs::path dir = scratch_root() / "noiseless";
  fs::create_directories(dir);
  const std::string raw = (dir / "raw.csv").string();
  const std::string work = (dir / "work").string();

  auto synth = run("synth --out " + raw +
                   " --rows 150 --informative 2 --noise 0 --noise-level 0 --seed 11"
                   " --emit-workdir " + work + " --split-seed 8");
  REQUIRE_MESSAGE(synth.exit_code == 0, synth.output);
  CHECK(contains(synth.output, "workdir ready"));
  for (const char* name : {"manifest.json", "train.csv", "valid.csv"}) {
    CHECK_MESSAGE(fs::exists(fs::path(work) / name), name);
  }

  auto train = run("train --workdir " + work + " --n-trees 20 --epochs 40");
  REQUIRE_MESSAGE(train.exit_code == 0, train.output);

  auto predict = run("predict --workdir " + work + " --model " + work +
                     "/model_tree_rpart.json --rows " + work + "/train.csv");
  REQUIRE_MESSAGE(predict.exit_code == 0, predict.output);

  const auto train_lines = lines_of(read_file(fs::path(work) / "train.csv"));
  const auto pred_lines = lines_of(read_file(fs::path(work) / "predictions.csv"));
  REQUIRE(pred_lines.size() == train_lines.size());  // both have one header line
  for (std::size_t i = 1; i < train_lines.size(); ++i) {
    const auto fields = split_fields(train_lines[i]);
    REQUIRE_FALSE(fields.empty());
    CHECK(pred_lines[i] == fields.back());
  }
}

TEST_CASE("usage and input errors exit with code 2") {
  const fs::path dir = scratch_root() / "errors";
  fs::create_directories(dir);
  const std::string work = (dir / "work").string();

  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);             // a subcommand is required
  CHECK(run("ingest --bogus-flag").exit_code == 2);

  auto missing_manifest = run("features --workdir " + (dir / "nowhere").string());
  CHECK(missing_manifest.exit_code == 2);
  CHECK(contains(missing_manifest.output, "run ingest first"));

  auto missing_input = run("ingest --input " + (dir / "absent.csv").string() + " --workdir " +
                           work);
  CHECK(missing_input.exit_code == 2);
  CHECK(contains(missing_input.output, "does not exist"));

  auto bad_strategy = run("ingest --input x.csv --workdir " + work +
                          " --split-strategy banana");
  CHECK(bad_strategy.exit_code == 2);
  CHECK(contains(bad_strategy.output, "unknown split strategy"));

  // a small corpus for the predict error paths
  const std::string raw = (dir / "raw.csv").string();
  REQUIRE(run("synth --out " + raw + " --rows 60 --informative 1 --noise 0 --seed 3"
              " --emit-workdir " + work).exit_code == 0);
  REQUIRE(run("train --workdir " + work + " --n-trees 5 --epochs 10").exit_code == 0);
  const std::string model = work + "/model_tree_rpart.json";

  auto no_model = run("predict --workdir " + work + " --model " + work +
                      "/model_absent.json --rows " + raw);
  CHECK(no_model.exit_code == 2);

  // unknown company in a record file: keep the header and one row, patch field 2
  const auto raw_lines = lines_of(read_file(raw));
  REQUIRE(raw_lines.size() >= 2);
  auto fields = split_fields(raw_lines[1]);
  REQUIRE(fields.size() >= 13);
  fields[1] = "UNSEEN_CORP";
  std::string patched = raw_lines[0] + "\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    patched += (i == 0 ? "" : ",") + fields[i];
  }
  patched += "\n";
  write_file(dir / "strangers.csv", patched);
  auto stranger = run("predict --workdir " + work + " --model " + model + " --rows " +
                      (dir / "strangers.csv").string());
  CHECK(stranger.exit_code == 2);
  CHECK(contains(stranger.output, "unknown company"));
  CHECK(contains(stranger.output, "UNSEEN_CORP"));

  // encoded input lacking a model feature column
  write_file(dir / "narrow.csv", "unrelated\n1\n");
  auto narrow = run("predict --workdir " + work + " --model " + model + " --rows " +
                    (dir / "narrow.csv").string());
  CHECK(narrow.exit_code == 2);
  CHECK(contains(narrow.output, "required by the model is missing"));

  // an empty rows file still produces the header-only artifact
  write_file(dir / "none.csv", "");
  auto empty = run("predict --workdir " + work + " --model " + model + " --rows " +
                   (dir / "none.csv").string());
  CHECK(empty.exit_code == 0);
  CHECK(read_file(fs::path(work) / "predictions.csv") == "prediction\n");
}

TEST_CASE("evaluating a model with unknown features exits with code 1") {
  const fs::path dir = scratch_root() / "mismatch";
  fs::create_directories(dir);
  const std::string work_a = (dir / "a").string();
  const std::string work_b = (dir / "b").string();

  REQUIRE(run("synth --out " + (dir / "a.csv").string() +
              " --rows 60 --informative 1 --noise 1 --seed 5 --emit-workdir " + work_a)
              .exit_code == 0);
  REQUIRE(run("synth --out " + (dir / "b.csv").string() +
              " --rows 60 --informative 1 --noise 0 --seed 6 --emit-workdir " + work_b)
              .exit_code == 0);
  REQUIRE(run("train --workdir " + work_a + " --n-trees 5 --epochs 10").exit_code == 0);

  fs::copy_file(fs::path(work_a) / "model_tree_rpart.json",
                fs::path(work_b) / "model_tree_rpart.json");
  auto evaluate = run("evaluate --workdir " + work_b);
  CHECK(evaluate.exit_code == 1);
  CHECK(contains(evaluate.output, "absent from the validation data"));
}
