#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "turnover/data_model.hpp"

namespace turnover {

// Pre-cleaning carrier: header plus string cells, exactly as read. Cells
// holding "", "NA", "N/A" or "-" (case-insensitive) count as missing.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> warnings;
};

enum class SplitStrategy { StratifiedRandom, Sequential };

struct SplitConfig {
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::StratifiedRandom;
};

struct SplitResult {
  LabeledDataset train;
  LabeledDataset valid;
  std::vector<std::string> warnings;
};

struct DropResult {
  RawTable table;
  std::size_t dropped = 0;
};

// Canonical column keys of the daily-record schema, in encoding order.
inline constexpr const char* kNumericColumns[] = {
    "open_price",   "high_price",     "low_price",
    "close_price",  "wap",            "no_of_shares",
    "no_of_trades", "deliverable_quantity", "spread_high_low",
    "spread_close_open"};

bool is_missing_cell(std::string_view cell);

// Lowercase and strip everything but [a-z0-9]; "No. of Trades" and
// "no_of_trades" normalize to the same key.
std::string normalize_column_name(std::string_view name);

// Maps a header spelling to its canonical column key, or nullopt for an
// unknown column.
std::optional<std::string> canonical_column(std::string_view header_name);

// Parses CSV text with a mandatory header row. All thirteen schema columns
// must be present (order-, case- and punctuation-insensitive). Unknown extra
// columns are retained and flagged in `warnings`. Throws SchemaError for a
// missing column, ParseError for a row with the wrong cell count.
RawTable parse_csv(std::string_view text);

RawTable parse_csv_file(const std::string& path);

// Keeps exactly the rows with zero missing cells, order preserved.
DropResult drop_missing(const RawTable& t);

// Numeric cell parser: strips thousands separators and surrounding spaces.
// Rejects non-finite results.
double parse_numeric(std::string_view cell, std::size_t row_number, std::string_view column);

std::int64_t parse_count(std::string_view cell, std::size_t row_number, std::string_view column);

// Accepts ISO-8601 (2015-01-30) and day-month-year forms with named months
// (30-January-2015, 30 Jan 2015).
Date parse_date(std::string_view cell, std::size_t row_number);

// Converts a cleaned table (no missing cells) into typed records.
// row_numbers, when given, receives the 1-based data row number of each
// record for error reporting.
std::vector<StockRecord> records_from_table(const RawTable& t);

struct EncodeOptions {
  bool include_total_turnover = false;  // the label's source; excluded by default
  bool include_date = false;            // a key, not a predictor; excluded by default
  // Fixed company vocabulary; empty derives it from the records. With a
  // fixed vocabulary an unseen company is a UserInputError (prediction-time
  // rows must stay inside the trained indicator space).
  std::vector<std::string> vocabulary;
};

// Feature matrix: the ten numeric columns, optional turnover/date columns,
// then one 0/1 indicator per company (sorted vocabulary, named
// "company=<name>"). Labels come from discretizing total_turnover.
LabeledDataset encode_features(const std::vector<StockRecord>& records, const TurnoverBins& bins,
                               const EncodeOptions& options = {});

std::vector<std::string> company_vocabulary(const std::vector<StockRecord>& records);

// |train| = round(train_fraction * |d|); train and valid partition d.
// StratifiedRandom keeps each class's train share within one row of the
// exact proportion; a single-row class goes to train with a warning.
// Sequential sorts rows by label (stable) and cuts once, reproducing a
// cut-after-sorting regime for comparison.
SplitResult split_train_validation(const LabeledDataset& d, const SplitConfig& cfg);

// Dataset CSV: feature columns plus a final "label" column with the class
// letter. Values are shortest-round-trip formatted, so a read-back gives
// bit-identical doubles.
void write_dataset_csv(const std::string& path, const LabeledDataset& d);
LabeledDataset read_dataset_csv(const std::string& path);

void write_raw_table_csv(const std::string& path, const RawTable& t);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace turnover
