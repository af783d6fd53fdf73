#include "turnover/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "turnover/csv.hpp"
#include "turnover/errors.hpp"
#include "turnover/rng.hpp"

namespace turnover {

namespace {

struct ColumnAlias {
  const char* canonical;
  const char* normalized;
};

// Normalized spellings seen in exchange exports.
constexpr ColumnAlias kAliases[] = {
    {"date", "date"},
    {"open_price", "openprice"},
    {"open_price", "open"},
    {"high_price", "highprice"},
    {"high_price", "high"},
    {"low_price", "lowprice"},
    {"low_price", "low"},
    {"close_price", "closeprice"},
    {"close_price", "close"},
    {"wap", "wap"},
    {"no_of_shares", "noofshares"},
    {"no_of_shares", "noshares"},
    {"no_of_shares", "numberofshares"},
    {"no_of_trades", "nooftrades"},
    {"no_of_trades", "notrades"},
    {"no_of_trades", "numberoftrades"},
    {"total_turnover", "totalturnover"},
    {"total_turnover", "totalturnoverrs"},
    {"deliverable_quantity", "deliverablequantity"},
    {"deliverable_quantity", "deliverableqty"},
    {"spread_high_low", "spreadhighlow"},
    {"spread_close_open", "spreadcloseopen"},
    {"company", "company"},
    {"company", "companyname"},
};

constexpr const char* kRequiredColumns[] = {
    "date",          "open_price",     "high_price",           "low_price",
    "close_price",   "wap",            "no_of_shares",         "no_of_trades",
    "total_turnover", "deliverable_quantity", "spread_high_low", "spread_close_open",
    "company"};

constexpr const char* kMonthNames[] = {"january", "february", "march",     "april",
                                       "may",     "june",     "july",      "august",
                                       "september", "october", "november", "december"};

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

bool is_missing_cell(std::string_view cell) {
  const std::string v = to_lower(trim(cell));
  return v.empty() || v == "na" || v == "n/a" || v == "-";
}

std::string normalize_column_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    const unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) out += static_cast<char>(std::tolower(uc));
  }
  return out;
}

std::optional<std::string> canonical_column(std::string_view header_name) {
  const std::string norm = normalize_column_name(header_name);
  for (const auto& alias : kAliases) {
    if (norm == alias.normalized) return std::string(alias.canonical);
  }
  return std::nullopt;
}

RawTable parse_csv(std::string_view text) {
  const auto grid = csv::parse_text(text);
  if (grid.empty()) throw SchemaError("input has no header row");

  RawTable table;
  table.header = grid.front();

  std::set<std::string> seen;
  for (const auto& name : table.header) {
    if (auto key = canonical_column(name)) {
      seen.insert(*key);
    } else {
      table.warnings.push_back("unknown extra column \"" + name + "\" retained");
    }
  }
  for (const char* required : kRequiredColumns) {
    if (!seen.count(required)) {
      throw SchemaError(std::string("missing column ") + required);
    }
  }

  table.rows.reserve(grid.size() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].size() != table.header.size()) {
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(grid[i].size()) +
                       " cells, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(grid[i]);
  }
  return table;
}

RawTable parse_csv_file(const std::string& path) {
  return parse_csv(read_text_file(path));
}

DropResult drop_missing(const RawTable& t) {
  DropResult result;
  result.table.header = t.header;
  result.table.warnings = t.warnings;
  for (const auto& row : t.rows) {
    const bool complete =
        std::none_of(row.begin(), row.end(), [](const std::string& c) { return is_missing_cell(c); });
    if (complete) {
      result.table.rows.push_back(row);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

double parse_numeric(std::string_view cell, std::size_t row_number, std::string_view column) {
  std::string digits;
  digits.reserve(cell.size());
  for (char c : trim(cell)) {
    if (c == ',') continue;  // thousands separator
    digits += c;
  }
  double value = 0.0;
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row_number) + ": cannot parse \"" +
                     std::string(cell) + "\" as a number for column " + std::string(column));
  }
  return value;
}

std::int64_t parse_count(std::string_view cell, std::size_t row_number, std::string_view column) {
  const double value = parse_numeric(cell, row_number, column);
  const double rounded = std::nearbyint(value);
  if (std::fabs(value - rounded) > 1e-6 || std::fabs(rounded) > 9.2e18) {
    throw ParseError("row " + std::to_string(row_number) + ": column " + std::string(column) +
                     " expects an integer count, got \"" + std::string(cell) + "\"");
  }
  return static_cast<std::int64_t>(rounded);
}

Date parse_date(std::string_view cell, std::size_t row_number) {
  const std::string s = std::string(trim(cell));
  std::vector<std::string> parts;
  std::string part;
  for (char c : s) {
    if (c == '-' || c == '/' || c == ' ') {
      if (!part.empty()) parts.push_back(part);
      part.clear();
    } else {
      part += c;
    }
  }
  if (!part.empty()) parts.push_back(part);

  auto fail = [&]() -> Date {
    throw ParseError("row " + std::to_string(row_number) + ": cannot parse date \"" + s + "\"");
  };
  auto to_int = [&](const std::string& p, int& out) {
    const auto res = std::from_chars(p.data(), p.data() + p.size(), out);
    return res.ec == std::errc() && res.ptr == p.data() + p.size();
  };
  auto month_from_name = [&](const std::string& p) -> int {
    const std::string lower = to_lower(p);
    for (int m = 0; m < 12; ++m) {
      const std::string full = kMonthNames[m];
      if (lower == full || (lower.size() == 3 && full.substr(0, 3) == lower)) return m + 1;
    }
    return 0;
  };

  if (parts.size() != 3) fail();
  Date d;
  if (parts[0].size() == 4) {
    // ISO: YYYY-MM-DD
    if (!to_int(parts[0], d.year) || !to_int(parts[1], d.month) || !to_int(parts[2], d.day)) fail();
  } else {
    // Export style: DD-Month-YYYY
    const int m = month_from_name(parts[1]);
    if (m == 0) fail();
    d.month = m;
    if (!to_int(parts[0], d.day) || !to_int(parts[2], d.year)) fail();
  }

  static constexpr int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  const int max_day = d.month == 2 && leap ? 29 : (d.month >= 1 && d.month <= 12 ? days_in_month[d.month - 1] : 0);
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > max_day || d.year < 1800 || d.year > 9999) {
    fail();
  }
  return d;
}

std::vector<StockRecord> records_from_table(const RawTable& t) {
  std::map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (auto key = canonical_column(t.header[i])) column_index.emplace(*key, i);
  }
  auto idx = [&](const char* key) { return column_index.at(key); };

  std::vector<StockRecord> records;
  records.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t row_number = r + 1;
    StockRecord rec;
    rec.date = parse_date(row[idx("date")], row_number);
    rec.company = std::string(trim(row[idx("company")]));
    rec.open_price = parse_numeric(row[idx("open_price")], row_number, "open_price");
    rec.high_price = parse_numeric(row[idx("high_price")], row_number, "high_price");
    rec.low_price = parse_numeric(row[idx("low_price")], row_number, "low_price");
    rec.close_price = parse_numeric(row[idx("close_price")], row_number, "close_price");
    rec.wap = parse_numeric(row[idx("wap")], row_number, "wap");
    rec.no_of_shares = parse_count(row[idx("no_of_shares")], row_number, "no_of_shares");
    rec.no_of_trades = parse_count(row[idx("no_of_trades")], row_number, "no_of_trades");
    rec.deliverable_quantity =
        parse_count(row[idx("deliverable_quantity")], row_number, "deliverable_quantity");
    rec.spread_high_low = parse_numeric(row[idx("spread_high_low")], row_number, "spread_high_low");
    rec.spread_close_open =
        parse_numeric(row[idx("spread_close_open")], row_number, "spread_close_open");
    rec.total_turnover = parse_numeric(row[idx("total_turnover")], row_number, "total_turnover");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<std::string> company_vocabulary(const std::vector<StockRecord>& records) {
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.company);
  return {names.begin(), names.end()};
}

LabeledDataset encode_features(const std::vector<StockRecord>& records, const TurnoverBins& bins,
                               const EncodeOptions& options) {
  if (records.empty()) throw std::domain_error("cannot encode an empty record list");

  const auto companies =
      options.vocabulary.empty() ? company_vocabulary(records) : options.vocabulary;
  if (!options.vocabulary.empty()) {
    for (const auto& rec : records) {
      if (std::find(companies.begin(), companies.end(), rec.company) == companies.end()) {
        std::string known;
        for (const auto& name : companies) {
          if (!known.empty()) known += ", ";
          known += name;
        }
        throw UserInputError("unknown company \"" + rec.company + "\"; known companies: " + known);
      }
    }
  }
  LabeledDataset d;
  for (const char* col : kNumericColumns) d.feature_names.push_back(col);
  if (options.include_total_turnover) d.feature_names.push_back("total_turnover");
  if (options.include_date) d.feature_names.push_back("date");
  for (const auto& name : companies) d.feature_names.push_back("company=" + name);

  std::vector<double> row(d.feature_names.size(), 0.0);
  for (const auto& rec : records) {
    std::size_t i = 0;
    row[i++] = rec.open_price;
    row[i++] = rec.high_price;
    row[i++] = rec.low_price;
    row[i++] = rec.close_price;
    row[i++] = rec.wap;
    row[i++] = static_cast<double>(rec.no_of_shares);
    row[i++] = static_cast<double>(rec.no_of_trades);
    row[i++] = static_cast<double>(rec.deliverable_quantity);
    row[i++] = rec.spread_high_low;
    row[i++] = rec.spread_close_open;
    if (options.include_total_turnover) row[i++] = rec.total_turnover;
    if (options.include_date) row[i++] = static_cast<double>(rec.date.ordinal());
    for (const auto& name : companies) row[i++] = rec.company == name ? 1.0 : 0.0;
    d.append_row(row, discretize_turnover(rec.total_turnover, bins));
  }
  d.check_invariants();
  return d;
}

SplitResult split_train_validation(const LabeledDataset& d, const SplitConfig& cfg) {
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = d.n_rows();
  if (n == 0) throw std::invalid_argument("cannot split an empty dataset");
  const std::size_t take_total =
      static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(n)));

  SplitResult result;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> valid_idx;

  if (cfg.strategy == SplitStrategy::Sequential) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return d.labels[a] < d.labels[b];
    });
    train_idx.assign(order.begin(), order.begin() + take_total);
    valid_idx.assign(order.begin() + take_total, order.end());
  } else {
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[class_index(d.labels[i])].push_back(i);

    std::array<std::size_t, kNumClasses> take{};
    std::size_t assigned = 0;
    // Singleton classes go straight to train.
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (by_class[c].size() == 1) {
        take[c] = 1;
        ++assigned;
        result.warnings.push_back(std::string("class ") + static_cast<char>('A' + c) +
                                  " has a single row; assigned to train");
      }
    }
    // Largest-remainder apportionment of the remaining train slots.
    std::vector<std::pair<double, std::size_t>> fractions;  // (fractional part, class)
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (by_class[c].size() <= 1) continue;
      const double target = cfg.train_fraction * static_cast<double>(by_class[c].size());
      take[c] = static_cast<std::size_t>(std::floor(target));
      assigned += take[c];
      fractions.emplace_back(target - std::floor(target), c);
    }
    std::stable_sort(fractions.begin(), fractions.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t cursor = 0;
    while (assigned < take_total && cursor < fractions.size()) {
      const std::size_t c = fractions[cursor++].second;
      if (take[c] < by_class[c].size()) {
        ++take[c];
        ++assigned;
      }
    }
    while (assigned > take_total) {
      // Over-assignment can only come from forced singletons; trim from the
      // class with the smallest fractional part that still has slack.
      bool trimmed = false;
      for (auto it = fractions.rbegin(); it != fractions.rend(); ++it) {
        if (take[it->second] > 0) {
          --take[it->second];
          --assigned;
          trimmed = true;
          break;
        }
      }
      if (!trimmed) break;
    }

    Rng rng(cfg.seed);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      auto rows = by_class[c];
      rng.shuffle(rows);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        (i < take[c] ? train_idx : valid_idx).push_back(rows[i]);
      }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());
  }

  result.train = d.select_rows(train_idx);
  result.valid = d.select_rows(valid_idx);
  return result;
}

void write_dataset_csv(const std::string& path, const LabeledDataset& d) {
  std::string out;
  std::vector<std::string> header = d.feature_names;
  header.push_back("label");
  out += csv::join_row(header);
  std::vector<std::string> fields(d.n_features() + 1);
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (std::size_t c = 0; c < d.n_features(); ++c) fields[c] = csv::format_double(d.at(r, c));
    fields[d.n_features()] = std::string(1, class_to_char(d.labels[r]));
    out += csv::join_row(fields);
  }
  write_text_file(path, out);
}

LabeledDataset read_dataset_csv(const std::string& path) {
  const auto grid = csv::parse_text(read_text_file(path));
  if (grid.empty()) throw SchemaError(path + ": no header row");
  const auto& header = grid.front();
  if (header.empty() || header.back() != "label") {
    throw SchemaError(path + ": last column must be \"label\"");
  }
  LabeledDataset d;
  d.feature_names.assign(header.begin(), header.end() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& row = grid[i];
    if (row.size() != header.size()) {
      throw ParseError(path + ": row " + std::to_string(i) + " has wrong cell count");
    }
    std::vector<double> values(d.n_features());
    for (std::size_t c = 0; c < d.n_features(); ++c) {
      values[c] = parse_numeric(row[c], i, d.feature_names[c]);
    }
    const std::string& cell = row.back();
    if (cell.size() != 1) throw ParseError(path + ": row " + std::to_string(i) + " has a bad label");
    d.append_row(values, class_from_char(cell[0]));
  }
  return d;
}

void write_raw_table_csv(const std::string& path, const RawTable& t) {
  std::string out = csv::join_row(t.header);
  for (const auto& row : t.rows) out += csv::join_row(row);
  write_text_file(path, out);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserInputError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace turnover
