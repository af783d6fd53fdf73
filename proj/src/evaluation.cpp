#include "turnover/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "turnover/csv.hpp"
#include "turnover/rng.hpp"

namespace turnover {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) sum += c;
  }
  return sum;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) sum += counts[k][k];
  return sum;
}

ConfusionMatrix confusion_matrix(std::span<const TurnoverClass> truth,
                                 std::span<const TurnoverClass> predicted) {
  if (truth.size() != predicted.size()) {
    throw std::domain_error("confusion matrix needs equal-length truth and prediction lists");
  }
  if (truth.empty()) throw std::domain_error("confusion matrix of zero rows");
  ConfusionMatrix c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++c.counts[class_index(truth[i])][class_index(predicted[i])];
  }
  return c;
}

double accuracy_percent(const ConfusionMatrix& c) {
  const std::int64_t total = c.total();
  if (total <= 0) throw std::domain_error("accuracy of an empty confusion matrix");
  return 100.0 * static_cast<double>(c.trace()) / static_cast<double>(total);
}

ComparativeReport comparative_report(std::span<const NamedPredictor> models,
                                     const LabeledDataset& valid,
                                     const DatasetFingerprint& fingerprint) {
  ComparativeReport report;
  report.fingerprint = fingerprint;
  for (const NamedPredictor& model : models) {
    if (model.n_features != valid.n_features()) {
      throw std::domain_error("model " + model.name + " expects " +
                              std::to_string(model.n_features) + " features, dataset has " +
                              std::to_string(valid.n_features()));
    }
    std::vector<TurnoverClass> predicted(valid.n_rows());
    for (std::size_t r = 0; r < valid.n_rows(); ++r) predicted[r] = model.predict(valid.row(r));
    ModelEvaluation eval;
    eval.name = model.name;
    eval.confusion = confusion_matrix(valid.labels, predicted);
    eval.accuracy = accuracy_percent(eval.confusion);
    eval.train_seconds = model.train_seconds;
    report.rows.push_back(std::move(eval));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ModelEvaluation& a, const ModelEvaluation& b) {
              if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
              return a.name < b.name;
            });
  return report;
}

std::string report_csv(const ComparativeReport& report) {
  std::string out = "model,accuracy_percent,train_seconds\n";
  for (const ModelEvaluation& row : report.rows) {
    out += csv::join_row({row.name, csv::format_fixed(row.accuracy, 2),
                          csv::format_fixed(row.train_seconds, 3)});
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& c) {
  std::string out = "class,A,B,C,D,E\n";
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out += class_to_char(class_from_index(i));
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      out += ',';
      out += std::to_string(c.counts[i][j]);
    }
    out += '\n';
  }
  return out;
}

std::vector<YearlyAverage> yearly_average_turnover(std::span<const StockRecord> records) {
  if (records.empty()) throw std::invalid_argument("no records to average");
  std::map<std::pair<std::string, int>, std::pair<double, std::int64_t>> groups;
  for (const StockRecord& r : records) {
    auto& acc = groups[{r.company, r.date.year}];
    acc.first += r.total_turnover;
    acc.second += 1;
  }
  std::vector<YearlyAverage> out;
  out.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    out.push_back({key.first, key.second, acc.first / static_cast<double>(acc.second)});
  }
  return out;
}

std::array<std::int64_t, kNumClasses> shares_sum_by_class(std::span<const StockRecord> records,
                                                          const TurnoverBins& bins) {
  std::array<std::int64_t, kNumClasses> sums{};
  for (const StockRecord& r : records) {
    sums[class_index(discretize_turnover(r.total_turnover, bins))] += r.no_of_shares;
  }
  return sums;
}

std::string figure3_csv(std::span<const YearlyAverage> series) {
  std::string out = "company,year,mean_turnover\n";
  for (const YearlyAverage& point : series) {
    out += csv::join_row(
        {point.company, std::to_string(point.year), csv::format_double(point.mean_turnover)});
  }
  return out;
}

namespace {

const char* const kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b"};

std::string svg_num(double v) { return csv::format_fixed(v, 2); }

void append_line(std::string& svg, double x1, double y1, double x2, double y2,
                 const char* stroke) {
  svg += "<line x1=\"" + svg_num(x1) + "\" y1=\"" + svg_num(y1) + "\" x2=\"" + svg_num(x2) +
         "\" y2=\"" + svg_num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
}

void append_text(std::string& svg, double x, double y, const std::string& text,
                 const char* anchor) {
  svg += "<text x=\"" + svg_num(x) + "\" y=\"" + svg_num(y) + "\" font-size=\"12\" " +
         "font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + text + "</text>\n";
}

}  // namespace

std::string figure3_svg(std::span<const YearlyAverage> series) {
  constexpr double kWidth = 860, kHeight = 480;
  constexpr double kLeft = 110, kRight = 680, kTop = 40, kBottom = 420;

  int year_lo = series.empty() ? 2000 : series.front().year;
  int year_hi = year_lo;
  double max_turnover = 1.0;
  std::vector<std::string> companies;
  for (const YearlyAverage& p : series) {
    year_lo = std::min(year_lo, p.year);
    year_hi = std::max(year_hi, p.year);
    max_turnover = std::max(max_turnover, p.mean_turnover);
    if (std::find(companies.begin(), companies.end(), p.company) == companies.end()) {
      companies.push_back(p.company);
    }
  }
  if (year_hi == year_lo) ++year_hi;  // avoid a zero-width x domain
  const double y_top_value = max_turnover * 1.05;

  auto x_of = [&](double year) {
    return kLeft + (year - year_lo) / static_cast<double>(year_hi - year_lo) * (kRight - kLeft);
  };
  auto y_of = [&](double v) { return kBottom - v / y_top_value * (kBottom - kTop); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(kWidth) +
                    "\" height=\"" + svg_num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append_text(svg, (kLeft + kRight) / 2, 22, "Average turnover by year", "middle");
  append_line(svg, kLeft, kBottom, kRight, kBottom, "black");
  append_line(svg, kLeft, kTop, kLeft, kBottom, "black");

  const int year_span = year_hi - year_lo;
  const int year_step = year_span > 12 ? (year_span + 11) / 12 : 1;
  for (int year = year_lo; year <= year_hi; year += year_step) {
    const double x = x_of(year);
    append_line(svg, x, kBottom, x, kBottom + 5, "black");
    append_text(svg, x, kBottom + 20, std::to_string(year), "middle");
  }
  for (int tick = 0; tick <= 5; ++tick) {
    const double value = y_top_value * tick / 5.0;
    const double y = y_of(value);
    append_line(svg, kLeft - 5, y, kLeft, y, "black");
    append_text(svg, kLeft - 8, y + 4, csv::format_fixed(value, 0), "end");
  }

  for (std::size_t ci = 0; ci < companies.size(); ++ci) {
    const char* color = kSeriesColors[ci % (sizeof(kSeriesColors) / sizeof(kSeriesColors[0]))];
    std::string points;
    for (const YearlyAverage& p : series) {
      if (p.company != companies[ci]) continue;
      if (!points.empty()) points += ' ';
      points += svg_num(x_of(p.year)) + "," + svg_num(y_of(p.mean_turnover));
      svg += "<circle cx=\"" + svg_num(x_of(p.year)) + "\" cy=\"" + svg_num(y_of(p.mean_turnover)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" " +
           "points=\"" + points + "\"/>\n";
    const double ly = kTop + 18.0 * static_cast<double>(ci);
    svg += "<rect x=\"" + svg_num(kRight + 20) + "\" y=\"" + svg_num(ly - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    append_text(svg, kRight + 38, ly + 2, companies[ci], "start");
  }
  svg += "</svg>\n";
  return svg;
}

std::string figure4_csv(const std::array<std::int64_t, kNumClasses>& sums) {
  std::string out = "class,sum_no_of_shares\n";
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    out += class_to_char(class_from_index(k));
    out += ',';
    out += std::to_string(sums[k]);
    out += '\n';
  }
  return out;
}

std::string figure4_svg(const std::array<std::int64_t, kNumClasses>& sums) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 110, kRight = 600, kTop = 40, kBottom = 360;

  double max_sum = 1.0;
  for (std::int64_t s : sums) max_sum = std::max(max_sum, static_cast<double>(s));
  const double y_top_value = max_sum * 1.05;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(kWidth) +
                    "\" height=\"" + svg_num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append_text(svg, (kLeft + kRight) / 2, 22, "Shares traded by turnover class", "middle");
  append_line(svg, kLeft, kBottom, kRight, kBottom, "black");
  append_line(svg, kLeft, kTop, kLeft, kBottom, "black");
  for (int tick = 0; tick <= 5; ++tick) {
    const double value = y_top_value * tick / 5.0;
    const double y = kBottom - value / y_top_value * (kBottom - kTop);
    append_line(svg, kLeft - 5, y, kLeft, y, "black");
    append_text(svg, kLeft - 8, y + 4, csv::format_fixed(value, 0), "end");
  }

  const double slot = (kRight - kLeft) / static_cast<double>(kNumClasses);
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double height = static_cast<double>(sums[k]) / y_top_value * (kBottom - kTop);
    const double x = kLeft + slot * static_cast<double>(k) + slot * 0.2;
    const double w = slot * 0.6;
    svg += "<rect x=\"" + svg_num(x) + "\" y=\"" + svg_num(kBottom - height) + "\" width=\"" +
           svg_num(w) + "\" height=\"" + svg_num(height) + "\" fill=\"#4472c4\"/>\n";
    append_text(svg, x + w / 2, kBottom + 18, std::string(1, class_to_char(class_from_index(k))),
                "middle");
    append_text(svg, x + w / 2, kBottom - height - 6, std::to_string(sums[k]), "middle");
  }
  svg += "</svg>\n";
  return svg;
}

namespace {

// Proleptic Gregorian date for a day count since 1970-01-01; inverse of
// Date::ordinal.
Date date_from_ordinal(std::int64_t days) {
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t day = doy - (153 * mp + 2) / 5 + 1;
  const std::int64_t month = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (month <= 2 ? 1 : 0)), static_cast<int>(month),
              static_cast<int>(day)};
}

const char* const kSyntheticCompanies[] = {"ACME_PHARMA", "BETA_TEXTILES", "CREST_BANK",
                                           "DELTA_TYRES"};

// Exponents of the monotone informative transforms, cycled per feature.
constexpr double kTransformPowers[] = {1.0, 2.0, 0.5, 3.0, 1.0 / 3.0};

constexpr std::size_t kLatentLevels = 32;

std::string padded_name(const char* prefix, std::size_t i) {
  std::string n = std::to_string(i + 1);
  if (n.size() < 2) n.insert(n.begin(), '0');
  return std::string(prefix) + "_" + n;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_rows < 1) throw std::invalid_argument("n_rows must be at least 1");
  if (spec.n_informative < 1) throw std::invalid_argument("n_informative must be at least 1");
  if (!(spec.noise_level >= 0.0 && spec.noise_level < 1.0)) {
    throw std::invalid_argument("noise_level outside [0, 1)");
  }

  const TurnoverBins bins = TurnoverBins::default_bins();
  const double log_lo = std::log(bins.interval(TurnoverClass::A).lo);
  const double log_hi = std::log(bins.interval(TurnoverClass::E).hi);

  SyntheticData out;
  out.records.reserve(spec.n_rows);
  for (std::size_t j = 0; j < spec.n_informative; ++j) {
    out.dataset.feature_names.push_back(padded_name("inf", j));
  }
  for (std::size_t j = 0; j < spec.n_noise; ++j) {
    out.dataset.feature_names.push_back(padded_name("noise", j));
  }
  out.dataset.values.reserve(spec.n_rows * out.dataset.feature_names.size());

  const std::int64_t date0 = Date{2005, 1, 1}.ordinal();
  Rng rng(spec.seed);
  std::vector<double> row(out.dataset.feature_names.size());

  for (std::size_t i = 0; i < spec.n_rows; ++i) {
    const std::size_t cls = rng.uniform_index(kNumClasses);
    const std::size_t level = rng.uniform_index(kLatentLevels);
    const auto& band = bins.interval(class_from_index(cls));
    const double band_pos = (static_cast<double>(level) + 0.5) / kLatentLevels;
    double v = std::exp(std::log(band.lo) + band_pos * (std::log(band.hi) - std::log(band.lo)));
    v = std::clamp(v, band.lo, band.hi);
    const double u = (std::log(v) - log_lo) / (log_hi - log_lo);

    for (std::size_t j = 0; j < spec.n_informative; ++j) {
      const double t = std::pow(u, kTransformPowers[j % 5]);
      const double scale = std::pow(10.0, static_cast<double>(j % 5) - 2.0);
      const double noise = rng.normal();  // always drawn, keeps the stream aligned
      row[j] = 2.0 * static_cast<double>(j) + scale * (t + spec.noise_level * 0.1 * noise);
    }
    for (std::size_t j = 0; j < spec.n_noise; ++j) {
      row[spec.n_informative + j] = rng.normal();
    }
    out.dataset.append_row(row, discretize_turnover(v, bins));

    StockRecord r;
    r.date = date_from_ordinal(date0 + static_cast<std::int64_t>(i));
    r.company = kSyntheticCompanies[i % 4];
    const double price = 40.0 + 460.0 * u;
    r.high_price = price * (1.01 + 0.02 * std::fabs(rng.normal()));
    r.low_price = price * std::max(0.05, 0.99 - 0.02 * std::fabs(rng.normal()));
    r.open_price = rng.uniform_real(r.low_price, r.high_price);
    r.close_price = rng.uniform_real(r.low_price, r.high_price);
    r.wap = rng.uniform_real(r.low_price, r.high_price);
    r.no_of_shares = std::max<std::int64_t>(1, std::llround(v / r.wap));
    r.no_of_trades = std::max<std::int64_t>(1, r.no_of_shares / 50);
    r.deliverable_quantity = std::clamp<std::int64_t>(
        std::llround(static_cast<double>(r.no_of_shares) * (0.3 + 0.4 * rng.uniform_real())),
        0, r.no_of_shares);
    r.spread_high_low = r.high_price - r.low_price;
    r.spread_close_open = r.close_price - r.open_price;
    r.total_turnover = v;
    out.records.push_back(std::move(r));
  }
  out.dataset.check_invariants();
  return out;
}

}  // namespace turnover
