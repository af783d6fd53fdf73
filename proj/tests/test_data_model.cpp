#include <doctest.h>

#include <cstdint>
#include <stdexcept>

#include "turnover/data_model.hpp"
#include "turnover/rng.hpp"

using namespace turnover;

namespace {

StockRecord consistent_record() {
  StockRecord r;
  r.date = {2015, 3, 2};
  r.company = "APOLLO TYRE";
  r.open_price = 100.0;
  r.high_price = 110.0;
  r.low_price = 95.0;
  r.close_price = 105.0;
  r.wap = 103.0;
  r.no_of_shares = 1000;
  r.no_of_trades = 40;
  r.deliverable_quantity = 700;
  r.spread_high_low = 15.0;
  r.spread_close_open = 5.0;
  r.total_turnover = 103000.0;
  return r;
}

}  // namespace

TEST_CASE("class letters and indices round trip") {
  const char letters[] = {'A', 'B', 'C', 'D', 'E'};
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const TurnoverClass c = class_from_index(k);
    CHECK(class_to_char(c) == letters[k]);
    CHECK(class_from_char(letters[k]) == c);
    CHECK(class_index(c) == k);
  }
  CHECK_THROWS_AS(class_from_char('F'), std::invalid_argument);
  CHECK_THROWS_AS(class_from_index(5), std::invalid_argument);
}

TEST_CASE("argmax_class breaks ties toward the lower class") {
  CHECK(argmax_class({0, 3, 3, 0, 0}) == TurnoverClass::B);
  CHECK(argmax_class({1, 1, 1, 1, 1}) == TurnoverClass::A);
  CHECK(argmax_class({0, 0, 0, 0, 2}) == TurnoverClass::E);
}

TEST_CASE("discretization hits every documented boundary") {
  const TurnoverBins bins = TurnoverBins::default_bins();
  struct Case {
    double value;
    TurnoverClass expected;
  };
  const Case cases[] = {
      {58320.0, TurnoverClass::A},          // lowest bound of A
      {0.0, TurnoverClass::A},              // below every bin
      {18291986.0, TurnoverClass::A},       // top of A
      {18296597.0, TurnoverClass::B},       // bottom of B
      {18294291.0, TurnoverClass::A},       // in the A-B gap, nearer A
      {18294292.0, TurnoverClass::B},       // in the A-B gap, nearer B
      {18294291.5, TurnoverClass::A},       // gap midpoint, tie goes down
      {37731606.0, TurnoverClass::B},       // top of B
      {121233543.0, TurnoverClass::C},      // top of C
      {300360881.0, TurnoverClass::D},      // top of D
      {19085311470.0, TurnoverClass::E},    // top of E
      {19085311471.0, TurnoverClass::E},    // above every bin
  };
  for (const Case& c : cases) CHECK(discretize_turnover(c.value, bins) == c.expected);
  CHECK_THROWS_AS(discretize_turnover(-1.0, bins), std::domain_error);
}

TEST_CASE("discretization is monotone") {
  const TurnoverBins bins = TurnoverBins::default_bins();
  Rng rng(7);
  double prev_value = 0.0;
  TurnoverClass prev = discretize_turnover(0.0, bins);
  for (int i = 0; i < 10000; ++i) {
    const double value = prev_value + rng.uniform_real(0.0, 4e6);
    const TurnoverClass c = discretize_turnover(value, bins);
    CHECK(class_index(c) >= class_index(prev));
    prev_value = value;
    prev = c;
  }
}

TEST_CASE("bins constructor rejects overlapping intervals") {
  CHECK_THROWS_AS(TurnoverBins({{{0.0, 10.0}, {5.0, 20.0}, {21.0, 30.0}, {31.0, 40.0}, {41.0, 50.0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TurnoverBins({{{10.0, 0.0}, {11.0, 20.0}, {21.0, 30.0}, {31.0, 40.0}, {41.0, 50.0}}}),
                  std::invalid_argument);
}

TEST_CASE("record validation flags each rule") {
  CHECK(validate_record(consistent_record()).empty());

  StockRecord r = consistent_record();
  r.low_price = 120.0;
  CHECK(!validate_record(r).empty());

  r = consistent_record();
  r.wap = 94.0;
  CHECK(validate_record(r).size() == 1);

  r = consistent_record();
  r.spread_high_low = 15.1;
  CHECK(validate_record(r).size() == 1);

  r = consistent_record();
  r.deliverable_quantity = 1001;
  CHECK(validate_record(r).size() == 1);

  r = consistent_record();
  r.no_of_trades = -1;
  CHECK(validate_record(r).size() == 1);

  r = consistent_record();
  r.total_turnover = -5.0;
  CHECK(validate_record(r).size() == 1);
}

TEST_CASE("dataset row selection and invariants") {
  LabeledDataset d;
  d.feature_names = {"x", "y"};
  d.append_row(std::vector<double>{1.0, 2.0}, TurnoverClass::A);
  d.append_row(std::vector<double>{3.0, 4.0}, TurnoverClass::B);
  d.append_row(std::vector<double>{5.0, 6.0}, TurnoverClass::B);
  d.check_invariants();

  const std::size_t rows[] = {2, 0};
  const LabeledDataset sub = d.select_rows(rows);
  CHECK(sub.n_rows() == 2);
  CHECK(sub.at(0, 0) == 5.0);
  CHECK(sub.at(1, 1) == 2.0);
  CHECK(sub.labels[0] == TurnoverClass::B);

  const std::size_t cols[] = {1};
  const LabeledDataset narrow = d.select_features(cols);
  CHECK(narrow.feature_names == std::vector<std::string>{"y"});
  CHECK(narrow.at(2, 0) == 6.0);

  const ClassHistogram h = d.label_histogram();
  CHECK(h[0] == 1);
  CHECK(h[1] == 2);

  CHECK_THROWS_AS(d.append_row(std::vector<double>{1.0}, TurnoverClass::A),
                  std::invalid_argument);
}

TEST_CASE("date ordinal matches known anchors") {
  CHECK(Date{1970, 1, 1}.ordinal() == 0);
  CHECK(Date{1970, 1, 2}.ordinal() == 1);
  CHECK(Date{2000, 3, 1}.ordinal() == 11017);
  CHECK(Date{2015, 1, 30}.iso() == "2015-01-30");
  CHECK(Date{2015, 1, 30} < Date{2015, 2, 1});
}
