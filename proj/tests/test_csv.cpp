#include <doctest.h>

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "turnover/csv.hpp"
#include "turnover/rng.hpp"

using namespace turnover;

namespace {

double reparse(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("format_double round trips exactly") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    double v;
    switch (i % 4) {
      case 0: v = rng.uniform_real(-1e9, 1e9); break;
      case 1: v = rng.normal() * 1e-6; break;
      case 2: v = std::ldexp(rng.uniform_real(), static_cast<int>(rng.uniform_index(600)) - 300); break;
      default: v = static_cast<double>(rng.uniform_index(1000000)); break;
    }
    const std::string s = csv::format_double(v);
    CHECK(reparse(s) == v);
  }
  CHECK(csv::format_double(0.0) == "0");
  CHECK(csv::format_double(2.0) == "2");
  CHECK(csv::format_double(0.1) == "0.1");
}

TEST_CASE("format_fixed") {
  CHECK(csv::format_fixed(3.14159, 2) == "3.14");
  CHECK(csv::format_fixed(95.0, 2) == "95.00");
  CHECK(csv::format_fixed(0.0015, 3) == "0.002");
}

TEST_CASE("field escaping and parsing round trip") {
  const std::vector<std::vector<std::string>> table = {
      {"plain", "with,comma", "with\"quote"},
      {"multi\nline", "", "trailing space "},
      {"1,000,000", "a\"\"b", "end"},
  };
  std::string text;
  for (const auto& row : table) text += csv::join_row(row);
  CHECK(csv::parse_text(text) == table);
}

TEST_CASE("parse_text handles CRLF, BOM and quoted newlines") {
  const std::string text = "\xEF\xBB\xBFx,y\r\n\"a\r\nb\",2\r\n";
  const auto grid = csv::parse_text(text);
  REQUIRE(grid.size() == 2);
  CHECK(grid[0] == std::vector<std::string>{"x", "y"});
  CHECK(grid[1][0] == "a\r\nb");
  CHECK(grid[1][1] == "2");
}

TEST_CASE("parse_text skips blank lines") {
  CHECK(csv::parse_text("").empty());
  CHECK(csv::parse_text("\n").empty());
  CHECK(csv::parse_text("a\n\nb\n").size() == 2);
}
