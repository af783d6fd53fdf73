#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace turnover::csv {

// Shortest decimal string that round-trips to the same double. Integral
// values print without a trailing ".0" marker (std::to_chars general form),
// so re-reading a written file reproduces bit-identical values.
std::string format_double(double v);

std::string format_fixed(double v, int decimals);

// One CSV field, quoted only when it contains a delimiter, quote or newline.
std::string escape_field(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// RFC-4180-ish parse: comma delimiter, optional double-quoted fields with
// "" escapes, \r\n or \n line endings, quoted fields may span lines.
// A UTF-8 BOM at the start of the text is dropped.
std::vector<std::vector<std::string>> parse_text(std::string_view text);

}  // namespace turnover::csv
