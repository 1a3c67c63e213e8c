#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace featpipe::csv {

using Row = std::vector<std::string>;

// Splits one RFC 4180 line (no embedded newlines).
Row split_line(std::string_view line);

// Quotes a field only when it contains a comma, quote or whitespace edge.
std::string escape(std::string_view field);

std::string join(const Row& fields);

struct Table {
  Row header;
  std::vector<Row> rows;
  // 1-based file line of each row, for error messages.
  std::vector<std::size_t> line_numbers;
};

// Reads a CSV file with a header line. Blank lines are skipped; a trailing
// '\r' is tolerated. Throws DataError when the file cannot be opened.
Table read_file(const std::filesystem::path& path);

// Shortest decimal text that parses back to exactly `v`.
std::string format_float(float v);
std::string format_double(double v);

double parse_double(std::string_view text, std::string_view what);

}  // namespace featpipe::csv
