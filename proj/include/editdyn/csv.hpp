#pragma once

// Minimal RFC 4180 reader/writer shared by every table the toolkit emits.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace editdyn::csv {

struct Row {
  std::size_t line = 0;  // 1-based source line of the row start
  std::vector<std::string> fields;
};

// Parses quoted fields with embedded commas, quotes and newlines. Blank lines
// are skipped; lines starting with '#' are returned in `comments` when given.
std::vector<Row> parse(std::string_view text, std::vector<std::string>* comments = nullptr);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

// Fixed-point rendering used for every real-valued column.
std::string real(double value, int precision = 6);

inline constexpr std::string_view kSchemaLine = "# edit-dynamics v1";

}  // namespace editdyn::csv
