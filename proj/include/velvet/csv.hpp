#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace velvet::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

/// RFC-4180 reader: quoted fields, doubled quotes, embedded newlines,
/// CRLF or LF terminators. A UTF-8 BOM is skipped. Blank lines are dropped.
/// Throws ParseError on an unterminated quote.
std::vector<Record> parse(std::string_view text);

std::string escape(std::string_view field);

void append_row(std::string& out, const std::vector<std::string>& fields);

}  // namespace velvet::csv
