#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace velvet {

/// Canonical join key for ingredient names: ASCII-lowercased, every maximal
/// run of bytes outside [A-Za-z0-9] collapsed to one space, ends trimmed.
/// Non-ASCII bytes count as separators, so the result only ever contains
/// [a-z0-9 ].
std::string normalize_text(std::string_view s);

std::string ascii_lower(std::string_view s);

std::string_view trim(std::string_view s);

/// Case-insensitive (ASCII) substring search starting at `from`.
std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from = 0);

bool iequals(std::string_view a, std::string_view b);

/// Shortest decimal that parses back to exactly `value`, without exponent
/// and without a trailing ".0" (20.0 -> "20", 12.5 -> "12.5").
std::string format_decimal(double value);

/// Parses an unsigned decimal ("12", "12.5", ".5") at the start of `s`.
/// Returns the value and the number of bytes consumed.
struct LeadingDecimal {
  double value;
  std::size_t length;
};
std::optional<LeadingDecimal> parse_leading_decimal(std::string_view s);

/// Strict full-string number parse (leading/trailing blanks allowed).
std::optional<double> parse_number(std::string_view s);

}  // namespace velvet
