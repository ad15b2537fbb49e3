#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "velvet/formulation.hpp"
#include "velvet/text.hpp"

namespace velvet {

inline constexpr std::string_view kIntroPhrase = "For this formulation, use these excipients:";

enum class Unit { WwPct, Other, None };

const char* to_string(Unit unit);

enum class DiagnosticCode {
  NoProportion,
  UnitMismatch,
  DuplicateIngredient,
  EmptyName,
  UnknownAspect,
  NonAsciiTail,
  TrailingText,
  EmptyParse,
};

const char* to_string(DiagnosticCode code);

/// Byte range [begin, end) into the parsed text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Diagnostic {
  DiagnosticCode code;
  Span span;
};

struct ParsedExcipient {
  std::string name;
  std::string key;  // normalize_text(name)
  std::optional<double> proportion;
  Unit unit = Unit::None;
  Span span;
};

struct ParsedResponse {
  std::vector<ParsedExcipient> excipients;
  Printability printable = Printability::Unknown;
  FilamentAspect aspect = FilamentAspect::Unknown;
  std::vector<Diagnostic> diagnostics;

  bool has(DiagnosticCode code) const;
  /// Distinct normalized names in first-seen order.
  std::vector<std::string> distinct_keys() const;
};

/// Case-insensitive removal of the intro phrase and of the closing
/// "this is ... printable and has a ... filament aspect" sentence, applied
/// until nothing more matches; result is trimmed. Idempotent.
std::string strip_template_phrases(std::string_view s);

/// Total: never throws, every anomaly becomes a diagnostic.
ParsedResponse parse_response(std::string_view s);

}  // namespace velvet
