#include "velvet/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace velvet {

namespace {

constexpr std::size_t kMaxAspectSlot = 40;

struct Match {
  std::size_t begin;
  std::size_t end;
  Span slot;  // aspect word(s)
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool starts_with_icase(std::string_view s, std::size_t at, std::string_view prefix) {
  return at + prefix.size() <= s.size() && iequals(s.substr(at, prefix.size()), prefix);
}

// "has a <slot> filament aspect" / "has an <slot> filament aspect" starting at `at`.
std::optional<Match> match_aspect_clause(std::string_view s, std::size_t at) {
  if (!starts_with_icase(s, at, "has a")) return std::nullopt;
  std::size_t p = at + 5;
  if (p + 1 < s.size() && (s[p] == 'n' || s[p] == 'N') && is_space(s[p + 1])) ++p;
  if (p >= s.size() || !is_space(s[p])) return std::nullopt;
  while (p < s.size() && is_space(s[p])) ++p;
  const std::size_t slot_begin = p;
  const std::size_t limit = std::min(s.size(), slot_begin + kMaxAspectSlot);
  for (std::size_t q = slot_begin; q < limit; ++q) {
    const char c = s[q];
    if (c == '.' || c == ',' || c == '\n') break;
    if (is_space(c) && q > slot_begin && starts_with_icase(s, q + 1, "filament aspect")) {
      std::size_t end = q + 1 + 15;
      if (end < s.size() && s[end] == '.') ++end;
      return Match{at, end, {slot_begin, q}};
    }
  }
  return std::nullopt;
}

std::optional<Match> find_aspect_clause(std::string_view s, std::size_t from) {
  for (std::size_t p = find_icase(s, "has a", from); p != std::string_view::npos;
       p = find_icase(s, "has a", p + 1)) {
    if (auto m = match_aspect_clause(s, p)) return m;
  }
  return std::nullopt;
}

// "this is {printable|not printable|of unknown printability} and <aspect clause>"
std::optional<Match> find_closing(std::string_view s, std::size_t from) {
  static constexpr std::string_view kStates[] = {"not printable", "printable",
                                                 "of unknown printability"};
  for (std::size_t p = find_icase(s, "this is ", from); p != std::string_view::npos;
       p = find_icase(s, "this is ", p + 1)) {
    std::size_t q = p + 8;
    for (std::string_view state : kStates) {
      if (!starts_with_icase(s, q, state)) continue;
      const std::size_t r = q + state.size();
      if (!starts_with_icase(s, r, " and ")) continue;
      if (auto m = match_aspect_clause(s, r + 5)) return Match{p, m->end, m->slot};
    }
  }
  return std::nullopt;
}

bool has_escape_or_non_ascii(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<unsigned char>(s[i]) >= 0x80) return true;
    if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 'u' || s[i + 1] == 'U') &&
        i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 2])))
      return true;
  }
  return false;
}

Span trimmed(std::string_view s, Span span) {
  while (span.begin < span.end && is_space(s[span.begin])) ++span.begin;
  while (span.end > span.begin && is_space(s[span.end - 1])) --span.end;
  return span;
}

std::string_view view(std::string_view s, Span span) {
  return s.substr(span.begin, span.end - span.begin);
}

}  // namespace

const char* to_string(Unit unit) {
  switch (unit) {
    case Unit::WwPct: return "w/w%";
    case Unit::Other: return "other";
    case Unit::None: return "none";
  }
  return "none";
}

const char* to_string(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::NoProportion: return "NO_PROPORTION";
    case DiagnosticCode::UnitMismatch: return "UNIT_MISMATCH";
    case DiagnosticCode::DuplicateIngredient: return "DUPLICATE_INGREDIENT";
    case DiagnosticCode::EmptyName: return "EMPTY_NAME";
    case DiagnosticCode::UnknownAspect: return "UNKNOWN_ASPECT";
    case DiagnosticCode::NonAsciiTail: return "NON_ASCII_TAIL";
    case DiagnosticCode::TrailingText: return "TRAILING_TEXT";
    case DiagnosticCode::EmptyParse: return "EMPTY_PARSE";
  }
  return "?";
}

bool ParsedResponse::has(DiagnosticCode code) const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [code](const Diagnostic& d) { return d.code == code; });
}

std::vector<std::string> ParsedResponse::distinct_keys() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& e : excipients)
    if (seen.insert(e.key).second) out.push_back(e.key);
  return out;
}

std::string strip_template_phrases(std::string_view input) {
  std::string s(input);
  for (bool changed = true; changed;) {
    changed = false;
    if (auto p = find_icase(s, kIntroPhrase); p != std::string::npos) {
      s.erase(p, kIntroPhrase.size());
      changed = true;
    }
    if (auto m = find_closing(s, 0)) {
      s.erase(m->begin, m->end - m->begin);
      changed = true;
    }
  }
  return std::string(trim(s));
}

ParsedResponse parse_response(std::string_view s) {
  ParsedResponse out;

  if (find_icase(s, "is not printable") != std::string_view::npos)
    out.printable = Printability::No;
  else if (find_icase(s, "is printable") != std::string_view::npos)
    out.printable = Printability::Yes;

  if (auto clause = find_aspect_clause(s, 0)) {
    if (auto a = parse_aspect(view(s, clause->slot)))
      out.aspect = *a;
    else
      out.diagnostics.push_back({DiagnosticCode::UnknownAspect, clause->slot});
  }

  const std::size_t intro = find_icase(s, kIntroPhrase);
  const bool anchored = intro != std::string_view::npos;
  const std::size_t section_begin = anchored ? intro + kIntroPhrase.size() : 0;
  std::size_t section_end = s.size();
  if (auto closing = find_closing(s, section_begin)) {
    section_end = closing->begin;
    const Span tail = trimmed(s, {closing->end, s.size()});
    if (tail.end > tail.begin)
      out.diagnostics.push_back({has_escape_or_non_ascii(view(s, tail))
                                     ? DiagnosticCode::NonAsciiTail
                                     : DiagnosticCode::TrailingText,
                                 tail});
  }

  std::vector<Diagnostic> entry_diags;
  std::size_t seg_begin = section_begin;
  while (seg_begin <= section_end) {
    std::size_t seg_end = s.find(',', seg_begin);
    if (seg_end == std::string_view::npos || seg_end > section_end) seg_end = section_end;
    Span seg = trimmed(s, {seg_begin, seg_end});
    while (seg.end > seg.begin && s[seg.end - 1] == '.') --seg.end;
    seg = trimmed(s, seg);
    seg_begin = seg_end + 1;
    if (seg.end == seg.begin) continue;

    const std::string_view text = view(s, seg);
    ParsedExcipient e;
    e.span = seg;
    const std::size_t colon = text.rfind(':');
    if (colon == std::string_view::npos) {
      e.name = std::string(trim(text));
      entry_diags.push_back({DiagnosticCode::NoProportion, seg});
    } else {
      e.name = std::string(trim(text.substr(0, colon)));
      const std::string_view value = trim(text.substr(colon + 1));
      const auto lead = parse_leading_decimal(value);
      if (lead) e.proportion = lead->value;
      else entry_diags.push_back({DiagnosticCode::NoProportion, seg});

      std::string compact;
      for (char c : value.substr(lead ? lead->length : 0))
        if (!is_space(c)) compact.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      if (compact.find("w/w%") != std::string::npos) {
        e.unit = Unit::WwPct;
      } else if (lead && !compact.empty()) {
        e.unit = Unit::Other;
        entry_diags.push_back({DiagnosticCode::UnitMismatch, seg});
      }
    }
    e.key = normalize_text(e.name);
    if (e.key.empty()) {
      entry_diags.push_back({DiagnosticCode::EmptyName, seg});
      continue;
    }
    out.excipients.push_back(std::move(e));
  }

  const bool any_proportion = std::any_of(out.excipients.begin(), out.excipients.end(),
                                          [](const auto& e) { return e.proportion.has_value(); });
  if (!anchored && !any_proportion) {
    // No structure to hang the segments on; the text is not a formulation.
    out.excipients.clear();
    entry_diags.clear();
  }

  std::unordered_set<std::string> seen;
  for (const auto& e : out.excipients)
    if (!seen.insert(e.key).second)
      entry_diags.push_back({DiagnosticCode::DuplicateIngredient, e.span});

  out.diagnostics.insert(out.diagnostics.end(), entry_diags.begin(), entry_diags.end());
  if (out.excipients.empty())
    out.diagnostics.push_back({DiagnosticCode::EmptyParse, {0, s.size()}});
  return out;
}

}  // namespace velvet
