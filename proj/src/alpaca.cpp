#include "velvet/alpaca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "velvet/error.hpp"
#include "velvet/io.hpp"
#include "velvet/text.hpp"

namespace velvet {

using nlohmann::ordered_json;

namespace {

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string_view::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

struct ApiDose {
  std::string name;
  double dose;
};

std::vector<ApiDose> resolve_apis(const Formulation& f, const std::vector<std::string>& api_names) {
  if (api_names.empty()) throw DomainError(fmt::format("formulation {}: no API named", f.id));
  std::vector<ApiDose> out;
  for (const auto& name : api_names) {
    const Component* c = f.find(name);
    if (!c) throw DomainError(fmt::format("formulation {}: API '{}' not in composition", f.id, name));
    out.push_back({c->ingredient.name, c->proportion});
  }
  return out;
}

std::vector<const Component*> excipients_of(const Formulation& f,
                                            const std::vector<std::string>& api_names,
                                            ExcipientOrder order) {
  std::unordered_set<std::string> api_keys;
  for (const auto& a : api_names) api_keys.insert(normalize_text(a));
  std::vector<const Component*> out;
  for (const auto& c : f.composition)
    if (!api_keys.count(c.ingredient.key)) out.push_back(&c);
  if (out.empty()) throw DomainError(fmt::format("formulation {}: no excipients", f.id));
  if (order == ExcipientOrder::Lexicographic)
    std::stable_sort(out.begin(), out.end(), [](const Component* a, const Component* b) {
      return a->ingredient.name < b->ingredient.name;
    });
  return out;
}

std::string render_instruction(const std::string& pattern, const std::vector<ApiDose>& apis) {
  const auto dose_at = pattern.find("{dose}");
  const auto api_at = pattern.find("{api}");
  const auto clause_begin = std::min(dose_at, api_at);
  const auto clause_end = std::max(dose_at + 6, api_at + 5);
  const std::string clause = pattern.substr(clause_begin, clause_end - clause_begin);

  std::string joined;
  for (std::size_t i = 0; i < apis.size(); ++i) {
    if (i) joined += " and ";
    std::string one = clause;
    one.replace(one.find("{dose}"), 6, format_decimal(apis[i].dose));
    one.replace(one.find("{api}"), 5, apis[i].name);
    joined += one;
  }
  return pattern.substr(0, clause_begin) + joined + pattern.substr(clause_end);
}

const char* printability_phrase(Printability p) {
  switch (p) {
    case Printability::Yes: return "printable";
    case Printability::No: return "not printable";
    case Printability::Unknown: return "of unknown printability";
  }
  return "of unknown printability";
}

std::string require_string(const ordered_json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(fmt::format("line {}: missing key \"{}\"", line, key), line);
  if (!it->is_string())
    throw ParseError(fmt::format("line {}: key \"{}\" is not a string", line, key), line);
  return it->get<std::string>();
}

// Bounded draw from a fixed-algorithm engine; std distributions differ
// between standard libraries and would make splits platform-dependent.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

void PromptTemplates::check() const {
  if (count_occurrences(instruction_pattern, "{dose}") != 1 ||
      count_occurrences(instruction_pattern, "{api}") != 1)
    throw DomainError("instruction_pattern must contain {dose} and {api} exactly once each");
}

PromptTemplates templates_from_json_text(std::string_view text) {
  PromptTemplates t;
  try {
    const auto j = ordered_json::parse(text);
    t.system_instruction = j.value("system_instruction", t.system_instruction);
    t.instruction_pattern = j.value("instruction_pattern", t.instruction_pattern);
    t.eos_token = j.value("eos_token", t.eos_token);
    const auto style = j.value("input_style", std::string("instruction"));
    if (style == "instruction") t.input_style = InputStyle::InInstruction;
    else if (style == "separate") t.input_style = InputStyle::SeparateInput;
    else throw DomainError("input_style must be \"instruction\" or \"separate\"");
    const auto order = j.value("excipient_order", std::string("lexicographic"));
    if (order == "lexicographic") t.excipient_order = ExcipientOrder::Lexicographic;
    else if (order == "column") t.excipient_order = ExcipientOrder::Column;
    else throw DomainError("excipient_order must be \"lexicographic\" or \"column\"");
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("bad templates file: ") + e.what());
  }
  t.check();
  return t;
}

PromptTemplates load_templates(const std::string& path) {
  return templates_from_json_text(read_file(path));
}

std::string render_response(const Formulation& f, const std::vector<std::string>& api_names,
                            const PromptTemplates& templates) {
  const auto excipients = excipients_of(f, api_names, templates.excipient_order);
  std::string out = "For this formulation, use these excipients: ";
  for (std::size_t i = 0; i < excipients.size(); ++i) {
    if (i) out += ", ";
    out += excipients[i]->ingredient.name;
    out += ": ";
    out += format_decimal(excipients[i]->proportion);
    out += " w/w%";
  }
  out += ". This is ";
  out += printability_phrase(f.printable);
  out += " and has a ";
  out += f.aspect_text();
  out += " filament aspect.";
  return out;
}

InstructionPair formulation_to_pair(const Formulation& f, const std::vector<std::string>& api_names,
                                    const PromptTemplates& templates) {
  templates.check();
  const auto apis = resolve_apis(f, api_names);
  InstructionPair pair;
  pair.response = render_response(f, api_names, templates) + templates.eos_token;
  if (templates.input_style == InputStyle::InInstruction) {
    pair.instruction = render_instruction(templates.instruction_pattern, apis);
  } else {
    pair.instruction = templates.system_instruction;
    for (std::size_t i = 0; i < apis.size(); ++i) {
      if (i) pair.input += ", ";
      pair.input += apis[i].name + ": " + format_decimal(apis[i].dose) + " w/w%";
    }
  }
  return pair;
}

InstructionPair formulation_to_pair(const Formulation& f, const std::string& api_name,
                                    const PromptTemplates& templates) {
  return formulation_to_pair(f, std::vector<std::string>{api_name}, templates);
}

InstructionPair formulation_to_pair(const Formulation& f, const PromptTemplates& templates) {
  std::vector<std::string> apis;
  for (const auto* c : f.of_kind(IngredientKind::Api)) apis.push_back(c->ingredient.name);
  return formulation_to_pair(f, apis, templates);
}

std::vector<std::size_t> holdout_indices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.test_fraction >= 0.0 && spec.test_fraction <= 1.0))
    throw DomainError("test fraction must lie in [0, 1]");
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
  order.resize(n_test);
  std::sort(order.begin(), order.end());
  return order;
}

Split split_holdout(const std::vector<Formulation>& dataset, const SplitSpec& spec) {
  const auto test_idx = holdout_indices(dataset.size(), spec);
  Split out;
  std::size_t t = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (t < test_idx.size() && test_idx[t] == i) {
      out.test.push_back(dataset[i]);
      ++t;
    } else {
      out.train.push_back(dataset[i]);
    }
  }
  return out;
}

std::string write_jsonl(const std::vector<InstructionPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    ordered_json j;
    j["instruction"] = p.instruction;
    j["input"] = p.input;
    j["response"] = p.response;
    out += j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::vector<InstructionPair>& pairs, const std::string& path) {
  write_file(path, write_jsonl(pairs));
}

std::vector<InstructionPair> read_jsonl_text(std::string_view text) {
  std::vector<InstructionPair> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::exception& e) {
      throw ParseError(fmt::format("line {}: malformed JSON ({})", line_no, e.what()), line_no);
    }
    if (!j.is_object()) throw ParseError(fmt::format("line {}: not a JSON object", line_no), line_no);
    InstructionPair p;
    p.instruction = require_string(j, "instruction", line_no);
    p.input = require_string(j, "input", line_no);
    p.response = require_string(j, "response", line_no);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<InstructionPair> read_jsonl(const std::string& path) {
  return read_jsonl_text(read_file(path));
}

}  // namespace velvet
