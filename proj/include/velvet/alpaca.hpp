#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "velvet/formulation.hpp"

namespace velvet {

enum class InputStyle {
  InInstruction,  // full request in "instruction", empty "input"
  SeparateInput,  // system instruction + "Input: {api}: {dose} w/w%"
};

enum class ExcipientOrder {
  Lexicographic,  // byte-wise by display name
  Column,         // order of the composition (schema column order)
};

struct PromptTemplates {
  std::string system_instruction =
      "Given a drug and its quantity, suggest suitable excipients with their quantities, "
      "and indicate printability and filament aspect.";
  std::string instruction_pattern = "Recommend excipients for {dose} w/w% {api}";
  std::string eos_token;
  InputStyle input_style = InputStyle::InInstruction;
  ExcipientOrder excipient_order = ExcipientOrder::Lexicographic;

  /// Throws DomainError unless the pattern has exactly one {dose} and one {api}.
  void check() const;
};

PromptTemplates templates_from_json_text(std::string_view text);
PromptTemplates load_templates(const std::string& path);

struct InstructionPair {
  std::string instruction;
  std::string input;
  std::string response;

  bool operator==(const InstructionPair&) const = default;
};

/// Renders one pair for the named APIs (several APIs share one response).
/// Throws DomainError when an API is absent or no excipient remains.
InstructionPair formulation_to_pair(const Formulation& f, const std::vector<std::string>& api_names,
                                    const PromptTemplates& templates = {});
InstructionPair formulation_to_pair(const Formulation& f, const std::string& api_name,
                                    const PromptTemplates& templates = {});
/// Uses every component of kind Api.
InstructionPair formulation_to_pair(const Formulation& f, const PromptTemplates& templates = {});

/// The response text alone: intro, excipient list, printability/aspect sentence.
std::string render_response(const Formulation& f, const std::vector<std::string>& api_names,
                            const PromptTemplates& templates = {});

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
};

struct Split {
  std::vector<Formulation> train;
  std::vector<Formulation> test;
};

/// |test| = round(fraction * N); both halves keep dataset order.
Split split_holdout(const std::vector<Formulation>& dataset, const SplitSpec& spec);

/// Indices chosen for the test half, ascending.
std::vector<std::size_t> holdout_indices(std::size_t n, const SplitSpec& spec);

std::string write_jsonl(const std::vector<InstructionPair>& pairs);
void write_jsonl(const std::vector<InstructionPair>& pairs, const std::string& path);
std::vector<InstructionPair> read_jsonl_text(std::string_view text);
std::vector<InstructionPair> read_jsonl(const std::string& path);

}  // namespace velvet
