#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "velvet/alpaca.hpp"
#include "velvet/predictions.hpp"

namespace velvet {

/// Sampling controls. Construct through normalize_params() so the
/// do-sample rule always holds.
struct GenerationParams {
  double temperature = 0.7;
  double top_p = 0.9;
  bool do_sample = true;
  int max_new_tokens = 256;
};

/// Range-checks temperature in [0, 2] and top-p in [0, 1]; do_sample is
/// false exactly when either is zero.
GenerationParams normalize_params(double temperature, double top_p, int max_new_tokens = 256);

struct EndpointConfig {
  std::string url = "http://127.0.0.1:8080/v1/completions";
  std::string model;
  std::string auth_env;  // environment variable holding a bearer token; empty = no auth
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  int max_concurrency = 4;
  std::chrono::milliseconds backoff_base{200};
  std::uint64_t jitter_seed = 0;

  // Wire format: a completion-style JSON POST.
  std::string prompt_field = "prompt";
  std::string max_tokens_field = "max_tokens";
  std::string response_pointer = "/choices/0/text";  // RFC 6901

  void check() const;
};

struct BatchOptions {
  std::string system_instruction = PromptTemplates{}.system_instruction;
  std::size_t progress_every = 50;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
  std::function<void(std::string_view message)> log;
};

/// System instruction, instruction and (non-empty) input joined by newlines;
/// the system instruction is skipped when it already is the instruction.
std::string assemble_prompt(const InstructionPair& pair, std::string_view system_instruction);

/// Request body for one prompt.
std::string build_request_body(const EndpointConfig& endpoint, const GenerationParams& params,
                               std::string_view prompt);

/// One record per pair, in input order. Transport failures, timeouts after
/// retries and malformed responses are recorded on the record; 401/403
/// aborts the whole batch with AuthError.
std::vector<PredictionRecord> generate_batch(const EndpointConfig& endpoint,
                                             const GenerationParams& params,
                                             const std::vector<InstructionPair>& pairs,
                                             const BatchOptions& options = {});

}  // namespace velvet
