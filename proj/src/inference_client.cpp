#include "velvet/inference_client.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "velvet/error.hpp"

namespace velvet {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw DomainError(fmt::format("endpoint '{}' has no scheme", url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw DomainError(fmt::format("endpoint scheme '{}' is not http or https", scheme));
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.origin.size() <= scheme_end + 3) throw DomainError(fmt::format("endpoint '{}' has no host", url));
  return out;
}

enum class Outcome { Done, Retry, Abort };

struct Attempt {
  Outcome outcome;
  std::string prediction;
  std::optional<std::string> error;
};

Attempt classify(const httplib::Result& res, const std::string& pointer) {
  if (!res) return {Outcome::Retry, {}, "transport error: " + httplib::to_string(res.error())};
  const int status = res->status;
  if (status == 401 || status == 403)
    return {Outcome::Abort, {}, fmt::format("authentication rejected (HTTP {})", status)};
  if (status == 429 || status >= 500) return {Outcome::Retry, {}, fmt::format("HTTP {}", status)};
  if (status < 200 || status >= 300) return {Outcome::Done, {}, fmt::format("HTTP {}", status)};
  if (res->body.empty()) return {Outcome::Done, {}, "empty response body"};
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception&) {
    return {Outcome::Done, {}, "response body is not JSON"};
  }
  try {
    const json::json_pointer ptr(pointer);
    if (!body.contains(ptr)) return {Outcome::Done, {}, "response has no value at " + pointer};
    const auto& v = body.at(ptr);
    if (!v.is_string()) return {Outcome::Done, {}, "response value at " + pointer + " is not a string"};
    return {Outcome::Done, v.get<std::string>(), std::nullopt};
  } catch (const json::exception& e) {
    return {Outcome::Done, {}, std::string("bad response pointer: ") + e.what()};
  }
}

}  // namespace

GenerationParams normalize_params(double temperature, double top_p, int max_new_tokens) {
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw DomainError(fmt::format("temperature {} outside [0, 2]", temperature));
  if (!(top_p >= 0.0 && top_p <= 1.0))
    throw DomainError(fmt::format("top-p {} outside [0, 1]", top_p));
  if (max_new_tokens < 1) throw DomainError("max-new-tokens must be at least 1");
  GenerationParams p;
  p.temperature = temperature;
  p.top_p = top_p;
  p.max_new_tokens = max_new_tokens;
  p.do_sample = !(temperature == 0.0 || top_p == 0.0);
  return p;
}

void EndpointConfig::check() const {
  split_url(url);
  if (max_concurrency < 1) throw DomainError("max concurrency must be at least 1");
  if (max_retries < 0) throw DomainError("max retries cannot be negative");
  if (timeout.count() <= 0) throw DomainError("timeout must be positive");
  if (prompt_field.empty()) throw DomainError("prompt field name is empty");
}

std::string assemble_prompt(const InstructionPair& pair, std::string_view system_instruction) {
  std::string out;
  if (!system_instruction.empty() && system_instruction != pair.instruction) {
    out += system_instruction;
    out += '\n';
  }
  out += pair.instruction;
  if (!pair.input.empty()) {
    out += '\n';
    out += pair.input;
  }
  return out;
}

std::string build_request_body(const EndpointConfig& endpoint, const GenerationParams& params,
                               std::string_view prompt) {
  json j;
  if (!endpoint.model.empty()) j["model"] = endpoint.model;
  j[endpoint.prompt_field] = prompt;
  j["temperature"] = params.temperature;
  j["top_p"] = params.top_p;
  j["do_sample"] = params.do_sample;
  if (!endpoint.max_tokens_field.empty()) j[endpoint.max_tokens_field] = params.max_new_tokens;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<PredictionRecord> generate_batch(const EndpointConfig& endpoint,
                                             const GenerationParams& params,
                                             const std::vector<InstructionPair>& pairs,
                                             const BatchOptions& options) {
  endpoint.check();
  if (pairs.empty()) throw DomainError("generate_batch: no input pairs");
  const ParsedUrl url = split_url(endpoint.url);

  httplib::Headers headers;
  if (!endpoint.auth_env.empty()) {
    const char* token = std::getenv(endpoint.auth_env.c_str());
    if (!token || !*token)
      throw AuthError(fmt::format("environment variable {} is not set", endpoint.auth_env));
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  std::vector<PredictionRecord> records(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> abort{false};
  std::mutex report_mutex;
  std::optional<std::string> abort_reason;

  auto log = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard lock(report_mutex);
    options.log(msg);
  };

  auto worker = [&](std::size_t worker_id) {
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    std::mt19937_64 jitter(endpoint.jitter_seed + worker_id);
    std::uniform_real_distribution<double> unit(0.0, 0.5);

    for (std::size_t i = next++; i < pairs.size() && !abort; i = next++) {
      const auto& pair = pairs[i];
      auto& rec = records[i];
      rec.input = pair.input.empty() ? pair.instruction : pair.input;
      rec.reference = pair.response;
      const std::string body = build_request_body(endpoint, params, assemble_prompt(pair, options.system_instruction));

      for (int attempt = 1; attempt <= endpoint.max_retries + 1 && !abort; ++attempt) {
        rec.attempts = attempt;
        const Attempt a = classify(client.Post(url.path, headers, body, "application/json"),
                                   endpoint.response_pointer);
        log(fmt::format("record {} attempt {}: {}", i, attempt, a.error.value_or("ok")));
        if (a.outcome == Outcome::Abort) {
          std::lock_guard lock(report_mutex);
          if (!abort_reason) abort_reason = a.error;
          abort = true;
          break;
        }
        rec.prediction = a.prediction;
        rec.error = a.error;
        if (a.outcome == Outcome::Done) break;
        if (attempt <= endpoint.max_retries) {
          const double scale = std::ldexp(1.0, attempt - 1) * (1.0 + unit(jitter));
          std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
              endpoint.backoff_base * scale));
        }
      }
      if (rec.error) rec.prediction.clear();

      const std::size_t n = ++done;
      if (options.on_progress && options.progress_every > 0 &&
          (n % options.progress_every == 0 || n == pairs.size())) {
        std::lock_guard lock(report_mutex);
        options.on_progress(n, pairs.size());
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(endpoint.max_concurrency), pairs.size());
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker, w);
  }
  if (abort) throw AuthError(abort_reason.value_or("authentication rejected"));
  return records;
}

}  // namespace velvet
