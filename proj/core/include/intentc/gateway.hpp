#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentc/digest.hpp"
#include "intentc/errors.hpp"

namespace intentc {

enum class FMRole { release, evaluator, embedding };
enum class BackendKind { http, mock };

const char* to_string(FMRole r);
const char* to_string(BackendKind b);

struct RetryPolicy {
  int max_attempts = 3;
  int initial_backoff_ms = 50;
  double backoff_multiplier = 2.0;
};

// Deterministic offline backend. Three behaviors compose:
//  - scripted: exact prompt -> response table, then substring rules;
//  - generative: response derived from the request digest (default fallback);
//  - faults: prompts matching a substring fail their first `fail_attempts`
//    attempts with the given error kind, then succeed.
struct MockSpec {
  enum class Mode { generative, scripted };
  Mode mode = Mode::generative;
  bool strict = false;  // scripted mode: unmatched prompt is an error instead of generative fallback
  std::map<std::string, std::string> script;  // exact prompt -> response

  struct Rule {
    std::string match_substring;
    std::string response;
  };
  std::vector<Rule> rules;

  struct Fault {
    std::string match_substring;
    GatewayError::Kind kind = GatewayError::Kind::timeout;
    int fail_attempts = 1;
  };
  std::vector<Fault> faults;
};

struct FMConfig {
  FMRole role = FMRole::release;
  BackendKind backend = BackendKind::mock;
  std::string endpoint;  // http only, e.g. http://127.0.0.1:8080
  std::string model_id = "mock-model";
  double temperature = 0.0;
  double top_p = 1.0;
  std::optional<std::int64_t> seed;
  int max_tokens = 512;
  int timeout_ms = 30000;
  RetryPolicy retry;
  std::string api_key_env;  // name of env var holding the key; never the key itself
  int embedding_dim = 32;   // mock embedding dimension
  MockSpec mock;

  void validate() const;  // throws ConfigInvalid
  nlohmann::json to_json() const;
  static FMConfig from_json(const nlohmann::json& j, FMRole role);
};

struct Completion {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::chrono::milliseconds wall_latency{0};
  std::string backend_fingerprint;
};

struct Embedding {
  std::vector<double> v;

  int dim() const { return static_cast<int>(v.size()); }
  std::string canonical_bytes() const;
  static Embedding from_canonical_bytes(std::string_view bytes);
};

// Whitespace-delimited token count, used when a backend omits usage fields.
std::int64_t count_tokens_fallback(std::string_view text);

// Record of one logical gateway call, after retries resolved. `request` and
// `response` are the canonical wire bodies (chat-completions-compatible).
struct FmCallRecord {
  std::string api;  // "completion" | "embedding"
  FMRole role;
  BackendKind backend;
  std::string model_id;
  nlohmann::json request;
  nlohmann::json response;  // null on terminal failure
  Digest request_digest;
  Digest response_digest;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
  int attempts = 1;
  std::string error;  // empty on success
};

// Answers a request from a recorded trace. Returns the recorded response
// body, or throws DivergenceDetected when the request does not match the
// recording.
using ReplaySource = std::function<nlohmann::json(const std::string& api, const Digest& request_digest)>;

struct GatewayOptions {
  int max_in_flight = 8;
  double rate_per_sec = 0.0;  // 0 = unlimited
};

// Uniform FM access with retry, rate limiting, usage accounting, and
// one-event-per-logical-call observability.
class Gateway {
 public:
  explicit Gateway(GatewayOptions opts = {});
  ~Gateway();

  Completion complete(const FMConfig& config, const std::string& prompt);
  Embedding embed(const FMConfig& config, const std::string& text);

  // Canonical request bodies; replay matches on their digests.
  static nlohmann::json completion_request(const FMConfig& config, const std::string& prompt);
  static nlohmann::json embedding_request(const FMConfig& config, const std::string& text);

  void set_event_sink(std::function<void(const FmCallRecord&)> sink);
  void set_replay_source(ReplaySource source);
  bool replaying() const { return static_cast<bool>(replay_); }

  std::uint64_t completion_calls() const { return completion_calls_.load(); }
  std::uint64_t embedding_calls() const { return embedding_calls_.load(); }
  std::int64_t total_prompt_tokens() const { return prompt_tokens_.load(); }
  std::int64_t total_completion_tokens() const { return completion_tokens_.load(); }

 private:
  struct Impl;

  nlohmann::json dispatch(const FMConfig& config, const nlohmann::json& request, const std::string& api,
                          int* attempts_out);
  nlohmann::json mock_response(const FMConfig& config, const nlohmann::json& request, const std::string& api);
  nlohmann::json http_response(const FMConfig& config, const nlohmann::json& request, const std::string& api);
  void throttle();

  GatewayOptions opts_;
  std::function<void(const FmCallRecord&)> sink_;
  ReplaySource replay_;
  std::atomic<std::uint64_t> completion_calls_{0};
  std::atomic<std::uint64_t> embedding_calls_{0};
  std::atomic<std::int64_t> prompt_tokens_{0};
  std::atomic<std::int64_t> completion_tokens_{0};
  std::unique_ptr<Impl> impl_;
};

}  // namespace intentc
