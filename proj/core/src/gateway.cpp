#include "intentc/gateway.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <random>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "intentc/byteio.hpp"

namespace intentc {

const char* to_string(FMRole r) {
  switch (r) {
    case FMRole::release: return "release";
    case FMRole::evaluator: return "evaluator";
    case FMRole::embedding: return "embedding";
  }
  return "release";
}

const char* to_string(BackendKind b) { return b == BackendKind::http ? "http" : "mock"; }

void FMConfig::validate() const {
  if (backend == BackendKind::http) {
    if (endpoint.empty()) throw ConfigInvalid("http backend requires an endpoint");
    if (model_id.empty()) throw ConfigInvalid("http backend requires a model_id");
  }
  if (temperature < 0.0) throw ConfigInvalid("temperature must be >= 0");
  if (top_p <= 0.0 || top_p > 1.0) throw ConfigInvalid("top_p must be in (0, 1]");
  if (max_tokens <= 0) throw ConfigInvalid("max_tokens must be positive");
  if (timeout_ms <= 0) throw ConfigInvalid("timeout_ms must be positive");
  if (retry.max_attempts < 1) throw ConfigInvalid("retry.max_attempts must be >= 1");
  if (embedding_dim <= 0) throw ConfigInvalid("embedding_dim must be positive");
}

nlohmann::json FMConfig::to_json() const {
  nlohmann::json j = {{"backend", to_string(backend)},
                      {"model_id", model_id},
                      {"temperature", temperature},
                      {"top_p", top_p},
                      {"max_tokens", max_tokens},
                      {"timeout_ms", timeout_ms},
                      {"retry",
                       {{"max_attempts", retry.max_attempts},
                        {"initial_backoff_ms", retry.initial_backoff_ms},
                        {"backoff_multiplier", retry.backoff_multiplier}}},
                      {"embedding_dim", embedding_dim}};
  if (!endpoint.empty()) j["endpoint"] = endpoint;
  if (!api_key_env.empty()) j["api_key_env"] = api_key_env;
  if (seed) j["seed"] = *seed;
  if (backend == BackendKind::mock) {
    nlohmann::json m = {{"mode", mock.mode == MockSpec::Mode::scripted ? "scripted" : "generative"},
                        {"strict", mock.strict}};
    if (!mock.script.empty()) m["script"] = mock.script;
    if (!mock.rules.empty()) {
      nlohmann::json rules = nlohmann::json::array();
      for (const auto& r : mock.rules) rules.push_back({{"match_substring", r.match_substring}, {"response", r.response}});
      m["rules"] = rules;
    }
    if (!mock.faults.empty()) {
      nlohmann::json faults = nlohmann::json::array();
      for (const auto& f : mock.faults) {
        faults.push_back({{"match_substring", f.match_substring},
                          {"kind", GatewayError::kind_code(f.kind)},
                          {"fail_attempts", f.fail_attempts}});
      }
      m["faults"] = faults;
    }
    j["mock"] = m;
  }
  return j;
}

static GatewayError::Kind fault_kind_from_string(const std::string& s) {
  if (s == "Timeout") return GatewayError::Kind::timeout;
  if (s == "RateLimited") return GatewayError::Kind::rate_limited;
  if (s == "MalformedResponse") return GatewayError::Kind::malformed_response;
  if (s == "TransportFailure") return GatewayError::Kind::transport_failure;
  throw ConfigInvalid("unknown fault kind '" + s + "'");
}

FMConfig FMConfig::from_json(const nlohmann::json& j, FMRole role) {
  FMConfig c;
  c.role = role;
  auto backend = j.value("backend", std::string{"mock"});
  if (backend == "http") c.backend = BackendKind::http;
  else if (backend == "mock") c.backend = BackendKind::mock;
  else throw ConfigInvalid("fm backend must be http or mock, got '" + backend + "'");
  c.endpoint = j.value("endpoint", std::string{});
  c.model_id = j.value("model_id", std::string{"mock-model"});
  c.temperature = j.value("temperature", 0.0);
  c.top_p = j.value("top_p", 1.0);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::int64_t>();
  c.max_tokens = j.value("max_tokens", 512);
  c.timeout_ms = j.value("timeout_ms", 30000);
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    c.retry.max_attempts = r.value("max_attempts", 3);
    c.retry.initial_backoff_ms = r.value("initial_backoff_ms", 50);
    c.retry.backoff_multiplier = r.value("backoff_multiplier", 2.0);
  }
  c.api_key_env = j.value("api_key_env", std::string{});
  c.embedding_dim = j.value("embedding_dim", 32);
  if (j.contains("mock")) {
    const auto& m = j.at("mock");
    auto mode = m.value("mode", std::string{"generative"});
    if (mode == "scripted") c.mock.mode = MockSpec::Mode::scripted;
    else if (mode == "generative") c.mock.mode = MockSpec::Mode::generative;
    else throw ConfigInvalid("mock mode must be generative or scripted");
    c.mock.strict = m.value("strict", false);
    if (m.contains("script")) c.mock.script = m.at("script").get<std::map<std::string, std::string>>();
    if (m.contains("rules")) {
      for (const auto& r : m.at("rules")) {
        c.mock.rules.push_back({r.at("match_substring").get<std::string>(), r.at("response").get<std::string>()});
      }
    }
    if (m.contains("faults")) {
      for (const auto& f : m.at("faults")) {
        c.mock.faults.push_back({f.at("match_substring").get<std::string>(),
                                 fault_kind_from_string(f.value("kind", std::string{"Timeout"})),
                                 f.value("fail_attempts", 1)});
      }
    }
  }
  c.validate();
  return c;
}

std::string Embedding::canonical_bytes() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) w.f64(x);
  return w.take();
}

Embedding Embedding::from_canonical_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  Embedding e;
  std::uint32_t n = r.u32();
  e.v.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) e.v.push_back(r.f64());
  return e;
}

std::int64_t count_tokens_fallback(std::string_view text) {
  std::int64_t count = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!ws && !in_token) ++count;
    in_token = !ws;
  }
  return count;
}

// ---------------------------------------------------------------------------

struct Gateway::Impl {
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;

  std::mutex rate_mu;
  double bucket_tokens = 0.0;
  std::chrono::steady_clock::time_point last_refill = std::chrono::steady_clock::now();

  std::mutex fault_mu;
  std::map<std::pair<std::size_t, Digest>, int> fault_attempts;  // (rule index, prompt digest) -> attempts so far
};

Gateway::Gateway(GatewayOptions opts) : opts_(opts), impl_(std::make_unique<Impl>()) {}
Gateway::~Gateway() = default;

void Gateway::set_event_sink(std::function<void(const FmCallRecord&)> sink) { sink_ = std::move(sink); }
void Gateway::set_replay_source(ReplaySource source) { replay_ = std::move(source); }

nlohmann::json Gateway::completion_request(const FMConfig& config, const std::string& prompt) {
  nlohmann::json req = {{"model", config.model_id},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"temperature", config.temperature},
                        {"top_p", config.top_p},
                        {"max_tokens", config.max_tokens}};
  if (config.seed) req["seed"] = *config.seed;
  return req;
}

nlohmann::json Gateway::embedding_request(const FMConfig& config, const std::string& text) {
  return {{"model", config.model_id}, {"input", text}, {"dim", config.embedding_dim}};
}

namespace {

struct InFlightGuard {
  Gateway::Impl* impl;
  int limit;
  InFlightGuard(Gateway::Impl* i, int lim) : impl(i), limit(lim) {
    std::unique_lock lk(impl->mu);
    impl->cv.wait(lk, [&] { return impl->in_flight < limit; });
    ++impl->in_flight;
  }
  ~InFlightGuard() {
    {
      std::lock_guard lk(impl->mu);
      --impl->in_flight;
    }
    impl->cv.notify_one();
  }
};

const char* kMockWords[] = {
    "refine", "the", "solution", "steps", "carefully", "consider", "edge", "cases", "and",
    "return", "only", "code", "explain", "reasoning", "before", "answering", "verify",
    "output", "format", "examples", "input", "tests", "clear", "concise", "complete",
    "function", "body", "signature", "documented", "behavior", "correct", "handle",
    "values", "strings", "numbers", "loop", "result", "compute", "check", "finally"};

std::string generative_text(const Digest& d, int max_tokens) {
  // Expand the digest into a deterministic word sequence.
  int n_words = 8 + d.bytes[0] % 9;
  if (n_words > max_tokens) n_words = max_tokens;
  std::string out;
  Digest cur = d;
  std::size_t byte_idx = 1;
  for (int i = 0; i < n_words; ++i) {
    if (byte_idx >= cur.bytes.size()) {
      cur = sha256(std::string(reinterpret_cast<const char*>(cur.bytes.data()), cur.bytes.size()));
      byte_idx = 0;
    }
    if (i > 0) out.push_back(' ');
    out += kMockWords[cur.bytes[byte_idx] % (sizeof(kMockWords) / sizeof(kMockWords[0]))];
    ++byte_idx;
  }
  return out;
}

std::vector<double> generative_unit_vector(const Digest& d, int dim) {
  // Gaussian components via Box-Muller over the digest-seeded engine, then
  // normalized. Independent of std distributions for portability.
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
  std::mt19937_64 eng(seed);
  auto real01 = [&] { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; i += 2) {
    double u1 = real01();
    double u2 = real01();
    double r = std::sqrt(-2.0 * std::log(u1));
    v[static_cast<std::size_t>(i)] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < dim) v[static_cast<std::size_t>(i) + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    norm = 1.0;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::string canonical_dump(const nlohmann::json& j) { return j.dump(); }

}  // namespace

nlohmann::json Gateway::mock_response(const FMConfig& config, const nlohmann::json& request, const std::string& api) {
  const Digest req_digest = sha256(canonical_dump(request));
  std::string prompt = api == "completion" ? request.at("messages").at(0).at("content").get<std::string>()
                                           : request.at("input").get<std::string>();

  // Fault injection: the first fail_attempts attempts of a matching prompt fail.
  for (std::size_t i = 0; i < config.mock.faults.size(); ++i) {
    const auto& f = config.mock.faults[i];
    if (prompt.find(f.match_substring) == std::string::npos) continue;
    std::lock_guard lk(impl_->fault_mu);
    int& attempts = impl_->fault_attempts[{i, req_digest}];
    if (attempts < f.fail_attempts) {
      ++attempts;
      throw GatewayError(f.kind, "injected fault (" + f.match_substring + ")", 1);
    }
  }

  if (api == "embedding") {
    auto vec = generative_unit_vector(req_digest, config.embedding_dim);
    return {{"model", config.model_id}, {"data", nlohmann::json::array({{{"embedding", vec}, {"index", 0}}})}};
  }

  std::string text;
  bool matched = false;
  if (config.mock.mode == MockSpec::Mode::scripted) {
    auto it = config.mock.script.find(prompt);
    if (it != config.mock.script.end()) {
      text = it->second;
      matched = true;
    } else {
      for (const auto& rule : config.mock.rules) {
        if (prompt.find(rule.match_substring) != std::string::npos) {
          text = rule.response;
          matched = true;
          break;
        }
      }
    }
    if (!matched && config.mock.strict) {
      throw GatewayError(GatewayError::Kind::malformed_response, "no scripted response for prompt", 1);
    }
  }
  if (!matched) text = generative_text(req_digest, config.max_tokens);

  return {{"model", config.model_id},
          {"choices", nlohmann::json::array({{{"index", 0},
                                              {"message", {{"role", "assistant"}, {"content", text}}},
                                              {"finish_reason", "stop"}}})},
          {"usage",
           {{"prompt_tokens", count_tokens_fallback(prompt)},
            {"completion_tokens", count_tokens_fallback(text)}}}};
}

nlohmann::json Gateway::http_response(const FMConfig& config, const nlohmann::json& request, const std::string& api) {
  httplib::Client client(config.endpoint);
  client.set_connection_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
  client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const char* path = api == "completion" ? "/v1/chat/completions" : "/v1/embeddings";
  nlohmann::json body = request;
  if (api == "embedding") body.erase("dim");  // local knob, not part of the wire format
  auto res = client.Post(path, headers, body.dump(), "application/json");

  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read || err == httplib::Error::Write) {
      throw GatewayError(GatewayError::Kind::timeout, "http timeout: " + httplib::to_string(err), 1);
    }
    throw GatewayError(GatewayError::Kind::transport_failure, "http transport: " + httplib::to_string(err), 1);
  }
  if (res->status == 429) throw GatewayError(GatewayError::Kind::rate_limited, "http 429", 1);
  if (res->status >= 500) {
    throw GatewayError(GatewayError::Kind::transport_failure, "http " + std::to_string(res->status), 1);
  }
  if (res->status != 200) {
    throw GatewayError(GatewayError::Kind::malformed_response,
                       "http " + std::to_string(res->status) + ": " + res->body.substr(0, 200), 1);
  }
  nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw GatewayError(GatewayError::Kind::malformed_response, "response body is not JSON", 1);
  }
  return parsed;
}

void Gateway::throttle() {
  if (opts_.rate_per_sec <= 0.0) return;
  for (;;) {
    {
      std::lock_guard lk(impl_->rate_mu);
      auto now = std::chrono::steady_clock::now();
      double elapsed = std::chrono::duration<double>(now - impl_->last_refill).count();
      impl_->last_refill = now;
      impl_->bucket_tokens = std::min(opts_.rate_per_sec, impl_->bucket_tokens + elapsed * opts_.rate_per_sec);
      if (impl_->bucket_tokens >= 1.0) {
        impl_->bucket_tokens -= 1.0;
        return;
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

nlohmann::json Gateway::dispatch(const FMConfig& config, const nlohmann::json& request, const std::string& api,
                                 int* attempts_out) {
  InFlightGuard guard(impl_.get(), opts_.max_in_flight);
  int backoff = config.retry.initial_backoff_ms;
  GatewayError last(GatewayError::Kind::transport_failure, "unreachable", 0);
  for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
    *attempts_out = attempt;
    throttle();
    try {
      if (config.backend == BackendKind::mock) return mock_response(config, request, api);
      return http_response(config, request, api);
    } catch (const GatewayError& e) {
      bool retryable = e.kind == GatewayError::Kind::timeout || e.kind == GatewayError::Kind::rate_limited ||
                       e.kind == GatewayError::Kind::transport_failure;
      if (!retryable || attempt == config.retry.max_attempts) {
        throw GatewayError(e.kind, e.what(), attempt);
      }
      last = e;
    }
    if (backoff > 0 && config.backend == BackendKind::http) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff = static_cast<int>(backoff * config.retry.backoff_multiplier);
    }
  }
  throw last;
}

Completion Gateway::complete(const FMConfig& config, const std::string& prompt) {
  if (prompt.empty()) throw ConfigInvalid("completion prompt must be non-empty");
  completion_calls_.fetch_add(1);

  nlohmann::json request = completion_request(config, prompt);
  FmCallRecord rec;
  rec.api = "completion";
  rec.role = config.role;
  rec.backend = config.backend;
  rec.model_id = config.model_id;
  rec.request = request;
  rec.request_digest = sha256(request.dump());

  auto started = std::chrono::steady_clock::now();
  nlohmann::json response;
  int attempts = 1;
  try {
    if (replay_) {
      response = replay_("completion", rec.request_digest);
    } else {
      response = dispatch(config, request, "completion", &attempts);
    }
  } catch (const GatewayError& e) {
    rec.attempts = e.attempts > 0 ? e.attempts : attempts;
    rec.error = e.code();
    rec.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    if (sink_) sink_(rec);
    throw;
  }

  Completion out;
  try {
    out.text = response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    rec.attempts = attempts;
    rec.error = "MalformedResponse";
    if (sink_) sink_(rec);
    throw GatewayError(GatewayError::Kind::malformed_response, "missing choices[0].message.content", attempts);
  }
  if (response.contains("usage") && response.at("usage").contains("prompt_tokens")) {
    out.prompt_tokens = response.at("usage").at("prompt_tokens").get<std::int64_t>();
    out.completion_tokens = response.at("usage").value("completion_tokens", std::int64_t{0});
  } else {
    out.prompt_tokens = count_tokens_fallback(prompt);
    out.completion_tokens = count_tokens_fallback(out.text);
  }
  out.wall_latency = config.backend == BackendKind::mock
                         ? std::chrono::milliseconds{0}
                         : std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                                 started);
  out.backend_fingerprint = std::string(to_string(config.backend)) + ":" + config.model_id;

  prompt_tokens_.fetch_add(out.prompt_tokens);
  completion_tokens_.fetch_add(out.completion_tokens);

  rec.response = response;
  rec.response_digest = sha256(response.dump());
  rec.prompt_tokens = out.prompt_tokens;
  rec.completion_tokens = out.completion_tokens;
  rec.latency_ms = out.wall_latency.count();
  rec.attempts = attempts;
  if (sink_) sink_(rec);
  return out;
}

Embedding Gateway::embed(const FMConfig& config, const std::string& text) {
  if (text.empty()) throw ConfigInvalid("embedding input must be non-empty");
  embedding_calls_.fetch_add(1);

  nlohmann::json request = embedding_request(config, text);
  FmCallRecord rec;
  rec.api = "embedding";
  rec.role = config.role;
  rec.backend = config.backend;
  rec.model_id = config.model_id;
  rec.request = request;
  rec.request_digest = sha256(request.dump());

  auto started = std::chrono::steady_clock::now();
  nlohmann::json response;
  int attempts = 1;
  try {
    if (replay_) {
      response = replay_("embedding", rec.request_digest);
    } else {
      response = dispatch(config, request, "embedding", &attempts);
    }
  } catch (const GatewayError& e) {
    rec.attempts = e.attempts > 0 ? e.attempts : attempts;
    rec.error = e.code();
    if (sink_) sink_(rec);
    throw;
  }

  Embedding out;
  try {
    out.v = response.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    rec.attempts = attempts;
    rec.error = "MalformedResponse";
    if (sink_) sink_(rec);
    throw GatewayError(GatewayError::Kind::malformed_response, "missing data[0].embedding", attempts);
  }
  if (out.v.empty()) {
    rec.attempts = attempts;
    rec.error = "MalformedResponse";
    if (sink_) sink_(rec);
    throw GatewayError(GatewayError::Kind::malformed_response, "empty embedding vector", attempts);
  }

  rec.response = response;
  rec.response_digest = sha256(response.dump());
  rec.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  rec.attempts = attempts;
  if (sink_) sink_(rec);
  return out;
}

}  // namespace intentc
