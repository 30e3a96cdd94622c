#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace intentc {

// Base for every domain error. `code()` is a stable machine-readable tag used
// by the CLI for exit-code mapping and by tests.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Template engine
struct UnbalancedDelimiter : Error {
  explicit UnbalancedDelimiter(const std::string& w) : Error("UnbalancedDelimiter", w) {}
};
struct DuplicatePlaceholder : Error {
  explicit DuplicatePlaceholder(const std::string& w) : Error("DuplicatePlaceholder", w) {}
};
struct MissingBinding : Error {
  explicit MissingBinding(const std::string& name)
      : Error("MissingBinding", "no binding for placeholder '" + name + "'") {}
};

// Configuration
struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& w) : Error("ConfigInvalid", w) {}
};

// Gateway
struct GatewayError : Error {
  enum class Kind { timeout, rate_limited, malformed_response, transport_failure };
  GatewayError(Kind k, const std::string& w, int attempts_made)
      : Error(kind_code(k), w), kind(k), attempts(attempts_made) {}
  Kind kind;
  int attempts;

  static const char* kind_code(Kind k) {
    switch (k) {
      case Kind::timeout: return "Timeout";
      case Kind::rate_limited: return "RateLimited";
      case Kind::malformed_response: return "MalformedResponse";
      case Kind::transport_failure: return "TransportFailure";
    }
    return "TransportFailure";
  }
};

// Evaluation
struct SandboxUnavailable : Error {
  explicit SandboxUnavailable(const std::string& w) : Error("SandboxUnavailable", w) {}
};
struct UnknownMetric : Error {
  explicit UnknownMetric(const std::string& w) : Error("UnknownMetric", w) {}
};
struct EmptyScores : Error {
  EmptyScores() : Error("EmptyScores", "aggregate requires at least one instance score") {}
};
struct TooFewInstances : Error {
  explicit TooFewInstances(const std::string& w) : Error("TooFewInstances", w) {}
};

// Optimizer
struct ArityMismatch : Error {
  explicit ArityMismatch(const std::string& w) : Error("ArityMismatch", w) {}
};
struct UnevaluatedCandidate : Error {
  explicit UnevaluatedCandidate(const std::string& w) : Error("UnevaluatedCandidate", w) {}
};

// Cache
struct DimMismatch : Error {
  explicit DimMismatch(const std::string& w) : Error("DimMismatch", w) {}
};
struct CorruptCacheFile : Error {
  explicit CorruptCacheFile(const std::string& w) : Error("CorruptCacheFile", w) {}
};

// Trace / checkpoint / replay
struct TraceIOFailure : Error {
  explicit TraceIOFailure(const std::string& w) : Error("TraceIOFailure", w) {}
};
struct IncompleteTrace : Error {
  explicit IncompleteTrace(const std::string& w) : Error("IncompleteTrace", w) {}
};
struct CorruptCheckpoint : Error {
  explicit CorruptCheckpoint(const std::string& w) : Error("CorruptCheckpoint", w) {}
};
struct ConfigMismatch : Error {
  explicit ConfigMismatch(const std::string& w) : Error("ConfigMismatch", w) {}
};
struct DivergenceDetected : Error {
  DivergenceDetected(std::uint64_t at_seq, const std::string& w)
      : Error("DivergenceDetected", w), seq(at_seq) {}
  std::uint64_t seq;
};

struct TruncatedData : Error {
  explicit TruncatedData(const std::string& w) : Error("TruncatedData", w) {}
};

}  // namespace intentc
