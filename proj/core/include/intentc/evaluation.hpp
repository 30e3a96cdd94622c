#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentc/gateway.hpp"
#include "intentc/genome.hpp"
#include "intentc/prompt_template.hpp"
#include "intentc/types.hpp"

namespace intentc {

enum class TestOutcomeKind { pass, fail, error, timeout };

const char* to_string(TestOutcomeKind k);

struct TestOutcome {
  std::string test_id;
  TestOutcomeKind outcome = TestOutcomeKind::error;
  std::int64_t millis = 0;
};

// Per-instance raw measurements feeding the objective vector.
struct InstanceScore {
  std::string instance_id;
  double accuracy = 0.0;        // passes / total tests
  double exec_latency_s = 0.0;  // generated-code execution wall time
  std::int64_t tokens = 0;      // prompt + completion tokens of the release call
  std::vector<TestOutcome> failure_detail;
  std::map<std::string, double> custom;  // values from registered evaluators
  bool errored = false;                  // gateway failure; worst-case policy applied

  nlohmann::json to_json() const;
};

struct FeedbackText {
  std::string text;
  std::vector<std::string> source_failures;
  bool generality_checked = false;  // true when no instance-specific content was found
};

struct QualityGateResult {
  bool pass = false;
  double point_estimate = 0.0;
  double lower_bound = 0.0;
  double confidence = 0.0;
  double threshold = 0.0;
  std::int64_t n = 0;

  nlohmann::json to_json() const;
};

struct EvalLimits {
  std::chrono::milliseconds per_test_timeout{10000};
  std::int64_t memory_cap_bytes = 0;  // advisory; enforced by the runner command when set
};

// Runs every test of the suite against the generated code in the sandbox.
// Each test is classified pass/fail/error/timeout; accuracy is the pass
// proportion and exec latency the summed test wall time. Prefers the
// runner's own JSONL report lines over the observed exit code.
InstanceScore evaluate_codegen(const std::string& generated_code, const UnitTestSuite& suite,
                               const EvalLimits& limits, const std::string& instance_id = {});

// exact_match: 1.0 iff equal after whitespace normalization.
// normalized_overlap: token-multiset F1.
double evaluate_text(const std::string& generated, const std::string& reference, TextMetric metric);

struct AggregatePolicy {
  double error_latency_s = 10.0;    // worst-case latency charged to errored instances
  std::int64_t error_tokens = 512;  // worst-case token count for errored instances
};

// Per-objective arithmetic mean over instances. Errored instances contribute
// the worst-case values from the policy.
ObjectiveVector aggregate(std::span<const InstanceScore> scores, std::span<const ObjectiveSpec> specs,
                          const AggregatePolicy& policy);

// Value of one objective for one instance (mean input). Custom evaluator ids
// are looked up in InstanceScore::custom.
double objective_value(const InstanceScore& score, const ObjectiveSpec& spec, const AggregatePolicy& policy);

// Wilson score interval lower bound; pass iff lower_bound >= threshold.
QualityGateResult quality_gate(const std::vector<bool>& outcomes, double threshold, double confidence);

// Lower bound of the Wilson score interval for successes/n at `confidence`.
double wilson_lower_bound(std::int64_t successes, std::int64_t n, double confidence);

// Inverse standard normal CDF (Acklam's rational approximation).
double normal_quantile(double p);

// Deterministic shuffle split: first round(ratio*n) (clamped so both sides
// are non-empty) go to guidance, the rest to evaluation.
std::pair<std::vector<ProblemInstance>, std::vector<ProblemInstance>> split_holdout(
    std::span<const ProblemInstance> instances, double ratio, std::uint64_t seed);

struct FailureReport {
  std::string instance_id;
  Bindings bindings;
  std::vector<TestOutcome> failures;
};

// Removes sentences mentioning instance-specific identifiers (binding tokens
// of length >= 4). Sets *modified when anything was dropped.
std::string strip_instance_specific(const std::string& feedback, std::span<const FailureReport> reports,
                                    bool* modified);

// One evaluator-FM call producing template-improvement feedback from the
// failing instances, passed through the generality filter and the length cap.
FeedbackText self_reflect(Gateway& gateway, const FMConfig& evaluator, const PromptTemplate& tmpl,
                          const Intent& intent, std::span<const FailureReport> failures,
                          const std::string& reflection_prompt, std::size_t length_cap);

// User-extensible per-instance objective evaluators (beyond the built-in
// accuracy / exec_latency / tokens), keyed by ObjectiveSpec::evaluator_id.
struct EvalContext {
  const PromptTemplate* tmpl = nullptr;
  const ParameterGenome* genome = nullptr;
  const std::string* rendered_prompt = nullptr;
  const Completion* completion = nullptr;
  const ProblemInstance* instance = nullptr;
};

using EvaluatorFn = std::function<double(const EvalContext&)>;

class EvaluatorRegistry {
 public:
  static EvaluatorRegistry& instance();

  void register_evaluator(const std::string& id, EvaluatorFn fn);
  bool has(const std::string& id) const;
  double evaluate(const std::string& id, const EvalContext& ctx) const;  // throws UnknownMetric
  static bool builtin(const std::string& id) {
    return id == "accuracy" || id == "exec_latency" || id == "tokens";
  }

 private:
  std::map<std::string, EvaluatorFn> fns_;
};

}  // namespace intentc
