#include "intentc/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "intentc/errors.hpp"
#include "intentc/sandbox.hpp"

namespace intentc {

namespace fs = std::filesystem;

const char* to_string(TestOutcomeKind k) {
  switch (k) {
    case TestOutcomeKind::pass: return "pass";
    case TestOutcomeKind::fail: return "fail";
    case TestOutcomeKind::error: return "error";
    case TestOutcomeKind::timeout: return "timeout";
  }
  return "error";
}

nlohmann::json InstanceScore::to_json() const {
  nlohmann::json detail = nlohmann::json::array();
  for (const auto& t : failure_detail) {
    detail.push_back({{"test_id", t.test_id}, {"outcome", to_string(t.outcome)}, {"millis", t.millis}});
  }
  nlohmann::json j = {{"instance_id", instance_id}, {"accuracy", accuracy},
                      {"exec_latency_s", exec_latency_s}, {"tokens", tokens},
                      {"errored", errored}, {"tests", detail}};
  if (!custom.empty()) j["custom"] = custom;
  return j;
}

nlohmann::json QualityGateResult::to_json() const {
  return {{"pass", pass},           {"point_estimate", point_estimate}, {"lower_bound", lower_bound},
          {"confidence", confidence}, {"threshold", threshold},          {"n", n}};
}

namespace {

std::string substitute_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

// Parses the runner's per-test JSONL report if present.
std::optional<TestOutcome> parse_report_line(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("test_id") || !j.contains("outcome")) {
    return std::nullopt;
  }
  TestOutcome t;
  t.test_id = j.at("test_id").get<std::string>();
  auto outcome = j.at("outcome").get<std::string>();
  if (outcome == "pass") t.outcome = TestOutcomeKind::pass;
  else if (outcome == "fail") t.outcome = TestOutcomeKind::fail;
  else t.outcome = TestOutcomeKind::error;
  t.millis = j.value("millis", std::int64_t{0});
  return t;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static std::atomic<std::uint64_t> counter{0};
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("intentc_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter.fetch_add(1)) + "_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
  if (!f) throw SandboxUnavailable("cannot write " + p.string());
}

}  // namespace

InstanceScore evaluate_codegen(const std::string& generated_code, const UnitTestSuite& suite,
                               const EvalLimits& limits, const std::string& instance_id) {
  if (suite.tests.empty()) throw ConfigInvalid("unit-test suite must contain at least one test");

  InstanceScore score;
  score.instance_id = instance_id;

  TempDir dir("eval");
  const fs::path code_path = dir.path / "code";
  write_file(code_path, generated_code);

  int passes = 0;
  std::int64_t total_millis = 0;
  for (std::size_t i = 0; i < suite.tests.size(); ++i) {
    const TestCase& test = suite.tests[i];
    const fs::path test_path = dir.path / ("test_" + std::to_string(i));
    write_file(test_path, test.source);

    std::string cmd = suite.command;
    cmd = substitute_all(cmd, "{code}", code_path.string());
    cmd = substitute_all(cmd, "{test}", test_path.string());
    cmd = substitute_all(cmd, "{timeout_ms}", std::to_string(limits.per_test_timeout.count()));

    ExecResult exec = run_sandboxed(cmd, limits.per_test_timeout, dir.path);

    TestOutcome outcome;
    outcome.test_id = test.id;
    if (exec.timed_out) {
      outcome.outcome = TestOutcomeKind::timeout;
      outcome.millis = limits.per_test_timeout.count();
    } else {
      // The runner's own report line is authoritative when present.
      std::optional<TestOutcome> reported;
      std::istringstream lines(exec.stdout_text);
      std::string line;
      while (std::getline(lines, line)) {
        if (auto t = parse_report_line(line); t && t->test_id == test.id) reported = t;
      }
      if (reported) {
        outcome = *reported;
      } else {
        outcome.outcome = exec.exit_code == 0   ? TestOutcomeKind::pass
                          : exec.exit_code == 1 ? TestOutcomeKind::fail
                                                : TestOutcomeKind::error;
        outcome.millis = exec.wall.count();
      }
    }
    if (outcome.outcome == TestOutcomeKind::pass) ++passes;
    total_millis += outcome.millis;
    score.failure_detail.push_back(std::move(outcome));
  }

  score.accuracy = static_cast<double>(passes) / static_cast<double>(suite.tests.size());
  score.exec_latency_s = static_cast<double>(total_millis) / 1000.0;
  return score;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

double evaluate_text(const std::string& generated, const std::string& reference, TextMetric metric) {
  auto gen = whitespace_tokens(generated);
  auto ref = whitespace_tokens(reference);
  if (metric == TextMetric::exact_match) {
    return gen == ref ? 1.0 : 0.0;
  }
  // normalized_overlap: token-multiset F1
  if (gen.empty() || ref.empty()) return gen.empty() && ref.empty() ? 1.0 : 0.0;
  std::map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int overlap = 0;
  for (const auto& t : gen) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(gen.size());
  double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double objective_value(const InstanceScore& score, const ObjectiveSpec& spec, const AggregatePolicy& policy) {
  if (score.errored) {
    if (spec.evaluator_id == "accuracy") return 0.0;
    if (spec.evaluator_id == "exec_latency") return policy.error_latency_s;
    if (spec.evaluator_id == "tokens") return static_cast<double>(policy.error_tokens);
  }
  if (spec.evaluator_id == "accuracy") return score.accuracy;
  if (spec.evaluator_id == "exec_latency") return score.exec_latency_s;
  if (spec.evaluator_id == "tokens") return static_cast<double>(score.tokens);
  auto it = score.custom.find(spec.evaluator_id);
  if (it == score.custom.end()) {
    if (score.errored) return spec.direction == Direction::maximize ? 0.0 : policy.error_latency_s;
    throw UnknownMetric("no evaluator value '" + spec.evaluator_id + "' on instance " + score.instance_id);
  }
  return it->second;
}

ObjectiveVector aggregate(std::span<const InstanceScore> scores, std::span<const ObjectiveSpec> specs,
                          const AggregatePolicy& policy) {
  if (scores.empty()) throw EmptyScores();
  ObjectiveVector out;
  out.values.reserve(specs.size());
  for (const auto& spec : specs) {
    double sum = 0.0;
    for (const auto& s : scores) sum += objective_value(s, spec, policy);
    out.values.push_back(sum / static_cast<double>(scores.size()));
  }
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigInvalid("normal_quantile requires p in (0,1)");
  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,  -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  const double phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double wilson_lower_bound(std::int64_t successes, std::int64_t n, double confidence) {
  if (n <= 0) throw ConfigInvalid("wilson_lower_bound requires n > 0");
  double z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
  double phat = static_cast<double>(successes) / static_cast<double>(n);
  double z2 = z * z;
  double denom = 1.0 + z2 / static_cast<double>(n);
  double centre = phat + z2 / (2.0 * static_cast<double>(n));
  double margin = z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n) +
                                z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n)));
  double lower = (centre - margin) / denom;
  return std::max(0.0, lower);
}

QualityGateResult quality_gate(const std::vector<bool>& outcomes, double threshold, double confidence) {
  if (outcomes.empty()) throw ConfigInvalid("quality_gate requires at least one outcome");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigInvalid("confidence must be in (0,1)");
  std::int64_t successes = static_cast<std::int64_t>(std::count(outcomes.begin(), outcomes.end(), true));
  QualityGateResult r;
  r.n = static_cast<std::int64_t>(outcomes.size());
  r.point_estimate = static_cast<double>(successes) / static_cast<double>(r.n);
  r.lower_bound = wilson_lower_bound(successes, r.n, confidence);
  r.confidence = confidence;
  r.threshold = threshold;
  r.pass = r.lower_bound >= threshold;
  return r;
}

std::pair<std::vector<ProblemInstance>, std::vector<ProblemInstance>> split_holdout(
    std::span<const ProblemInstance> instances, double ratio, std::uint64_t seed) {
  const std::size_t n = instances.size();
  if (n < 2) throw TooFewInstances("holdout split needs at least 2 instances, got " + std::to_string(n));
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigInvalid("holdout ratio must be in (0,1)");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // Fisher-Yates with portable bounded draws; mt19937_64 output is
  // standard-fixed, so the permutation is stable across platforms.
  RngStream rng("holdout", seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = rng.index(i + 1);
    std::swap(idx[i], idx[j]);
  }

  auto guidance_count = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  guidance_count = std::clamp<std::size_t>(guidance_count, 1, n - 1);

  std::pair<std::vector<ProblemInstance>, std::vector<ProblemInstance>> out;
  for (std::size_t i = 0; i < n; ++i) {
    (i < guidance_count ? out.first : out.second).push_back(instances[idx[i]]);
  }
  return out;
}

namespace {

std::set<std::string> binding_identifier_tokens(std::span<const FailureReport> reports) {
  std::set<std::string> tokens;
  for (const auto& r : reports) {
    for (const auto& [_, value] : r.bindings) {
      std::string cur;
      for (char c : value) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
          cur.push_back(c);
        } else {
          if (cur.size() >= 4) tokens.insert(cur);
          cur.clear();
        }
      }
      if (cur.size() >= 4) tokens.insert(cur);
    }
  }
  return tokens;
}

bool contains_word(const std::string& sentence, const std::string& word) {
  std::size_t pos = 0;
  auto is_word_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while ((pos = sentence.find(word, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_word_char(sentence[pos - 1]);
    std::size_t end = pos + word.size();
    bool right_ok = end >= sentence.size() || !is_word_char(sentence[end]);
    if (left_ok && right_ok) return true;
    pos = end;
  }
  return false;
}

}  // namespace

std::string strip_instance_specific(const std::string& feedback, std::span<const FailureReport> reports,
                                    bool* modified) {
  if (modified) *modified = false;
  auto tokens = binding_identifier_tokens(reports);
  if (tokens.empty()) return feedback;

  std::vector<std::string> sentences;
  std::string cur;
  for (char c : feedback) {
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      sentences.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) sentences.push_back(cur);

  std::string out;
  for (const auto& s : sentences) {
    bool drop = false;
    for (const auto& t : tokens) {
      if (contains_word(s, t)) {
        drop = true;
        break;
      }
    }
    if (drop) {
      if (modified) *modified = true;
    } else {
      out += s;
    }
  }
  return out;
}

FeedbackText self_reflect(Gateway& gateway, const FMConfig& evaluator, const PromptTemplate& tmpl,
                          const Intent& intent, std::span<const FailureReport> failures,
                          const std::string& reflection_prompt, std::size_t length_cap) {
  if (failures.empty()) throw ConfigInvalid("self_reflect requires at least one failure");

  std::string failure_lines;
  for (const auto& f : failures) {
    failure_lines += "instance " + f.instance_id + ":";
    for (const auto& t : f.failures) {
      failure_lines += " " + t.test_id + "=" + to_string(t.outcome);
    }
    failure_lines += "\n";
  }

  PromptTemplate meta = parse_template(reflection_prompt);
  std::string prompt = render(meta, {{"intent", intent.text},
                                     {"template", to_text(tmpl)},
                                     {"failures", failure_lines}});
  Completion completion = gateway.complete(evaluator, prompt);

  FeedbackText fb;
  bool modified = false;
  fb.text = strip_instance_specific(completion.text, failures, &modified);
  fb.generality_checked = !modified;
  if (fb.text.size() > length_cap) fb.text.resize(length_cap);
  for (const auto& f : failures) {
    for (const auto& t : f.failures) fb.source_failures.push_back(t.test_id);
  }
  return fb;
}

EvaluatorRegistry& EvaluatorRegistry::instance() {
  static EvaluatorRegistry reg;
  return reg;
}

void EvaluatorRegistry::register_evaluator(const std::string& id, EvaluatorFn fn) {
  fns_[id] = std::move(fn);
}

bool EvaluatorRegistry::has(const std::string& id) const { return fns_.count(id) > 0; }

double EvaluatorRegistry::evaluate(const std::string& id, const EvalContext& ctx) const {
  auto it = fns_.find(id);
  if (it == fns_.end()) throw UnknownMetric("no registered evaluator '" + id + "'");
  return it->second(ctx);
}

}  // namespace intentc
