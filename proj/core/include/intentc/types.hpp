#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace intentc {

struct Intent {
  std::string id;
  std::string text;

  bool operator==(const Intent&) const = default;
};

enum class TextMetric { exact_match, normalized_overlap };

const char* to_string(TextMetric m);
TextMetric text_metric_from_string(const std::string& s);

struct TestCase {
  std::string id;
  std::string source;

  bool operator==(const TestCase&) const = default;
};

// Executable gold-label suite. `command` is a shell template run once per
// test with {code}, {test} and {timeout_ms} substituted; it must exit 0 when
// the test passes and 1 when it fails, and may print one JSON object per
// line: {"test_id": ..., "outcome": "pass"|"fail"|"error", "millis": N}.
struct UnitTestSuite {
  std::string command;
  std::vector<TestCase> tests;

  bool operator==(const UnitTestSuite&) const = default;
};

struct GoldLabel {
  std::optional<UnitTestSuite> unit_tests;
  std::optional<std::string> reference_text;
  TextMetric text_metric = TextMetric::exact_match;
  // Known-good solution; required for synthesized-test validation.
  std::optional<std::string> reference_solution;

  bool operator==(const GoldLabel&) const = default;
};

struct InstanceOrigin {
  std::string parent_id;
  std::string kind;

  bool operator==(const InstanceOrigin&) const = default;
};

struct ProblemInstance {
  std::string id;
  std::map<std::string, std::string> bindings;
  GoldLabel gold;
  std::optional<InstanceOrigin> origin;  // set for expander-synthesized instances

  bool operator==(const ProblemInstance&) const = default;
};

enum class Direction { minimize, maximize };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

struct ObjectiveSpec {
  std::string name;
  Direction direction = Direction::maximize;
  std::string evaluator_id;
  std::optional<double> weight;  // report-only, never used for selection

  bool operator==(const ObjectiveSpec&) const = default;
};

struct ObjectiveVector {
  std::vector<double> values;

  bool operator==(const ObjectiveVector&) const = default;
};

struct ScenarioSpec {
  Intent intent;
  std::vector<ProblemInstance> instances;
  std::vector<ObjectiveSpec> objectives;
  std::string data_description;

  // Placeholder names every instance must bind (sorted). Derived from the
  // first instance; validate() enforces agreement across instances.
  std::vector<std::string> binding_schema() const;

  void validate() const;  // throws ConfigInvalid
};

nlohmann::json to_json(const Intent&);
nlohmann::json to_json(const GoldLabel&);
nlohmann::json to_json(const ProblemInstance&);
nlohmann::json to_json(const ObjectiveSpec&);
nlohmann::json to_json(const ScenarioSpec&);

Intent intent_from_json(const nlohmann::json&);
GoldLabel gold_from_json(const nlohmann::json&);
ProblemInstance instance_from_json(const nlohmann::json&);
ObjectiveSpec objective_from_json(const nlohmann::json&);
ScenarioSpec scenario_from_json(const nlohmann::json&);

}  // namespace intentc
