#include "intentc/types.hpp"

#include <algorithm>
#include <set>

#include "intentc/errors.hpp"

namespace intentc {

const char* to_string(TextMetric m) {
  return m == TextMetric::exact_match ? "exact_match" : "normalized_overlap";
}

TextMetric text_metric_from_string(const std::string& s) {
  if (s == "exact_match") return TextMetric::exact_match;
  if (s == "normalized_overlap") return TextMetric::normalized_overlap;
  throw UnknownMetric("unknown text metric '" + s + "'");
}

const char* to_string(Direction d) { return d == Direction::minimize ? "minimize" : "maximize"; }

Direction direction_from_string(const std::string& s) {
  if (s == "minimize") return Direction::minimize;
  if (s == "maximize") return Direction::maximize;
  throw ConfigInvalid("objective direction must be minimize or maximize, got '" + s + "'");
}

std::vector<std::string> ScenarioSpec::binding_schema() const {
  std::vector<std::string> names;
  if (instances.empty()) return names;
  for (const auto& [k, _] : instances.front().bindings) names.push_back(k);
  return names;  // std::map iteration is already sorted
}

void ScenarioSpec::validate() const {
  if (intent.text.empty()) throw ConfigInvalid("intent text must be non-empty");
  if (intent.id.empty()) throw ConfigInvalid("intent id must be non-empty");
  if (instances.empty()) throw ConfigInvalid("scenario has no problem instances");
  if (objectives.empty()) throw ConfigInvalid("scenario has no objectives");

  std::set<std::string> obj_names;
  for (const auto& o : objectives) {
    if (!obj_names.insert(o.name).second) {
      throw ConfigInvalid("duplicate objective name '" + o.name + "'");
    }
    if (o.weight && *o.weight <= 0.0) {
      throw ConfigInvalid("objective weight must be positive for '" + o.name + "'");
    }
  }

  std::set<std::string> ids;
  const auto schema = binding_schema();
  for (const auto& inst : instances) {
    if (!ids.insert(inst.id).second) throw ConfigInvalid("duplicate instance id '" + inst.id + "'");
    std::vector<std::string> keys;
    for (const auto& [k, _] : inst.bindings) keys.push_back(k);
    if (keys != schema) {
      throw ConfigInvalid("instance '" + inst.id + "' does not bind the shared placeholder schema");
    }
    const auto& g = inst.gold;
    if (g.unit_tests.has_value() == g.reference_text.has_value()) {
      throw ConfigInvalid("instance '" + inst.id + "' gold label must be exactly one of unit_tests/reference_text");
    }
    if (g.unit_tests && g.unit_tests->tests.empty()) {
      throw ConfigInvalid("instance '" + inst.id + "' unit-test suite is empty");
    }
  }
}

nlohmann::json to_json(const Intent& i) { return {{"id", i.id}, {"text", i.text}}; }

nlohmann::json to_json(const GoldLabel& g) {
  nlohmann::json j = nlohmann::json::object();
  if (g.unit_tests) {
    nlohmann::json tests = nlohmann::json::array();
    for (const auto& t : g.unit_tests->tests) tests.push_back({{"id", t.id}, {"source", t.source}});
    j["unit_tests"] = {{"command", g.unit_tests->command}, {"tests", tests}};
  }
  if (g.reference_text) {
    j["reference_text"] = *g.reference_text;
    j["text_metric"] = to_string(g.text_metric);
  }
  if (g.reference_solution) j["reference_solution"] = *g.reference_solution;
  return j;
}

nlohmann::json to_json(const ProblemInstance& p) {
  nlohmann::json j = {{"id", p.id}, {"bindings", p.bindings}, {"gold", to_json(p.gold)}};
  if (p.origin) j["origin"] = {{"parent_id", p.origin->parent_id}, {"kind", p.origin->kind}};
  return j;
}

nlohmann::json to_json(const ObjectiveSpec& o) {
  nlohmann::json j = {{"name", o.name},
                      {"direction", to_string(o.direction)},
                      {"evaluator_id", o.evaluator_id}};
  if (o.weight) j["weight"] = *o.weight;
  return j;
}

nlohmann::json to_json(const ScenarioSpec& s) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& i : s.instances) instances.push_back(to_json(i));
  nlohmann::json objectives = nlohmann::json::array();
  for (const auto& o : s.objectives) objectives.push_back(to_json(o));
  return {{"intent", to_json(s.intent)},
          {"data_description", s.data_description},
          {"instances", instances},
          {"objectives", objectives}};
}

Intent intent_from_json(const nlohmann::json& j) {
  return Intent{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
}

GoldLabel gold_from_json(const nlohmann::json& j) {
  GoldLabel g;
  if (j.contains("unit_tests")) {
    UnitTestSuite suite;
    suite.command = j.at("unit_tests").at("command").get<std::string>();
    for (const auto& t : j.at("unit_tests").at("tests")) {
      suite.tests.push_back({t.at("id").get<std::string>(), t.at("source").get<std::string>()});
    }
    g.unit_tests = std::move(suite);
  }
  if (j.contains("reference_text")) {
    g.reference_text = j.at("reference_text").get<std::string>();
    if (j.contains("text_metric")) g.text_metric = text_metric_from_string(j.at("text_metric").get<std::string>());
  }
  if (j.contains("reference_solution")) g.reference_solution = j.at("reference_solution").get<std::string>();
  return g;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
  ProblemInstance p;
  p.id = j.at("id").get<std::string>();
  p.bindings = j.at("bindings").get<std::map<std::string, std::string>>();
  p.gold = gold_from_json(j.at("gold"));
  if (j.contains("origin")) {
    p.origin = InstanceOrigin{j.at("origin").at("parent_id").get<std::string>(),
                              j.at("origin").at("kind").get<std::string>()};
  }
  return p;
}

ObjectiveSpec objective_from_json(const nlohmann::json& j) {
  ObjectiveSpec o;
  o.name = j.at("name").get<std::string>();
  o.direction = direction_from_string(j.at("direction").get<std::string>());
  o.evaluator_id = j.value("evaluator_id", o.name);
  if (j.contains("weight")) o.weight = j.at("weight").get<double>();
  return o;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  s.intent = intent_from_json(j.at("intent"));
  s.data_description = j.value("data_description", std::string{});
  for (const auto& i : j.at("instances")) s.instances.push_back(instance_from_json(i));
  if (j.contains("objectives")) {
    for (const auto& o : j.at("objectives")) s.objectives.push_back(objective_from_json(o));
  }
  return s;
}

}  // namespace intentc
