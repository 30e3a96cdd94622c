#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentc/digest.hpp"
#include "intentc/genome.hpp"
#include "intentc/prompt_template.hpp"
#include "intentc/types.hpp"

namespace intentc {

struct Lineage {
  std::vector<std::string> parents;
  std::string op;

  bool operator==(const Lineage&) const = default;
};

// One point in the search space: a prompt template plus a parameter genome,
// with evaluation results attached once known.
struct Candidate {
  std::string id;
  PromptTemplate tmpl;
  ParameterGenome genome;
  std::optional<ObjectiveVector> objectives;
  std::optional<int> rank;
  std::optional<double> crowding;  // +inf on front boundaries
  std::optional<Lineage> lineage;  // unset only for user-seeded generation-0 candidates

  bool evaluated() const { return objectives.has_value(); }

  // Identity of the configuration (template + genome), independent of
  // evaluation state. Two candidates with equal keys behave identically.
  std::string config_key() const;
  Digest config_digest() const { return content_key(config_key()); }

  // Full state, exact round trip (used by checkpoints).
  std::string serialize() const;
  static Candidate deserialize(std::string_view bytes);

  nlohmann::json to_json() const;
  static Candidate from_json(const nlohmann::json& j);
};

}  // namespace intentc
