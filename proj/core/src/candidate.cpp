#include "intentc/candidate.hpp"

#include <cmath>
#include <limits>

#include "intentc/byteio.hpp"
#include "intentc/errors.hpp"

namespace intentc {

std::string Candidate::config_key() const {
  ByteWriter w;
  w.str(canonical_bytes(tmpl));
  w.str(genome.canonical_bytes());
  return w.take();
}

std::string Candidate::serialize() const {
  ByteWriter w;
  w.str(id);
  w.str(canonical_bytes(tmpl));
  w.str(genome.canonical_bytes());
  w.u8(objectives.has_value() ? 1 : 0);
  if (objectives) {
    w.u32(static_cast<std::uint32_t>(objectives->values.size()));
    for (double v : objectives->values) w.f64(v);
  }
  w.u8(rank.has_value() ? 1 : 0);
  if (rank) w.u32(static_cast<std::uint32_t>(*rank));
  w.u8(crowding.has_value() ? 1 : 0);
  if (crowding) w.f64(*crowding);
  w.u8(lineage.has_value() ? 1 : 0);
  if (lineage) {
    w.u32(static_cast<std::uint32_t>(lineage->parents.size()));
    for (const auto& p : lineage->parents) w.str(p);
    w.str(lineage->op);
  }
  return w.take();
}

Candidate Candidate::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  Candidate c;
  c.id = r.str();
  c.tmpl = template_from_canonical_bytes(r.str());
  c.genome = ParameterGenome::from_canonical_bytes(r.str());
  if (r.u8() != 0) {
    ObjectiveVector v;
    std::uint32_t n = r.u32();
    v.values.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) v.values.push_back(r.f64());
    c.objectives = std::move(v);
  }
  if (r.u8() != 0) c.rank = static_cast<int>(r.u32());
  if (r.u8() != 0) c.crowding = r.f64();
  if (r.u8() != 0) {
    Lineage l;
    std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) l.parents.push_back(r.str());
    l.op = r.str();
    c.lineage = std::move(l);
  }
  return c;
}

nlohmann::json Candidate::to_json() const {
  nlohmann::json j = {{"id", id},
                      {"template", intentc::to_json(tmpl)},
                      {"template_text", to_text(tmpl)},
                      {"genome", genome.to_json()},
                      {"params", genome.decoded_json()},
                      {"config_digest", config_digest().hex()}};
  if (objectives) j["objectives"] = objectives->values;
  if (rank) j["rank"] = *rank;
  if (crowding) {
    if (std::isinf(*crowding)) j["crowding"] = "inf";
    else j["crowding"] = *crowding;
  }
  if (lineage) j["lineage"] = {{"parents", lineage->parents}, {"op", lineage->op}};
  return j;
}

Candidate Candidate::from_json(const nlohmann::json& j) {
  Candidate c;
  c.id = j.at("id").get<std::string>();
  c.tmpl = template_from_json(j.at("template"));
  c.genome = ParameterGenome::from_json(j.at("genome"));
  if (j.contains("objectives")) c.objectives = ObjectiveVector{j.at("objectives").get<std::vector<double>>()};
  if (j.contains("rank")) c.rank = j.at("rank").get<int>();
  if (j.contains("crowding")) {
    if (j.at("crowding").is_string()) c.crowding = std::numeric_limits<double>::infinity();
    else c.crowding = j.at("crowding").get<double>();
  }
  if (j.contains("lineage")) {
    c.lineage = Lineage{j.at("lineage").at("parents").get<std::vector<std::string>>(),
                        j.at("lineage").at("op").get<std::string>()};
  }
  return c;
}

}  // namespace intentc
