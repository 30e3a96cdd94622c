#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentc/rng.hpp"

namespace intentc {

// Declared integer range for one enumerable parameter.
struct ParamSpec {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool operator==(const ParamSpec&) const = default;
};

// Bits needed to cover [lo, hi]: ceil(log2(hi - lo + 1)); 0 when hi == lo.
int param_bit_width(std::int64_t lo, std::int64_t hi);

// Binary genome over a fixed list of integer parameters. Bits are stored
// most-significant first; decoding clamps into [lo, hi].
struct ParameterGenome {
  struct Entry {
    ParamSpec spec;
    std::vector<std::uint8_t> bits;  // each 0 or 1, size == param_bit_width

    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }

  static ParameterGenome from_specs(const std::vector<ParamSpec>& specs);

  std::int64_t decode(std::size_t index) const;
  std::int64_t decode(const std::string& name) const;  // throws if absent
  bool has(const std::string& name) const;

  void randomize(RngStream& rng);

  std::string canonical_bytes() const;
  static ParameterGenome from_canonical_bytes(std::string_view bytes);

  nlohmann::json to_json() const;
  // Decoded values only, for reports.
  nlohmann::json decoded_json() const;
  static ParameterGenome from_json(const nlohmann::json& j);

  bool operator==(const ParameterGenome&) const = default;
};

// Flips each bit independently with probability bitflip_prob.
ParameterGenome mutate_genome(const ParameterGenome& g, double bitflip_prob, RngStream& rng);

}  // namespace intentc
