#include "intentc/genome.hpp"

#include <algorithm>
#include <stdexcept>

#include "intentc/byteio.hpp"
#include "intentc/errors.hpp"

namespace intentc {

int param_bit_width(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ConfigInvalid("param range has hi < lo");
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo);  // values: span + 1
  int bits = 0;
  while (span > 0) {
    ++bits;
    span >>= 1;
  }
  return bits;
}

ParameterGenome ParameterGenome::from_specs(const std::vector<ParamSpec>& specs) {
  ParameterGenome g;
  g.entries.reserve(specs.size());
  for (const auto& s : specs) {
    Entry e;
    e.spec = s;
    e.bits.assign(static_cast<std::size_t>(param_bit_width(s.lo, s.hi)), 0);
    g.entries.push_back(std::move(e));
  }
  return g;
}

std::int64_t ParameterGenome::decode(std::size_t index) const {
  const Entry& e = entries.at(index);
  std::uint64_t raw = 0;
  for (std::uint8_t b : e.bits) raw = (raw << 1) | (b & 1);
  std::int64_t v = e.spec.lo + static_cast<std::int64_t>(raw);
  return std::clamp(v, e.spec.lo, e.spec.hi);
}

std::int64_t ParameterGenome::decode(const std::string& name) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].spec.name == name) return decode(i);
  }
  throw std::out_of_range("no genome parameter named '" + name + "'");
}

bool ParameterGenome::has(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.spec.name == name) return true;
  }
  return false;
}

void ParameterGenome::randomize(RngStream& rng) {
  for (auto& e : entries) {
    for (auto& b : e.bits) b = static_cast<std::uint8_t>(rng.below(2));
  }
}

std::string ParameterGenome::canonical_bytes() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.str(e.spec.name);
    w.i64(e.spec.lo);
    w.i64(e.spec.hi);
    w.u32(static_cast<std::uint32_t>(e.bits.size()));
    for (std::uint8_t b : e.bits) w.u8(b);
  }
  return w.take();
}

ParameterGenome ParameterGenome::from_canonical_bytes(std::string_view bytes) {
  ByteReader r(bytes);
  ParameterGenome g;
  std::uint32_t n = r.u32();
  g.entries.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Entry e;
    e.spec.name = r.str();
    e.spec.lo = r.i64();
    e.spec.hi = r.i64();
    std::uint32_t nb = r.u32();
    e.bits.reserve(nb);
    for (std::uint32_t k = 0; k < nb; ++k) e.bits.push_back(r.u8());
    g.entries.push_back(std::move(e));
  }
  return g;
}

nlohmann::json ParameterGenome::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    std::string bits;
    for (std::uint8_t b : e.bits) bits.push_back(b != 0 ? '1' : '0');
    arr.push_back({{"name", e.spec.name}, {"lo", e.spec.lo}, {"hi", e.spec.hi}, {"bits", bits}});
  }
  return arr;
}

nlohmann::json ParameterGenome::decoded_json() const {
  nlohmann::json obj = nlohmann::json::object();
  for (std::size_t i = 0; i < entries.size(); ++i) obj[entries[i].spec.name] = decode(i);
  return obj;
}

ParameterGenome ParameterGenome::from_json(const nlohmann::json& j) {
  ParameterGenome g;
  for (const auto& e : j) {
    Entry entry;
    entry.spec.name = e.at("name").get<std::string>();
    entry.spec.lo = e.at("lo").get<std::int64_t>();
    entry.spec.hi = e.at("hi").get<std::int64_t>();
    auto bits = e.at("bits").get<std::string>();
    for (char c : bits) entry.bits.push_back(c == '1' ? 1 : 0);
    g.entries.push_back(std::move(entry));
  }
  return g;
}

ParameterGenome mutate_genome(const ParameterGenome& g, double bitflip_prob, RngStream& rng) {
  ParameterGenome out = g;
  for (auto& e : out.entries) {
    for (auto& b : e.bits) {
      if (rng.coin(bitflip_prob)) b ^= 1;
    }
  }
  return out;
}

}  // namespace intentc
