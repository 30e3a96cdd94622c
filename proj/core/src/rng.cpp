#include "intentc/rng.hpp"

#include <sstream>
#include <stdexcept>

#include "intentc/digest.hpp"

namespace intentc {

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below(0)");
  const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= bound);
  return v % n;
}

std::string RngStream::save_state() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void RngStream::load_state(const std::string& state) {
  std::istringstream is(state);
  is >> eng_;
  if (is.fail()) throw std::runtime_error("bad rng state for stream '" + name_ + "'");
}

RngSet::RngSet(std::uint64_t master_seed) : master_seed_(master_seed) {}

RngStream& RngSet::stream(const std::string& name) {
  auto it = streams_.find(name);
  if (it != streams_.end()) return it->second;
  Hasher h;
  h.update("intentc.rng.v1");
  h.update_u64(master_seed_);
  h.update(name);
  Digest d = h.finish();
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
  auto [pos, _] = streams_.emplace(name, RngStream(name, seed));
  return pos->second;
}

std::map<std::string, std::string> RngSet::save_states() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, s] : streams_) out[name] = s.save_state();
  return out;
}

void RngSet::load_states(const std::map<std::string, std::string>& states) {
  for (const auto& [name, state] : states) stream(name).load_state(state);
}

}  // namespace intentc
