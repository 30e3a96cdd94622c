#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace intentc {

// A named deterministic random stream. The engine is std::mt19937_64, whose
// output sequence is fixed by the standard, so seeded draws are bit-identical
// across platforms. All derived quantities (bounded ints, unit reals) use our
// own reductions because the standard distributions are not portable.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::string name, std::uint64_t seed) : name_(std::move(name)), eng_(seed) {}

  const std::string& name() const { return name_; }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n) by rejection sampling; n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  // Uniform in [0, 1) with 53 bits of precision.
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool coin(double p) { return real01() < p; }

  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::string name_;
  std::mt19937_64 eng_;
};

// The per-run set of independent streams, all derived from one master seed.
// Stream seeds are keyed hashes of (master, name), so adding a stream or
// reordering call sites in one stream never perturbs another.
class RngSet {
 public:
  explicit RngSet(std::uint64_t master_seed);

  std::uint64_t master_seed() const { return master_seed_; }
  RngStream& stream(const std::string& name);

  std::map<std::string, std::string> save_states() const;
  void load_states(const std::map<std::string, std::string>& states);

 private:
  std::uint64_t master_seed_;
  std::map<std::string, RngStream> streams_;
};

}  // namespace intentc
