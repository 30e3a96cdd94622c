#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace intentc {

// SHA-256 digest. Used as the content key for caches, trace payload
// addressing, and config fingerprints.
struct Digest {
  std::array<unsigned char, 32> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const;
  std::string short_hex(std::size_t n = 12) const { return hex().substr(0, n); }

  // Parses a 64-char lowercase hex string.
  static Digest from_hex(std::string_view hex);
};

Digest sha256(std::string_view payload);

// Content key over a canonical byte serialization. Equal payloads map to
// equal keys; the digest is 256 bits so collisions are negligible.
inline Digest content_key(std::string_view canonical_payload) { return sha256(canonical_payload); }

// Incremental hasher for composite keys.
class Hasher {
 public:
  Hasher();
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& update(std::string_view data);
  Hasher& update_u64(std::uint64_t v);
  Digest finish();

 private:
  void* ctx_;
};

}  // namespace intentc
