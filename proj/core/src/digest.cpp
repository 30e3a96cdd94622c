#include "intentc/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "intentc/errors.hpp"

namespace intentc {

static const char* kHexDigits = "0123456789abcdef";

std::string Digest::hex() const {
  std::string out;
  out.reserve(64);
  for (unsigned char b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Digest Digest::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw TruncatedData("digest hex must be 64 chars");
  Digest d;
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = hex_val(hex[2 * i]);
    int lo = hex_val(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw TruncatedData("invalid digest hex");
    d.bytes[i] = static_cast<unsigned char>((hi << 4) | lo);
  }
  return d;
}

Digest sha256(std::string_view payload) {
  Hasher h;
  h.update(payload);
  return h.finish();
}

Hasher::Hasher() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  ctx_ = ctx;
}

Hasher::~Hasher() {
  if (ctx_ != nullptr) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

Hasher& Hasher::update(std::string_view data) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1) {
    throw std::runtime_error("sha256 update failed");
  }
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  unsigned char le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), le, 8) != 1) {
    throw std::runtime_error("sha256 update failed");
  }
  return *this;
}

Digest Hasher::finish() {
  Digest d;
  unsigned int n = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.bytes.data(), &n) != 1 || n != 32) {
    throw std::runtime_error("sha256 final failed");
  }
  return d;
}

}  // namespace intentc
