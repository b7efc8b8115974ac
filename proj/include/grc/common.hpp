#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace grc {

// Symbol code: 0..sigma-1 are input bytes, sigma+ are grammar rules in
// creation order. Codes are never reused, even after pruning.
using Code = std::uint64_t;

inline constexpr std::uint32_t kSigma = 256;

inline constexpr bool is_terminal(Code c, std::uint32_t sigma = kSigma) {
  return c < sigma;
}

// Corrupt or truncated compressed input.
struct CorruptStreamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output produced but it does not match what the header promised.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A broken internal invariant, i.e. a bug, not bad input.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer. Seedless so containers and digests are reproducible
// across machines.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t digram_hash(Code x, Code y) {
  return mix64(mix64(x) ^ (y + 0x9e3779b97f4a7c15ull));
}

// Smallest w with 2^w >= x; 0 for x <= 1.
inline constexpr std::uint32_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0u : static_cast<std::uint32_t>(std::bit_width(x - 1));
}

}  // namespace grc
