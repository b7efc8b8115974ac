#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "grc/common.hpp"

namespace grc {

// Maps a raw 64-bit draw onto [0,1) without touching the distribution
// machinery, whose output is implementation-defined across libraries.
inline double unit_draw(std::uint64_t r) { return static_cast<double>(r >> 11) * 0x1.0p-53; }

// Deterministic repetitive corpus: `copies` mutated copies of one random
// string over ACGT. Mutations substitute one of the other three letters, so
// rate 0 reproduces the base exactly and the alphabet never leaks past four.
inline void gen_corpus(std::ostream& out, std::uint64_t seed, std::uint64_t base_size,
                       std::uint64_t copies, double mutation_rate) {
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
    throw std::invalid_argument("mutation rate must be in [0,1]");
  if (base_size == 0 || copies == 0) return;
  static constexpr char kLetters[4] = {'A', 'C', 'G', 'T'};
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> base(base_size);
  for (auto& b : base) b = static_cast<std::uint8_t>(rng() % 4);
  std::vector<char> buf(base_size);
  for (std::uint64_t c = 0; c < copies; ++c) {
    for (std::uint64_t i = 0; i < base_size; ++i) {
      std::uint8_t letter = base[i];
      if (mutation_rate > 0.0 && unit_draw(rng()) < mutation_rate)
        letter = static_cast<std::uint8_t>((letter + 1 + rng() % 3) & 3);
      buf[i] = kLetters[letter];
    }
    out.write(buf.data(), static_cast<std::streamsize>(base_size));
    if (!out) throw IoError("write failure");
  }
}

}  // namespace grc
