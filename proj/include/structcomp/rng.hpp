#pragma once

#include <cstdint>
#include <random>

namespace structcomp {

using Rng = std::mt19937_64;

// Independent, named random streams derived from one user seed. Each pipeline
// stage draws from its own stream so that changing one stage (e.g. adding a
// view augmentation) never shifts the random numbers seen by another.
enum class Stream : std::uint32_t {
  partition = 1,
  init = 2,
  negatives = 3,
  augment = 4,
  probe = 5,
  data = 6,
  theory = 7,
  eval = 8,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace structcomp
