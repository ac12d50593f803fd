#pragma once

#include <cstdint>
#include <random>

namespace powergames {

/// Uniform draw in the open interval (0, 1) built directly from engine output,
/// so streams are bit-identical across platforms (unlike
/// std::uniform_real_distribution, whose mapping is implementation-defined).
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace powergames
