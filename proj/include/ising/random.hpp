#pragma once

#include <cstdint>
#include <random>

namespace ising {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; mixes (master_seed, stream_index) into an
/// independent seed so that every chain owns a reproducible stream.
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t stream_index);

inline Rng make_rng(std::uint64_t master_seed, std::uint64_t stream_index = 0) {
  return Rng(split_seed(master_seed, stream_index));
}

/// Uniform double in [0, 1) with 53 random bits; independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Standard normal deviate (Marsaglia polar method).
double standard_normal(Rng& rng);

}  // namespace ising
