#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace layerlab {

using Rng = std::mt19937_64;

/// Independent random sequences of one shot-noise realization. Each sequence
/// gets its own substream so optional sequences never perturb the others.
enum class Stream : std::uint64_t {
  Arrivals = 1,
  Times = 2,
  Directions = 3,
  Rejects = 4,
  Indices = 5,
  Auxiliary = 6,
  Companion = 7,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic seed for (master seed, path index, stream); counter-based so
/// any path can be regenerated without replaying the others.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path, Stream stream);

Rng make_rng(std::uint64_t seed, std::uint64_t path, Stream stream);

/// Uniform on the open interval (0, 1), 53 random bits.
inline double uniform_open(Rng& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unit-rate exponential; strictly positive.
inline double exponential(Rng& g) { return -std::log(uniform_open(g)); }

double standard_normal(Rng& g);

}  // namespace layerlab
