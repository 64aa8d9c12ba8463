#include "layerlab/rng.hpp"

#include <numbers>

namespace layerlab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path, Stream stream) {
  return mix64(mix64(mix64(seed) ^ path) ^ static_cast<std::uint64_t>(stream));
}

Rng make_rng(std::uint64_t seed, std::uint64_t path, Stream stream) {
  return Rng(substream_seed(seed, path, stream));
}

// Box-Muller; the second variate is discarded so every call consumes exactly
// two words and the stream position stays predictable.
double standard_normal(Rng& g) {
  const double u1 = uniform_open(g);
  const double u2 = uniform_open(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace layerlab
