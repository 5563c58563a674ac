#pragma once

#include <cstdint>
#include <limits>

#include "sposkit/types.hpp"

namespace sposkit {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator so it can drive
/// the standard <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Purpose tags keep the random streams used for different things disjoint.
enum class StreamTag : std::uint64_t {
  init = 1,
  noise = 2,
  batch = 3,
  data = 4,
};

/// Counter-based substream derivation: the returned generator depends only on
/// (seed, tag, a, b), never on how many draws were taken elsewhere. Particles
/// and iterations can therefore be processed in any order or in parallel with
/// identical results.
SplitMix64 substream(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0);

/// Standard normal draws for every particle at one iteration. Row i comes from
/// the (seed, noise, i, iteration) substream.
Matrix gaussian_noise(std::uint64_t seed, std::uint64_t iteration, Eigen::Index particles,
                      Eigen::Index dim);

}  // namespace sposkit
