#include "sposkit/rng.hpp"

#include <random>

namespace sposkit {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  SplitMix64 g(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return g();
}

}  // namespace

SplitMix64 substream(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix(0x2545f4914f6cdd1dULL, seed);
  h = mix(h, static_cast<std::uint64_t>(tag));
  h = mix(h, a);
  h = mix(h, b);
  return SplitMix64(h);
}

Matrix gaussian_noise(std::uint64_t seed, std::uint64_t iteration, Eigen::Index particles,
                      Eigen::Index dim) {
  Matrix out(particles, dim);
  for (Eigen::Index i = 0; i < particles; ++i) {
    auto gen = substream(seed, StreamTag::noise, static_cast<std::uint64_t>(i), iteration);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < dim; ++c) out(i, c) = normal(gen);
  }
  return out;
}

}  // namespace sposkit
