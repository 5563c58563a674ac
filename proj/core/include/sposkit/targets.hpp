#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sposkit/rng.hpp"
#include "sposkit/types.hpp"

namespace sposkit {

/// Closed-form facts about a target used by the diagnostics. Any field may be
/// absent.
struct TargetReference {
  std::optional<double> mean;
  std::optional<double> variance;
  // E[theta^2] for one-dimensional targets.
  std::optional<double> second_moment;
  std::function<double(double)> quantile;
  std::vector<Vector> mode_centers;
};

/// Potential U(theta) = sum_q U_q(theta) with per-term gradients F_q.
///
/// Term indices are zero-based: q in [0, num_terms).
class TargetModel {
 public:
  using TermGradient = std::function<Vector(const VectorRef&, std::size_t)>;
  using TermEnergy = std::function<double(const VectorRef&, std::size_t)>;
  // Optional fast path returning sum_{q in batch} F_q(theta).
  using BatchGradient = std::function<Vector(const VectorRef&, std::span<const std::size_t>)>;

  TargetModel(std::string name, std::size_t dim, std::size_t num_terms, TermGradient term_gradient,
              TermEnergy term_energy = {}, BatchGradient batch_gradient = {},
              TargetReference reference = {});

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_terms() const { return num_terms_; }
  bool has_energy() const { return static_cast<bool>(term_energy_); }
  const TargetReference& reference() const { return reference_; }

  Vector term_gradient(const VectorRef& theta, std::size_t q) const;
  double term_energy(const VectorRef& theta, std::size_t q) const;

  // Unscaled sum of F_q over `batch`. Indices are validated.
  Vector batch_gradient_sum(const VectorRef& theta, std::span<const std::size_t> batch) const;

  // Full gradient F = sum over all terms.
  Vector gradient(const VectorRef& theta) const;
  double energy(const VectorRef& theta) const;

 private:
  std::string name_;
  std::size_t dim_;
  std::size_t num_terms_;
  TermGradient term_gradient_;
  TermEnergy term_energy_;
  BatchGradient batch_gradient_;
  TargetReference reference_;
  std::vector<std::size_t> all_terms_;
};

TargetModel gaussian1d_target(double mean, double variance);

/// Conjugate model x_q ~ N(theta, 1), theta ~ N(0, 1). Each term carries one
/// likelihood factor plus a 1/N share of the prior, so minibatch gradients
/// stay unbiased.
TargetModel conjugate_posterior_target(std::vector<double> data);

/// One-dimensional density with U(theta) = exp(3/4 theta^2 - 3/2 sum_i c_i
/// sin(pi i (theta + 4) / 4)). Mode centers are located on a 20001-point grid
/// over [-5, 5] (strict local minima with U < 10).
TargetModel multimode1d_target();

// Coefficients c_1..c_10 of the multimode potential.
inline constexpr double kMultimodeCoefficients[10] = {-0.47, -0.83, -0.71, -0.02, 0.24,
                                                      0.01,  0.27,  -0.37, 0.87,  -0.37};

/// (N / B) * sum_{q in batch} F_q(position).
Vector stochastic_gradient(const TargetModel& target, const VectorRef& position,
                           std::span<const std::size_t> batch);

/// Uniform size-B subset of {0, ..., N-1} without replacement, ascending.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t b, SplitMix64& rng);

/// `count` draws from N(mean, sd^2) using the (seed, data) substream.
std::vector<double> gaussian_data(std::size_t count, double mean, double sd, std::uint64_t seed);

}  // namespace sposkit
