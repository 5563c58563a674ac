#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sposkit/targets.hpp"
#include "sposkit/types.hpp"

namespace sposkit {

/// sqrt(sum_{i,j} |theta_i - theta_j|^2) over ordered pairs. Exactly zero
/// for coincident particles.
double epd(const Matrix& positions);

/// |(1/M) sum_i f(theta_i) - reference|.
double test_fn_error(const Matrix& positions, const std::function<double(const VectorRef&)>& f,
                     double reference);

/// Midpoint-rule estimate of W1 between the samples and a reference given by
/// its quantile function: (1/M) sum_i |x_(i) - Q((i - 1/2) / M)|.
/// Throws DomainError if Q decreases on the evaluation grid.
double w1_empirical_1d(std::span<const double> samples, const std::function<double(double)>& quantile);

/// Number of centers with at least one particle within `radius`.
std::size_t mode_coverage(const Matrix& positions, std::span<const Vector> centers, double radius);

/// Quantile function of the empirical distribution of `samples`
/// (left-continuous inverse CDF).
std::function<double(double)> empirical_quantile(std::vector<double> samples);

struct DiagnosticRecord {
  std::size_t iteration = 0;
  double epd = 0.0;
  std::optional<double> test_fn_error;
  std::optional<double> w1;
  std::optional<std::size_t> modes_covered;
};

/// What to compute at each diagnostic point. Empty members are skipped.
struct DiagnosticsSpec {
  std::function<double(const VectorRef&)> test_function;
  std::optional<double> reference_expectation;
  std::function<double(double)> reference_quantile;
  std::vector<Vector> mode_centers;
  double mode_radius = 0.35;

  /// f(theta) = theta^2 against the target's second moment, its quantile
  /// function and mode centers, whichever the target provides.
  static DiagnosticsSpec from_target(const TargetModel& target);
};

DiagnosticRecord compute_record(const Matrix& positions, std::size_t iteration,
                                const DiagnosticsSpec& spec);

}  // namespace sposkit
