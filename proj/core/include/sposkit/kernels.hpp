#pragma once

#include "sposkit/types.hpp"

namespace sposkit {

enum class BandwidthMode { fixed, median_heuristic };

/// RBF kernel K(z) = exp(-|z|^2 / bandwidth_sq) acting on particle differences.
///
/// In median-heuristic mode `bandwidth_sq` is only a placeholder; samplers
/// call resolve_kernel() on the current ensemble before every interaction
/// step.
struct KernelSpec {
  double bandwidth_sq = 1.0;
  BandwidthMode mode = BandwidthMode::fixed;
  // Value returned by the median heuristic when every pairwise distance is 0.
  double degenerate_floor = 1e-6;

  static KernelSpec fixed(double bandwidth_sq) { return {bandwidth_sq, BandwidthMode::fixed, 1e-6}; }
  static KernelSpec median_heuristic(double floor = 1e-6) {
    return {1.0, BandwidthMode::median_heuristic, floor};
  }
};

double kernel_eval(const VectorRef& z, const KernelSpec& spec);

/// Analytic gradient -(2 / bandwidth_sq) K(z) z.
Vector kernel_grad(const VectorRef& z, const KernelSpec& spec);

/// med^2 / max(ln M, 1) where med is the median of the M(M-1)/2 pairwise
/// Euclidean distances between rows of `positions`. For an even count the
/// median is the mean of the two middle values.
double median_bandwidth(const Matrix& positions, double degenerate_floor = 1e-6);

/// Returns a fixed-mode spec with the bandwidth to use for `positions`.
KernelSpec resolve_kernel(const KernelSpec& spec, const Matrix& positions);

// Throws ConfigError unless bandwidth_sq is finite and positive.
void check_bandwidth(const KernelSpec& spec);

}  // namespace sposkit
