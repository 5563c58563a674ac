#include "sposkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sposkit/errors.hpp"

namespace sposkit {

namespace {

void check_finite(const VectorRef& z) {
  if (!z.allFinite()) throw DomainError("kernel argument has non-finite components");
}

}  // namespace

void check_bandwidth(const KernelSpec& spec) {
  if (!(spec.bandwidth_sq > 0.0) || !std::isfinite(spec.bandwidth_sq)) {
    throw ConfigError("kernel bandwidth_sq must be positive and finite, got " +
                      std::to_string(spec.bandwidth_sq));
  }
}

double kernel_eval(const VectorRef& z, const KernelSpec& spec) {
  check_bandwidth(spec);
  check_finite(z);
  return std::exp(-z.squaredNorm() / spec.bandwidth_sq);
}

Vector kernel_grad(const VectorRef& z, const KernelSpec& spec) {
  check_bandwidth(spec);
  check_finite(z);
  const double k = std::exp(-z.squaredNorm() / spec.bandwidth_sq);
  return (-2.0 / spec.bandwidth_sq * k) * z;
}

namespace {

double finish_bandwidth(double med, Eigen::Index m, double degenerate_floor) {
  if (med == 0.0) return degenerate_floor;
  const double log_m = std::max(std::log(static_cast<double>(m)), 1.0);
  return std::max(med * med / log_m, degenerate_floor);
}

// Number of pairs i < j with sorted[j] - sorted[i] <= t.
std::size_t pairs_within(const std::vector<double>& sorted, double t) {
  std::size_t count = 0;
  std::size_t lo = 0;
  for (std::size_t j = 1; j < sorted.size(); ++j) {
    while (sorted[j] - sorted[lo] > t) ++lo;
    count += j - lo;
  }
  return count;
}

// k-th smallest (0-based) pairwise distance of a 1-D sample in O(M log M)
// without materializing all M(M-1)/2 distances.
double kth_pairwise_distance_1d(std::vector<double> sorted, std::size_t k) {
  std::sort(sorted.begin(), sorted.end());
  double lo = -1.0;  // count(lo) <= k
  double hi = sorted.back() - sorted.front();  // count(hi) > k
  std::size_t count_lo = 0;
  std::size_t count_hi = sorted.size() * (sorted.size() - 1) / 2;
  while (count_hi - count_lo > 64) {
    const double mid = lo < 0.0 ? 0.5 * hi : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const std::size_t c = pairs_within(sorted, mid);
    if (c > k) {
      hi = mid;
      count_hi = c;
    } else {
      lo = mid;
      count_lo = c;
    }
  }
  // Remaining candidates lie in (lo, hi].
  std::vector<double> band;
  std::size_t start = 0;
  for (std::size_t j = 1; j < sorted.size(); ++j) {
    while (sorted[j] - sorted[start] > hi) ++start;
    for (std::size_t i = start; i < j && sorted[j] - sorted[i] > lo; ++i) {
      band.push_back(sorted[j] - sorted[i]);
    }
  }
  const auto nth = band.begin() + static_cast<std::ptrdiff_t>(k - count_lo);
  std::nth_element(band.begin(), nth, band.end());
  return *nth;
}

}  // namespace

double median_bandwidth(const Matrix& positions, double degenerate_floor) {
  const Eigen::Index m = positions.rows();
  if (m < 2) throw PreconditionError("median_bandwidth needs at least two particles");

  if (positions.cols() == 1) {
    const std::vector<double> xs(positions.data(), positions.data() + m);
    const std::size_t n = static_cast<std::size_t>(m * (m - 1) / 2);
    double med = kth_pairwise_distance_1d(xs, n / 2);
    if (n % 2 == 0) med = 0.5 * (med + kth_pairwise_distance_1d(xs, n / 2 - 1));
    return finish_bandwidth(med, m, degenerate_floor);
  }

  // Work with squared distances; sqrt is monotone so the order is unchanged.
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  const Eigen::Index d = positions.cols();
  const double* x = positions.data();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double t = x[i * d + c] - x[j * d + c];
        s += t * t;
      }
      sq.push_back(s);
    }
  }

  const std::size_t n = sq.size();
  const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(sq.begin(), mid, sq.end());
  double med = std::sqrt(*mid);
  if (n % 2 == 0) med = 0.5 * (med + std::sqrt(*std::max_element(sq.begin(), mid)));
  return finish_bandwidth(med, m, degenerate_floor);
}

KernelSpec resolve_kernel(const KernelSpec& spec, const Matrix& positions) {
  if (spec.mode == BandwidthMode::fixed) {
    check_bandwidth(spec);
    return spec;
  }
  if (positions.rows() < 2) return KernelSpec::fixed(spec.degenerate_floor);
  return KernelSpec::fixed(median_bandwidth(positions, spec.degenerate_floor));
}

}  // namespace sposkit
