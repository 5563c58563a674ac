#include "sposkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sposkit/errors.hpp"

namespace sposkit {

double epd(const Matrix& positions) {
  const Eigen::Index m = positions.rows();
  const Eigen::Index d = positions.cols();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* a = positions.row(i).data();
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double* b = positions.row(j).data();
      double sq = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) sq += (a[c] - b[c]) * (a[c] - b[c]);
      sum += sq;
    }
  }
  return std::sqrt(2.0 * sum);
}

double test_fn_error(const Matrix& positions, const std::function<double(const VectorRef&)>& f,
                     double reference) {
  if (positions.rows() == 0) throw PreconditionError("test_fn_error needs at least one particle");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    sum += f(positions.row(i).transpose());
  }
  return std::abs(sum / static_cast<double>(positions.rows()) - reference);
}

double w1_empirical_1d(std::span<const double> samples,
                       const std::function<double(double)>& quantile) {
  if (samples.empty()) throw PreconditionError("w1_empirical_1d needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::ranges::sort(sorted);
  const auto m = static_cast<double>(sorted.size());

  double sum = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double q = quantile((static_cast<double>(i) + 0.5) / m);
    if (std::isnan(q) || q < prev) {
      throw DomainError("reference quantile is not monotone at u = " +
                        std::to_string((static_cast<double>(i) + 0.5) / m));
    }
    prev = q;
    sum += std::abs(sorted[i] - q);
  }
  return sum / m;
}

std::size_t mode_coverage(const Matrix& positions, std::span<const Vector> centers, double radius) {
  if (!(radius > 0.0)) throw ConfigError("mode radius must be positive");
  if (centers.empty()) throw PreconditionError("mode_coverage needs at least one center");
  const double r2 = radius * radius;
  std::size_t covered = 0;
  for (const Vector& c : centers) {
    for (Eigen::Index i = 0; i < positions.rows(); ++i) {
      if ((positions.row(i).transpose() - c).squaredNorm() <= r2) {
        ++covered;
        break;
      }
    }
  }
  return covered;
}

std::function<double(double)> empirical_quantile(std::vector<double> samples) {
  if (samples.empty()) throw PreconditionError("empirical_quantile needs samples");
  std::ranges::sort(samples);
  return [s = std::move(samples)](double u) {
    const auto m = static_cast<double>(s.size());
    auto idx = static_cast<std::size_t>(std::ceil(u * m));
    idx = std::clamp<std::size_t>(idx, 1, s.size());
    return s[idx - 1];
  };
}

DiagnosticsSpec DiagnosticsSpec::from_target(const TargetModel& target) {
  DiagnosticsSpec spec;
  const auto& ref = target.reference();
  if (target.dim() == 1) {
    spec.test_function = [](const VectorRef& theta) { return theta(0) * theta(0); };
    spec.reference_expectation = ref.second_moment;
    spec.reference_quantile = ref.quantile;
  }
  spec.mode_centers = ref.mode_centers;
  return spec;
}

DiagnosticRecord compute_record(const Matrix& positions, std::size_t iteration,
                                const DiagnosticsSpec& spec) {
  DiagnosticRecord rec;
  rec.iteration = iteration;
  rec.epd = epd(positions);
  if (spec.test_function && spec.reference_expectation) {
    rec.test_fn_error = test_fn_error(positions, spec.test_function, *spec.reference_expectation);
  }
  if (spec.reference_quantile && positions.cols() == 1) {
    std::vector<double> xs(positions.data(), positions.data() + positions.rows());
    rec.w1 = w1_empirical_1d(xs, spec.reference_quantile);
  }
  if (!spec.mode_centers.empty()) {
    rec.modes_covered = mode_coverage(positions, spec.mode_centers, spec.mode_radius);
  }
  return rec;
}

}  // namespace sposkit
