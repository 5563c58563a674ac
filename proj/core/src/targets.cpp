#include "sposkit/targets.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "sposkit/errors.hpp"

namespace sposkit {

TargetModel::TargetModel(std::string name, std::size_t dim, std::size_t num_terms,
                         TermGradient term_gradient, TermEnergy term_energy,
                         BatchGradient batch_gradient, TargetReference reference)
    : name_(std::move(name)),
      dim_(dim),
      num_terms_(num_terms),
      term_gradient_(std::move(term_gradient)),
      term_energy_(std::move(term_energy)),
      batch_gradient_(std::move(batch_gradient)),
      reference_(std::move(reference)),
      all_terms_(num_terms) {
  if (dim_ == 0) throw ConfigError("target dimension must be positive");
  if (num_terms_ == 0) throw ConfigError("target must have at least one term");
  if (!term_gradient_) throw ConfigError("target needs a per-term gradient");
  std::iota(all_terms_.begin(), all_terms_.end(), std::size_t{0});
}

Vector TargetModel::term_gradient(const VectorRef& theta, std::size_t q) const {
  if (q >= num_terms_) {
    throw DomainError("term index " + std::to_string(q) + " out of range for " +
                      std::to_string(num_terms_) + " terms");
  }
  return term_gradient_(theta, q);
}

double TargetModel::term_energy(const VectorRef& theta, std::size_t q) const {
  if (!term_energy_) throw PreconditionError("target '" + name_ + "' has no energy terms");
  if (q >= num_terms_) throw DomainError("term index out of range");
  return term_energy_(theta, q);
}

Vector TargetModel::batch_gradient_sum(const VectorRef& theta,
                                       std::span<const std::size_t> batch) const {
  for (std::size_t q : batch) {
    if (q >= num_terms_) {
      throw DomainError("batch index " + std::to_string(q) + " out of range for " +
                        std::to_string(num_terms_) + " terms");
    }
  }
  if (batch_gradient_) return batch_gradient_(theta, batch);
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (std::size_t q : batch) sum += term_gradient_(theta, q);
  return sum;
}

Vector TargetModel::gradient(const VectorRef& theta) const {
  return batch_gradient_sum(theta, all_terms_);
}

double TargetModel::energy(const VectorRef& theta) const {
  double sum = 0.0;
  for (std::size_t q = 0; q < num_terms_; ++q) sum += term_energy(theta, q);
  return sum;
}

TargetModel gaussian1d_target(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
    throw ConfigError("gaussian1d_target needs finite mean and positive variance");
  }
  TargetReference ref;
  ref.mean = mean;
  ref.variance = variance;
  ref.second_moment = variance + mean * mean;
  const double sd = std::sqrt(variance);
  ref.quantile = [mean, sd](double u) {
    return boost::math::quantile(boost::math::normal_distribution<double>(mean, sd), u);
  };
  return TargetModel(
      "gaussian1d", 1, 1,
      [mean, variance](const VectorRef& theta, std::size_t) -> Vector {
        return (theta.array() - mean).matrix() / variance;
      },
      [mean, variance](const VectorRef& theta, std::size_t) {
        const double z = theta(0) - mean;
        return z * z / (2.0 * variance);
      },
      {}, std::move(ref));
}

TargetModel conjugate_posterior_target(std::vector<double> data) {
  if (data.empty()) throw ConfigError("conjugate_posterior_target needs at least one datum");
  for (double x : data) {
    if (!std::isfinite(x)) throw ConfigError("conjugate_posterior_target data must be finite");
  }
  const auto n = static_cast<double>(data.size());
  const double sum = std::accumulate(data.begin(), data.end(), 0.0);

  TargetReference ref;
  ref.mean = sum / (n + 1.0);
  ref.variance = 1.0 / (n + 1.0);
  ref.second_moment = *ref.variance + *ref.mean * *ref.mean;
  const double mean = *ref.mean;
  const double sd = std::sqrt(*ref.variance);
  ref.quantile = [mean, sd](double u) {
    return boost::math::quantile(boost::math::normal_distribution<double>(mean, sd), u);
  };

  auto shared = std::make_shared<const std::vector<double>>(std::move(data));
  auto grad = [shared, n](const VectorRef& theta, std::size_t q) -> Vector {
    Vector g(1);
    g(0) = (theta(0) - (*shared)[q]) + theta(0) / n;
    return g;
  };
  auto energy = [shared, n](const VectorRef& theta, std::size_t q) {
    const double r = theta(0) - (*shared)[q];
    return 0.5 * r * r + theta(0) * theta(0) / (2.0 * n);
  };
  auto batch = [shared, n](const VectorRef& theta, std::span<const std::size_t> idx) -> Vector {
    double data_sum = 0.0;
    for (std::size_t q : idx) data_sum += (*shared)[q];
    const auto b = static_cast<double>(idx.size());
    Vector g(1);
    g(0) = b * theta(0) * (1.0 + 1.0 / n) - data_sum;
    return g;
  };
  return TargetModel("conjugate_posterior", 1, shared->size(), grad, energy, batch,
                     std::move(ref));
}

namespace {

// Exponent g(theta) of the multimode potential U = exp(g) and its derivative.
std::pair<double, double> multimode_exponent(double theta) {
  double s = 0.0;
  double ds = 0.0;
  for (int i = 1; i <= 10; ++i) {
    const double w = 0.25 * std::numbers::pi * i;
    const double c = kMultimodeCoefficients[i - 1];
    s += c * std::sin(w * (theta + 4.0));
    ds += c * w * std::cos(w * (theta + 4.0));
  }
  return {0.75 * theta * theta - 1.5 * s, 1.5 * theta - 1.5 * ds};
}

double multimode_energy(double theta) { return std::exp(multimode_exponent(theta).first); }

std::vector<Vector> multimode_centers() {
  constexpr int kPoints = 20001;
  constexpr double kLo = -5.0;
  constexpr double kHi = 5.0;
  constexpr double kThreshold = 10.0;
  std::vector<double> u(kPoints);
  const double dx = (kHi - kLo) / (kPoints - 1);
  for (int k = 0; k < kPoints; ++k) u[k] = multimode_energy(kLo + k * dx);

  std::vector<Vector> centers;
  for (int k = 1; k + 1 < kPoints; ++k) {
    if (u[k] < u[k - 1] && u[k] < u[k + 1] && u[k] < kThreshold) {
      centers.push_back(Vector::Constant(1, kLo + k * dx));
    }
  }
  return centers;
}

}  // namespace

TargetModel multimode1d_target() {
  TargetReference ref;
  ref.mode_centers = multimode_centers();
  return TargetModel(
      "multimode1d", 1, 1,
      [](const VectorRef& theta, std::size_t) -> Vector {
        const auto [g, dg] = multimode_exponent(theta(0));
        return Vector::Constant(1, std::exp(g) * dg);
      },
      [](const VectorRef& theta, std::size_t) { return multimode_energy(theta(0)); }, {},
      std::move(ref));
}

Vector stochastic_gradient(const TargetModel& target, const VectorRef& position,
                           std::span<const std::size_t> batch) {
  if (batch.empty()) throw PreconditionError("stochastic_gradient needs a non-empty batch");
  if (batch.size() > target.num_terms()) {
    throw PreconditionError("batch larger than the number of terms");
  }
  const double scale =
      static_cast<double>(target.num_terms()) / static_cast<double>(batch.size());
  Vector g = target.batch_gradient_sum(position, batch);
  if (batch.size() != target.num_terms()) g *= scale;
  return g;
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t b, SplitMix64& rng) {
  if (b == 0 || b > n) {
    throw PreconditionError("sample_batch needs 1 <= B <= N (B=" + std::to_string(b) +
                            ", N=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> out;
  out.reserve(b);
  if (b == n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  std::vector<std::size_t> population(n);
  std::iota(population.begin(), population.end(), std::size_t{0});
  std::sample(population.begin(), population.end(), std::back_inserter(out), b, rng);
  return out;
}

std::vector<double> gaussian_data(std::size_t count, double mean, double sd, std::uint64_t seed) {
  auto gen = substream(seed, StreamTag::data, 0);
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> out(count);
  for (double& x : out) x = normal(gen);
  return out;
}

}  // namespace sposkit
