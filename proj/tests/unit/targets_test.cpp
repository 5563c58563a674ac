#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sposkit/errors.hpp"
#include "sposkit/rng.hpp"
#include "sposkit/targets.hpp"

namespace sposkit {
namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

// Independent long-double transcription of the five-mode potential.
long double multimode_u(long double t) {
  const long double pi = std::numbers::pi_v<long double>;
  long double s = 0.0L;
  for (int i = 1; i <= 10; ++i) s += kMultimodeCoefficients[i - 1] * std::sin(pi * i * (t + 4) / 4);
  return std::exp(0.75L * t * t - 1.5L * s);
}

std::vector<TargetModel> builtin_targets() {
  return {gaussian1d_target(2.0, 1.0), gaussian1d_target(-1.5, 0.3),
          conjugate_posterior_target(gaussian_data(200, 2.0, 1.0, 99)), multimode1d_target()};
}

TEST(Gaussian1d, GradientAndReference) {
  const TargetModel t = gaussian1d_target(2.0, 1.0);
  EXPECT_EQ(t.gradient(scalar(2.0))(0), 0.0);
  EXPECT_EQ(t.gradient(scalar(0.0))(0), -2.0);
  ASSERT_TRUE(t.reference().second_moment.has_value());
  EXPECT_EQ(*t.reference().second_moment, 5.0);
  EXPECT_EQ(*t.reference().mean, 2.0);
  EXPECT_EQ(*t.reference().variance, 1.0);
  EXPECT_NEAR(t.reference().quantile(0.5), 2.0, 1e-15);
  EXPECT_NEAR(t.reference().quantile(0.8413447460685429), 3.0, 1e-12);
}

TEST(Gaussian1d, RejectsNonPositiveVariance) {
  EXPECT_THROW(gaussian1d_target(0.0, 0.0), ConfigError);
  EXPECT_THROW(gaussian1d_target(0.0, -1.0), ConfigError);
}

TEST(ConjugatePosterior, SingleZeroDatum) {
  const TargetModel t = conjugate_posterior_target({0.0});
  EXPECT_EQ(t.gradient(scalar(0.0))(0), 0.0);
}

TEST(ConjugatePosterior, TwoDataMoments) {
  const TargetModel t = conjugate_posterior_target({1.0, 3.0});
  EXPECT_DOUBLE_EQ(*t.reference().mean, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(*t.reference().variance, 1.0 / 3.0);
  EXPECT_NEAR(t.gradient(scalar(4.0 / 3.0))(0), 0.0, 1e-15);
}

TEST(ConjugatePosterior, RejectsEmptyData) {
  EXPECT_THROW(conjugate_posterior_target({}), ConfigError);
}

TEST(ConjugatePosterior, MomentsMatchQuadrature) {
  const TargetModel t = conjugate_posterior_target(gaussian_data(1000, 2.0, 1.0, 20190101));
  const double mean = *t.reference().mean;
  const double var = *t.reference().variance;
  const double sd = std::sqrt(var);
  const double u0 = t.energy(scalar(mean));
  auto weight = [&](double th) { return std::exp(-(t.energy(scalar(th)) - u0)); };

  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double a = mean - 12.0 * sd;
  const double b = mean + 12.0 * sd;
  const double z = Q::integrate(weight, a, b, 15, 1e-14);
  const double m1 = Q::integrate([&](double th) { return th * weight(th); }, a, b, 15, 1e-14) / z;
  const double m2 =
      Q::integrate([&](double th) { return (th - m1) * (th - m1) * weight(th); }, a, b, 15, 1e-14) /
      z;
  EXPECT_LT(oracle::rel_err(mean, m1), 1e-8);
  EXPECT_LT(oracle::rel_err(var, m2), 1e-8);
}

TEST(Multimode, KnownEnergies) {
  const TargetModel t = multimode1d_target();
  EXPECT_NEAR(t.energy(scalar(0.0)), 1.0, 1e-14);
  EXPECT_LT(oracle::rel_err(t.energy(scalar(-4.0)), std::exp(12.0)), 1e-13);
}

TEST(Multimode, EnergyMatchesIndependentFormula) {
  const TargetModel t = multimode1d_target();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double th = u(rng);
    EXPECT_LT(oracle::rel_err(t.energy(scalar(th)), static_cast<double>(multimode_u(th))), 1e-12);
  }
}

TEST(Multimode, GradientMatchesFiniteDifferences) {
  const TargetModel t = multimode1d_target();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    const Vector th = scalar(u(rng));
    const Vector fd = oracle::fd_gradient([&](const Vector& v) { return t.energy(v); }, th, 1e-6);
    EXPECT_LT(oracle::rel_err(t.gradient(th), fd), 1e-5) << "theta=" << th(0);
  }
}

TEST(Multimode, ModeCentersAreLocalMinima) {
  const TargetModel t = multimode1d_target();
  const auto& centers = t.reference().mode_centers;
  ASSERT_EQ(centers.size(), 5u);
  for (const Vector& c : centers) {
    const double uc = t.energy(c);
    EXPECT_LT(uc, 10.0);
    EXPECT_GT(t.energy(scalar(c(0) - 1e-3)), uc);
    EXPECT_GT(t.energy(scalar(c(0) + 1e-3)), uc);
  }
  for (std::size_t i = 1; i < centers.size(); ++i) {
    EXPECT_GT(centers[i](0) - centers[i - 1](0), 2 * 0.35);
  }
}

TEST(AllTargets, TermGradientsSumToFullGradient) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const TargetModel& t : builtin_targets()) {
    for (int i = 0; i < 20; ++i) {
      const Vector th = scalar(u(rng));
      Vector sum = Vector::Zero(1);
      for (std::size_t q = 0; q < t.num_terms(); ++q) sum += t.term_gradient(th, q);
      EXPECT_LT(oracle::rel_err(sum, t.gradient(th)), 1e-12) << t.name();
    }
  }
}

TEST(AllTargets, GradientsMatchFiniteDifferencesOfEnergy) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const TargetModel& t : builtin_targets()) {
    ASSERT_TRUE(t.has_energy());
    for (int i = 0; i < 50; ++i) {
      const Vector th = scalar(u(rng));
      const Vector fd = oracle::fd_gradient([&](const Vector& v) { return t.energy(v); }, th, 1e-6);
      EXPECT_LT(oracle::rel_err(t.gradient(th), fd), 1e-5) << t.name() << " at " << th(0);
      const std::size_t q = static_cast<std::size_t>(i) % t.num_terms();
      const Vector fdq =
          oracle::fd_gradient([&](const Vector& v) { return t.term_energy(v, q); }, th, 1e-6);
      EXPECT_LT(oracle::rel_err(t.term_gradient(th, q), fdq), 1e-5) << t.name();
    }
  }
}

TEST(TargetModel, RejectsBadTermIndex) {
  const TargetModel t = conjugate_posterior_target({1.0, 2.0});
  EXPECT_THROW(t.term_gradient(scalar(0.0), 2), DomainError);
  const std::vector<std::size_t> batch{0, 5};
  EXPECT_THROW(t.batch_gradient_sum(scalar(0.0), batch), DomainError);
}

TEST(StochasticGradient, FullBatchIsExactGradient) {
  const TargetModel t = conjugate_posterior_target({0.3, -1.0, 2.5, 4.0});
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const Vector th = scalar(0.7);
  EXPECT_EQ(stochastic_gradient(t, th, all), t.gradient(th));
}

TEST(StochasticGradient, SingleTermIsScaled) {
  const TargetModel t = conjugate_posterior_target({0.3, -1.0, 2.5});
  const std::vector<std::size_t> batch{2};
  const Vector th = scalar(-0.4);
  EXPECT_DOUBLE_EQ(stochastic_gradient(t, th, batch)(0), 3.0 * t.term_gradient(th, 2)(0));
}

// Average over every size-B subset of {0..N-1}.
Vector exhaustive_average(const TargetModel& t, const Vector& th, std::size_t b) {
  const std::size_t n = t.num_terms();
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(b), true);
  Vector sum = Vector::Zero(th.size());
  std::size_t count = 0;
  do {
    std::vector<std::size_t> batch;
    for (std::size_t q = 0; q < n; ++q)
      if (mask[q]) batch.push_back(q);
    sum += stochastic_gradient(t, th, batch);
    ++count;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return sum / static_cast<double>(count);
}

TEST(StochasticGradient, FourChooseTwoIsUnbiased) {
  const TargetModel t = conjugate_posterior_target({0.5, 1.7, -2.2, 3.1});
  const Vector th = scalar(0.9);
  EXPECT_LT(oracle::rel_err(exhaustive_average(t, th, 2), t.gradient(th)), 1e-12);
}

TEST(StochasticGradient, UnbiasedForEverySmallInstance) {
  std::mt19937_64 rng(59);
  for (std::size_t n = 1; n <= 6; ++n) {
    const TargetModel t = conjugate_posterior_target(gaussian_data(n, 1.0, 2.0, 100 + n));
    for (std::size_t b = 1; b <= n; ++b) {
      const Vector th = oracle::random_matrix(rng, 1, 1, 2.0).row(0).transpose();
      EXPECT_LT(oracle::rel_err(exhaustive_average(t, th, b), t.gradient(th)), 1e-12)
          << "N=" << n << " B=" << b;
    }
  }
}

TEST(StochasticGradient, UnbiasedInSeveralDimensions) {
  std::mt19937_64 rng(61);
  std::vector<Vector> centers;
  for (int q = 0; q < 5; ++q) centers.push_back(oracle::random_matrix(rng, 1, 3).row(0).transpose());
  const TargetModel t = oracle::quadratic_target(centers);
  const Vector th = oracle::random_matrix(rng, 1, 3).row(0).transpose();
  for (std::size_t b = 1; b <= 5; ++b) {
    EXPECT_LT(oracle::rel_err(exhaustive_average(t, th, b), t.gradient(th)), 1e-12);
  }
}

TEST(StochasticGradient, RejectsBadBatches) {
  const TargetModel t = conjugate_posterior_target({1.0, 2.0});
  EXPECT_THROW(stochastic_gradient(t, scalar(0.0), std::vector<std::size_t>{}), PreconditionError);
  EXPECT_THROW(stochastic_gradient(t, scalar(0.0), std::vector<std::size_t>{0, 1, 0}),
               PreconditionError);
}

TEST(SampleBatch, FullSetWhenBEqualsN) {
  SplitMix64 rng(1);
  const auto b = sample_batch(7, 7, rng);
  EXPECT_EQ(b, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(SampleBatch, DistinctSortedInRange) {
  SplitMix64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = sample_batch(50, 13, rng);
    ASSERT_EQ(b.size(), 13u);
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    EXPECT_EQ(std::adjacent_find(b.begin(), b.end()), b.end());
    EXPECT_LT(b.back(), 50u);
  }
}

TEST(SampleBatch, BinomialFrequency) {
  SplitMix64 rng(20190101);
  const int draws = 10000;
  int zeros = 0;
  for (int i = 0; i < draws; ++i) zeros += sample_batch(2, 1, rng)[0] == 0 ? 1 : 0;
  const double sigma = std::sqrt(draws * 0.25);
  EXPECT_LT(std::abs(zeros - draws / 2.0), 3.0 * sigma);
}

TEST(SampleBatch, InclusionFrequencyIsUniform) {
  SplitMix64 rng(77);
  const std::size_t n = 6;
  const std::size_t b = 2;
  const int draws = 30000;
  std::vector<int> hits(n, 0);
  for (int i = 0; i < draws; ++i)
    for (std::size_t q : sample_batch(n, b, rng)) ++hits[q];
  const double p = static_cast<double>(b) / n;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int h : hits) EXPECT_LT(std::abs(h - draws * p), 4.0 * sigma);
}

TEST(SampleBatch, SameSeedSameSubsets) {
  SplitMix64 a(123);
  SplitMix64 b(123);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_batch(100, 10, a), sample_batch(100, 10, b));
}

TEST(SampleBatch, RejectsInvalidSizes) {
  SplitMix64 rng(1);
  EXPECT_THROW(sample_batch(5, 0, rng), PreconditionError);
  EXPECT_THROW(sample_batch(5, 6, rng), PreconditionError);
}

TEST(GaussianData, SeededAndShaped) {
  const auto a = gaussian_data(1000, 2.0, 1.0, 5);
  const auto b = gaussian_data(1000, 2.0, 1.0, 5);
  EXPECT_EQ(a, b);
  double mean = 0.0;
  for (double x : a) mean += x / 1000.0;
  EXPECT_NEAR(mean, 2.0, 3.0 / std::sqrt(1000.0));
}

}  // namespace
}  // namespace sposkit
