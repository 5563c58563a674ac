#include "sposkit/samplers.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sposkit/errors.hpp"
#include "sposkit/rng.hpp"

namespace sposkit {

void ParticleEnsemble::validate() const {
  if (positions.rows() < 1 || positions.cols() < 1) {
    throw PreconditionError("ensemble needs at least one particle and one dimension");
  }
  if (!positions.allFinite()) throw DomainError("ensemble has non-finite positions");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sgld: return "sgld";
    case Algorithm::svgd: return "svgd";
    case Algorithm::pos: return "pos";
    case Algorithm::spos: return "spos";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "sgld") return Algorithm::sgld;
  if (name == "svgd") return Algorithm::svgd;
  if (name == "pos" || name == "pos-deterministic") return Algorithm::pos;
  if (name == "spos") return Algorithm::spos;
  throw ConfigError("unknown algorithm '" + name + "'");
}

double step_size(std::size_t k, const StepSchedule& schedule) {
  if (schedule.kind == StepSchedule::Kind::fixed) return schedule.h0;
  return schedule.h0 / (static_cast<double>(k) + 1.0);
}

std::size_t batch_size(std::size_t k, const BatchSchedule& schedule, std::size_t n) {
  if (schedule.b0 > n) {
    throw PreconditionError("initial batch size " + std::to_string(schedule.b0) +
                            " exceeds data size " + std::to_string(n));
  }
  if (schedule.kind == BatchSchedule::Kind::fixed) return schedule.b0;
  const double growth = std::floor(std::pow(std::log(static_cast<double>(k) + 1.0), 100.0 / 99.0));
  const auto b = schedule.b0 + static_cast<std::size_t>(growth);
  return std::min(b, n);
}

namespace {

void check_step_args(const ParticleEnsemble& ensemble, const TargetModel& target, double h) {
  ensemble.validate();
  if (static_cast<std::size_t>(ensemble.dim()) != target.dim()) {
    throw PreconditionError("ensemble dimension does not match target");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size must be positive");
}

void check_beta(double beta) {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
}

void check_noise(const ParticleEnsemble& ensemble, const Matrix& noise) {
  if (noise.rows() != ensemble.size() || noise.cols() != ensemble.dim()) {
    throw PreconditionError("noise matrix shape does not match the ensemble");
  }
}

ParticleEnsemble finish(const ParticleEnsemble& before, Matrix next, const char* algo) {
  if (!next.allFinite()) {
    throw DivergenceError(std::string(algo) + " produced non-finite positions at iteration " +
                          std::to_string(before.iteration));
  }
  return ParticleEnsemble{std::move(next), before.iteration + 1};
}

// -h/beta * G + (h/M) * interaction, shared by POS and SPOS.
Matrix pos_update(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                  double beta, const KernelSpec& kernel, const Batch& batch) {
  const Matrix grads = particle_gradients(ensemble.positions, target, batch);
  const Matrix field = interaction_field(ensemble.positions, grads, kernel);
  const double m = static_cast<double>(ensemble.size());
  return ensemble.positions - (h / beta) * grads + (h / m) * field;
}

}  // namespace

Matrix particle_gradients(const Matrix& positions, const TargetModel& target, const Batch& batch) {
  Matrix grads(positions.rows(), positions.cols());
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    grads.row(i) = stochastic_gradient(target, positions.row(i).transpose(), batch).transpose();
  }
  if (!grads.allFinite()) throw DivergenceError("non-finite stochastic gradient");
  return grads;
}

Matrix interaction_field(const Matrix& positions, const Matrix& gradients,
                         const KernelSpec& spec) {
  const KernelSpec kernel = resolve_kernel(spec, positions);
  check_bandwidth(kernel);
  const Eigen::Index m = positions.rows();
  const Eigen::Index d = positions.cols();
  const double inv_bw = 1.0 / kernel.bandwidth_sq;

  // Self term: K(0) = 1 and grad K(0) = 0.
  Matrix field = -gradients;
  const double* x = positions.data();
  const double* g = gradients.data();
  double* f = field.data();
  if (d == 1) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double diff = x[i] - x[j];
        const double k = std::exp(-diff * diff * inv_bw);
        const double rep = 2.0 * inv_bw * k * diff;
        f[i] += -k * g[j] + rep;
        f[j] += -k * g[i] - rep;
      }
    }
    return field;
  }
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* xi = x + i * d;
    const double* gi = g + i * d;
    double* fi = f + i * d;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double* xj = x + j * d;
      const double* gj = g + j * d;
      double* fj = f + j * d;
      double sq = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        diff[c] = xi[c] - xj[c];
        sq += diff[c] * diff[c];
      }
      const double k = std::exp(-sq * inv_bw);
      // grad K(theta_j - theta_i) = (2 / bw) K diff: pushes i away from j.
      const double rep = 2.0 * inv_bw * k;
      // K is even and grad K is odd, so each pair contributes to both rows.
      for (Eigen::Index c = 0; c < d; ++c) {
        fi[c] += -k * gj[c] + rep * diff[c];
        fj[c] += -k * gi[c] - rep * diff[c];
      }
    }
  }
  return field;
}

ParticleEnsemble sgld_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, std::span<const Batch> batches, const Matrix& noise) {
  check_step_args(ensemble, target, h);
  check_beta(beta);
  check_noise(ensemble, noise);
  if (batches.size() != static_cast<std::size_t>(ensemble.size())) {
    throw PreconditionError("sgld_step needs one batch per particle");
  }
  const double drift = h / beta;
  const double diffusion = std::sqrt(2.0 * h / beta);
  Matrix next(ensemble.size(), ensemble.dim());
  for (Eigen::Index i = 0; i < ensemble.size(); ++i) {
    const Vector g = stochastic_gradient(target, ensemble.positions.row(i).transpose(),
                                         batches[static_cast<std::size_t>(i)]);
    if (!g.allFinite()) throw DivergenceError("non-finite stochastic gradient");
    next.row(i) = ensemble.positions.row(i) - drift * g.transpose() + diffusion * noise.row(i);
  }
  return finish(ensemble, std::move(next), "sgld");
}

ParticleEnsemble sgld_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, const Batch& batch, const Matrix& noise) {
  const std::vector<Batch> batches(static_cast<std::size_t>(ensemble.size()), batch);
  return sgld_step(ensemble, target, h, beta, batches, noise);
}

ParticleEnsemble svgd_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           const KernelSpec& kernel, const Batch& batch) {
  check_step_args(ensemble, target, h);
  const Matrix grads = particle_gradients(ensemble.positions, target, batch);
  const Matrix field = interaction_field(ensemble.positions, grads, kernel);
  const double m = static_cast<double>(ensemble.size());
  return finish(ensemble, ensemble.positions + (h / m) * field, "svgd");
}

ParticleEnsemble pos_step_deterministic(const ParticleEnsemble& ensemble,
                                        const TargetModel& target, double h, double beta,
                                        const KernelSpec& kernel, const Batch& batch) {
  check_step_args(ensemble, target, h);
  check_beta(beta);
  return finish(ensemble, pos_update(ensemble, target, h, beta, kernel, batch), "pos");
}

ParticleEnsemble spos_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, const KernelSpec& kernel, const Batch& batch,
                           const Matrix& noise) {
  check_step_args(ensemble, target, h);
  check_beta(beta);
  check_noise(ensemble, noise);
  Matrix next = pos_update(ensemble, target, h, beta, kernel, batch);
  next += std::sqrt(2.0 * h / beta) * noise;
  return finish(ensemble, std::move(next), "spos");
}

void SamplerConfig::validate() const {
  if (!(step.h0 > 0.0) || !std::isfinite(step.h0)) throw ConfigError("h0 must be positive");
  if (batch.b0 < 1) throw ConfigError("B0 must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (diagnostics_every < 1) throw ConfigError("diagnostics cadence must be positive");
  if (kernel.mode == BandwidthMode::fixed) check_bandwidth(kernel);
}

Matrix initial_positions(const InitSpec& init, std::size_t dim, std::uint64_t seed) {
  if (const auto* explicit_positions = std::get_if<Matrix>(&init)) {
    if (static_cast<std::size_t>(explicit_positions->cols()) != dim) {
      throw PreconditionError("initial positions have the wrong dimension");
    }
    return *explicit_positions;
  }
  const auto& g = std::get<GaussianInit>(init);
  if (g.particles < 1) throw ConfigError("need at least one particle");
  if (!(g.stddev >= 0.0)) throw ConfigError("init stddev must be non-negative");
  Matrix out(g.particles, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < g.particles; ++i) {
    auto gen = substream(seed, StreamTag::init, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(i, c) = g.mean + g.stddev * normal(gen);
  }
  return out;
}

RunTrace run_sampler(const SamplerConfig& config, const TargetModel& target, const InitSpec& init,
                     const DiagnosticsSpec& diagnostics) {
  config.validate();
  RunTrace trace;
  trace.config = config;
  ParticleEnsemble ensemble{initial_positions(init, target.dim(), config.seed), 0};
  ensemble.validate();

  const std::size_t n = target.num_terms();
  const Eigen::Index m = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  trace.records.push_back(compute_record(ensemble.positions, 0, diagnostics));

  for (std::size_t k = 0; k < config.iterations; ++k) {
    const double h = step_size(k, config.step);
    const std::size_t b = batch_size(k, config.batch, n);
    try {
      if (config.algorithm == Algorithm::sgld) {
        std::vector<Batch> batches;
        batches.reserve(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) {
          auto gen = substream(config.seed, StreamTag::batch, k, static_cast<std::uint64_t>(i) + 1);
          batches.push_back(sample_batch(n, b, gen));
        }
        ensemble = sgld_step(ensemble, target, h, config.beta, batches,
                             gaussian_noise(config.seed, k, m, d));
      } else {
        auto gen = substream(config.seed, StreamTag::batch, k, 0);
        const Batch batch = sample_batch(n, b, gen);
        const KernelSpec kernel = resolve_kernel(config.kernel, ensemble.positions);
        switch (config.algorithm) {
          case Algorithm::svgd:
            ensemble = svgd_step(ensemble, target, h, kernel, batch);
            break;
          case Algorithm::pos:
            ensemble = pos_step_deterministic(ensemble, target, h, config.beta, kernel, batch);
            break;
          default:
            ensemble = spos_step(ensemble, target, h, config.beta, kernel, batch,
                                 gaussian_noise(config.seed, k, m, d));
            break;
        }
      }
    } catch (const DivergenceError& e) {
      trace.diverged = true;
      trace.error = e.what();
      break;
    }
    const std::size_t done = k + 1;
    if (done % config.diagnostics_every == 0 || done == config.iterations) {
      trace.records.push_back(compute_record(ensemble.positions, done, diagnostics));
    }
  }
  trace.final_ensemble = std::move(ensemble);
  return trace;
}

RunTrace run_sampler(const SamplerConfig& config, const TargetModel& target,
                     const InitSpec& init) {
  return run_sampler(config, target, init, DiagnosticsSpec::from_target(target));
}

}  // namespace sposkit
