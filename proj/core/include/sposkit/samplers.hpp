#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sposkit/diagnostics.hpp"
#include "sposkit/kernels.hpp"
#include "sposkit/targets.hpp"
#include "sposkit/types.hpp"

namespace sposkit {

using Batch = std::vector<std::size_t>;

/// M particles in d dimensions (one per row) at iteration k.
struct ParticleEnsemble {
  Matrix positions;
  std::size_t iteration = 0;

  Eigen::Index size() const { return positions.rows(); }
  Eigen::Index dim() const { return positions.cols(); }
  // Throws PreconditionError for an empty ensemble, DomainError for non-finite entries.
  void validate() const;
};

enum class Algorithm { sgld, svgd, pos, spos };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct StepSchedule {
  enum class Kind { fixed, decreasing };
  Kind kind = Kind::fixed;
  double h0 = 0.03;
};

struct BatchSchedule {
  enum class Kind { fixed, growing };
  Kind kind = Kind::fixed;
  std::size_t b0 = 1;
};

// h0 or h0 / (k + 1).
double step_size(std::size_t k, const StepSchedule& schedule);

// B0 or min(N, B0 + floor(ln(k + 1)^(100/99))).
std::size_t batch_size(std::size_t k, const BatchSchedule& schedule, std::size_t n);

// --- single steps -----------------------------------------------------------
//
// All interacting updates read only the pre-step snapshot. `noise` holds one
// standard normal row per particle; pass zeros to suppress the diffusion.
// A median-heuristic kernel is resolved on the pre-step positions.

/// Independent Langevin updates, one batch per particle.
ParticleEnsemble sgld_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, std::span<const Batch> batches, const Matrix& noise);

/// Convenience overload using the same batch for every particle.
ParticleEnsemble sgld_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, const Batch& batch, const Matrix& noise);

ParticleEnsemble svgd_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           const KernelSpec& kernel, const Batch& batch);

ParticleEnsemble pos_step_deterministic(const ParticleEnsemble& ensemble,
                                        const TargetModel& target, double h, double beta,
                                        const KernelSpec& kernel, const Batch& batch);

ParticleEnsemble spos_step(const ParticleEnsemble& ensemble, const TargetModel& target, double h,
                           double beta, const KernelSpec& kernel, const Batch& batch,
                           const Matrix& noise);

/// Stochastic gradients for every particle on a shared batch (row i is G^(i)).
Matrix particle_gradients(const Matrix& positions, const TargetModel& target, const Batch& batch);

/// Row i: sum_j [ -K(theta_i - theta_j) G_j + grad K(theta_j - theta_i) ].
/// The second term is the repulsion grad_{theta_j} k(theta_j, theta_i).
/// A median-heuristic kernel is resolved on `positions`.
Matrix interaction_field(const Matrix& positions, const Matrix& gradients,
                         const KernelSpec& kernel);

// --- run loop ---------------------------------------------------------------

struct SamplerConfig {
  Algorithm algorithm = Algorithm::spos;
  double beta = 1.0;  // ignored by SVGD
  StepSchedule step;
  BatchSchedule batch;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  std::size_t diagnostics_every = 10;
  KernelSpec kernel = KernelSpec::median_heuristic();

  void validate() const;
};

struct GaussianInit {
  Eigen::Index particles = 1;
  double mean = 0.0;
  double stddev = 1.0;
};

/// Explicit positions, or i.i.d. N(mean, stddev^2) per coordinate.
using InitSpec = std::variant<Matrix, GaussianInit>;

struct RunTrace {
  std::vector<DiagnosticRecord> records;
  ParticleEnsemble final_ensemble;
  SamplerConfig config;
  bool diverged = false;
  std::string error;
};

/// Runs `config.iterations` steps. Diagnostics are recorded at iteration 0,
/// every `diagnostics_every` iterations, and at the final iteration. A
/// non-finite update stops the run; the trace keeps the last valid ensemble
/// and sets `diverged`.
RunTrace run_sampler(const SamplerConfig& config, const TargetModel& target, const InitSpec& init,
                     const DiagnosticsSpec& diagnostics);

RunTrace run_sampler(const SamplerConfig& config, const TargetModel& target, const InitSpec& init);

Matrix initial_positions(const InitSpec& init, std::size_t dim, std::uint64_t seed);

}  // namespace sposkit
