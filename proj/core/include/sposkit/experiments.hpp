#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sposkit/config_file.hpp"
#include "sposkit/samplers.hpp"

namespace sposkit {

enum class ExperimentKind { gaussian_sweep, m_sweep, multimode, posterior_gaussian, epd_compare };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

/// Resolved settings for one experiment. defaults() matches configs/.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::gaussian_sweep;
  std::vector<Algorithm> algorithms;
  std::vector<Eigen::Index> particles;
  std::size_t iterations = 1000;
  StepSchedule step;
  BatchSchedule batch;
  double beta = 1.0;
  KernelSpec kernel = KernelSpec::median_heuristic();
  std::vector<std::uint64_t> seeds;
  std::size_t cadence = 10;
  double init_mean = 0.0;
  double init_stddev = 1.0;
  double target_mean = 2.0;
  double target_variance = 1.0;
  // posterior-gaussian: number of synthetic observations and their seed.
  std::size_t data_size = 1000;
  std::uint64_t data_seed = 20190101;
  // multimode
  double mode_radius = 0.35;
  // epd-compare
  double coincident_value = 0.0;
  double dispersed_mean = 2.0;
  double dispersed_stddev = 10.0;
  std::size_t jobs = 1;
  std::filesystem::path output_dir;

  static ExperimentConfig defaults(ExperimentKind kind);

  /// Starts from defaults(experiment) and applies every other key. Unknown
  /// keys are rejected.
  static ExperimentConfig from_key_values(const KeyValueConfig& kv);
  KeyValueConfig to_key_values() const;

  void validate() const;
  void add_seed_offset(std::uint64_t offset);
};

struct SeriesPoint {
  std::size_t iteration = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
};

/// One (algorithm, particle count, init regime) cell aggregated over seeds.
struct Curve {
  Algorithm algorithm = Algorithm::spos;
  Eigen::Index particles = 0;
  std::string regime;
  std::vector<SeriesPoint> points;
  std::vector<RunTrace> runs;  // one per seed, in seed-list order

  const SeriesPoint& at(std::size_t iteration) const;
};

struct ModeResult {
  Algorithm algorithm = Algorithm::spos;
  std::uint64_t seed = 0;
  std::size_t modes_covered = 0;
  Matrix final_positions;
};

struct ExperimentOutput {
  std::vector<Curve> curves;
  std::vector<ModeResult> modes;
  std::vector<std::filesystem::path> files;
};

/// Test-function error curves on N(target_mean, target_variance).
ExperimentOutput run_gaussian_sweep(const ExperimentConfig& config);
/// Final error against particle count.
ExperimentOutput run_m_sweep(const ExperimentConfig& config);
/// Final particle positions on the multimode density.
ExperimentOutput run_multimode(const ExperimentConfig& config);
/// Error curves on the conjugate Gaussian posterior.
ExperimentOutput run_posterior_gaussian(const ExperimentConfig& config);
/// EPD curves from coincident and dispersed initializations.
ExperimentOutput run_epd_compare(const ExperimentConfig& config);

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Mean and standard error of the mean (zero for a single value).
SeriesPoint aggregate(std::size_t iteration, const std::vector<double>& values);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

std::string trace_file_name(ExperimentKind kind, Algorithm algorithm, Eigen::Index particles);

}  // namespace sposkit
