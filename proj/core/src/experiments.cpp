#include "sposkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "sposkit/csv.hpp"
#include "sposkit/errors.hpp"

namespace sposkit {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gaussian_sweep: return "gaussian-sweep";
    case ExperimentKind::m_sweep: return "m-sweep";
    case ExperimentKind::multimode: return "multimode";
    case ExperimentKind::posterior_gaussian: return "posterior-gaussian";
    case ExperimentKind::epd_compare: return "epd-compare";
  }
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto k : {ExperimentKind::gaussian_sweep, ExperimentKind::m_sweep, ExperimentKind::multimode,
                 ExperimentKind::posterior_gaussian, ExperimentKind::epd_compare}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::uint64_t count) {
  std::vector<std::uint64_t> out(count);
  std::iota(out.begin(), out.end(), first);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.step = {StepSchedule::Kind::fixed, 0.03};
  c.batch = {BatchSchedule::Kind::fixed, 1};
  c.seeds = seed_range(1, 10);
  switch (kind) {
    case ExperimentKind::gaussian_sweep:
      c.algorithms = {Algorithm::spos, Algorithm::svgd};
      c.particles = {50, 100, 200, 300, 500, 800};
      c.iterations = 1000;
      c.beta = 40.0;
      c.kernel = KernelSpec::median_heuristic();
      c.cadence = 10;
      break;
    case ExperimentKind::m_sweep:
      c.algorithms = {Algorithm::spos};
      c.particles = {50, 100, 200, 300, 500, 800};
      c.iterations = 1000;
      c.beta = 150.0;
      c.kernel = KernelSpec::median_heuristic();
      c.cadence = 100;
      break;
    case ExperimentKind::multimode:
      c.algorithms = {Algorithm::svgd, Algorithm::spos};
      c.particles = {100};
      c.iterations = 10000;
      c.step.h0 = 0.003;
      c.beta = 1.0;
      c.kernel = KernelSpec::fixed(1.0);
      c.cadence = 500;
      c.init_mean = 0.0;
      c.init_stddev = 0.01;
      break;
    case ExperimentKind::posterior_gaussian:
      c.algorithms = {Algorithm::spos};
      c.particles = {10, 50, 200};
      c.iterations = 1000;
      c.step.h0 = 2e-4;
      c.batch = {BatchSchedule::Kind::fixed, 1000};
      c.beta = 1.0;
      c.kernel = KernelSpec::median_heuristic();
      c.cadence = 10;
      break;
    case ExperimentKind::epd_compare:
      c.algorithms = {Algorithm::svgd, Algorithm::spos};
      c.particles = {50};
      c.iterations = 20000;
      c.beta = 100.0;
      c.kernel = KernelSpec::fixed(10000.0);
      c.cadence = 10;
      break;
  }
  return c;
}

namespace {

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ",";
    out += fmt(xs[i]);
  }
  return out;
}

std::string bandwidth_string(const KernelSpec& k) {
  return k.mode == BandwidthMode::median_heuristic ? "median" : format_double(k.bandwidth_sq);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_key_values(const KeyValueConfig& kv) {
  ExperimentConfig c = defaults(parse_experiment(kv.get("experiment")));
  for (const auto& [key, value] : kv.entries()) {
    if (key == "experiment") continue;
    if (key == "algorithms") {
      c.algorithms.clear();
      for (const auto& a : split_list(value)) c.algorithms.push_back(parse_algorithm(a));
    } else if (key == "particles") {
      c.particles.clear();
      for (const auto& m : split_list(value)) {
        c.particles.push_back(static_cast<Eigen::Index>(parse_size(key, m)));
      }
    } else if (key == "iterations") {
      c.iterations = parse_size(key, value);
    } else if (key == "step_size") {
      c.step.h0 = parse_double(key, value);
    } else if (key == "step_schedule") {
      if (value == "fixed") c.step.kind = StepSchedule::Kind::fixed;
      else if (value == "decreasing") c.step.kind = StepSchedule::Kind::decreasing;
      else throw ConfigError("step_schedule must be fixed or decreasing");
    } else if (key == "batch_size") {
      c.batch.b0 = parse_size(key, value);
    } else if (key == "batch_schedule") {
      if (value == "fixed") c.batch.kind = BatchSchedule::Kind::fixed;
      else if (value == "growing") c.batch.kind = BatchSchedule::Kind::growing;
      else throw ConfigError("batch_schedule must be fixed or growing");
    } else if (key == "beta") {
      c.beta = parse_double(key, value);
    } else if (key == "bandwidth") {
      c.kernel = value == "median" ? KernelSpec::median_heuristic()
                                   : KernelSpec::fixed(parse_double(key, value));
    } else if (key == "seeds") {
      c.seeds.clear();
      for (const auto& s : split_list(value)) c.seeds.push_back(parse_u64(key, s));
    } else if (key == "cadence") {
      c.cadence = parse_size(key, value);
    } else if (key == "init_mean") {
      c.init_mean = parse_double(key, value);
    } else if (key == "init_stddev") {
      c.init_stddev = parse_double(key, value);
    } else if (key == "target_mean") {
      c.target_mean = parse_double(key, value);
    } else if (key == "target_variance") {
      c.target_variance = parse_double(key, value);
    } else if (key == "data_size") {
      c.data_size = parse_size(key, value);
    } else if (key == "data_seed") {
      c.data_seed = parse_u64(key, value);
    } else if (key == "mode_radius") {
      c.mode_radius = parse_double(key, value);
    } else if (key == "coincident_value") {
      c.coincident_value = parse_double(key, value);
    } else if (key == "dispersed_mean") {
      c.dispersed_mean = parse_double(key, value);
    } else if (key == "dispersed_stddev") {
      c.dispersed_stddev = parse_double(key, value);
    } else if (key == "jobs") {
      c.jobs = parse_size(key, value);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

KeyValueConfig ExperimentConfig::to_key_values() const {
  KeyValueConfig kv;
  kv.set("experiment", to_string(kind));
  kv.set("algorithms", join(algorithms, [](Algorithm a) { return to_string(a); }));
  kv.set("particles", join(particles, [](Eigen::Index m) { return std::to_string(m); }));
  kv.set("iterations", std::to_string(iterations));
  kv.set("step_size", format_double(step.h0));
  kv.set("step_schedule", step.kind == StepSchedule::Kind::fixed ? "fixed" : "decreasing");
  kv.set("batch_size", std::to_string(batch.b0));
  kv.set("batch_schedule", batch.kind == BatchSchedule::Kind::fixed ? "fixed" : "growing");
  kv.set("beta", format_double(beta));
  kv.set("bandwidth", bandwidth_string(kernel));
  kv.set("seeds", join(seeds, [](std::uint64_t s) { return std::to_string(s); }));
  kv.set("cadence", std::to_string(cadence));
  kv.set("init_mean", format_double(init_mean));
  kv.set("init_stddev", format_double(init_stddev));
  kv.set("target_mean", format_double(target_mean));
  kv.set("target_variance", format_double(target_variance));
  kv.set("data_size", std::to_string(data_size));
  kv.set("data_seed", std::to_string(data_seed));
  kv.set("mode_radius", format_double(mode_radius));
  kv.set("coincident_value", format_double(coincident_value));
  kv.set("dispersed_mean", format_double(dispersed_mean));
  kv.set("dispersed_stddev", format_double(dispersed_stddev));
  kv.set("jobs", std::to_string(jobs));
  kv.set("output_dir", output_dir.string());
  return kv;
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw ConfigError("algorithm list is empty");
  if (particles.empty()) throw ConfigError("particle list is empty");
  for (auto m : particles) {
    if (m < 1) throw ConfigError("particle counts must be positive");
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (!(mode_radius > 0.0)) throw ConfigError("mode_radius must be positive");
  if (!(init_stddev >= 0.0) || !(dispersed_stddev >= 0.0)) {
    throw ConfigError("init standard deviations must be non-negative");
  }
  SamplerConfig probe;
  probe.beta = beta;
  probe.step = step;
  probe.batch = batch;
  probe.iterations = iterations;
  probe.diagnostics_every = cadence;
  probe.kernel = kernel;
  probe.validate();
}

void ExperimentConfig::add_seed_offset(std::uint64_t offset) {
  for (auto& s : seeds) s += offset;
}

const SeriesPoint& Curve::at(std::size_t iteration) const {
  for (const auto& p : points) {
    if (p.iteration == iteration) return p;
  }
  throw DomainError("curve has no point at iteration " + std::to_string(iteration));
}

SeriesPoint aggregate(std::size_t iteration, const std::vector<double>& values) {
  SeriesPoint p;
  p.iteration = iteration;
  if (values.empty()) return p;
  const auto n = static_cast<double>(values.size());
  p.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
  }
  return p;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("spearman_correlation needs two equal-length series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string trace_file_name(ExperimentKind kind, Algorithm algorithm, Eigen::Index particles) {
  return to_string(kind) + "_" + to_string(algorithm) + "_M" + std::to_string(particles) + ".csv";
}

namespace {

struct RunTask {
  SamplerConfig sampler;
  InitSpec init;
  std::shared_ptr<const TargetModel> target;
  DiagnosticsSpec diagnostics;
  std::string label;
};

// Runs every task on `jobs` worker threads. Each task owns its output slot, so
// the result does not depend on scheduling.
std::vector<RunTrace> run_tasks(const std::vector<RunTask>& tasks, std::size_t jobs) {
  std::vector<RunTrace> traces(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto& t = tasks[i];
        traces[i] = run_sampler(t.sampler, *t.target, t.init, t.diagnostics);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(jobs, tasks.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (traces[i].diverged) {
      throw DivergenceError("run " + tasks[i].label + " diverged: " + traces[i].error);
    }
  }
  return traces;
}

SamplerConfig sampler_for(const ExperimentConfig& c, Algorithm algorithm, std::uint64_t seed) {
  SamplerConfig s;
  s.algorithm = algorithm;
  s.beta = c.beta;
  s.step = c.step;
  s.batch = c.batch;
  s.iterations = c.iterations;
  s.seed = seed;
  s.diagnostics_every = c.cadence;
  s.kernel = c.kernel;
  return s;
}

std::string label_for(Algorithm a, Eigen::Index m, std::uint64_t seed, const std::string& regime = "") {
  std::string out = to_string(a) + "/M" + std::to_string(m) + "/seed" + std::to_string(seed);
  if (!regime.empty()) out += "/" + regime;
  return out;
}

using RecordValue = std::function<double(const DiagnosticRecord&)>;

// Groups consecutive runs (one per seed) into curves.
std::vector<Curve> build_curves(std::vector<RunTrace> traces, std::size_t seeds,
                                const std::vector<std::tuple<Algorithm, Eigen::Index, std::string>>& cells,
                                const RecordValue& value) {
  std::vector<Curve> curves;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    Curve curve;
    std::tie(curve.algorithm, curve.particles, curve.regime) = cells[c];
    for (std::size_t s = 0; s < seeds; ++s) curve.runs.push_back(std::move(traces[c * seeds + s]));
    const auto& first = curve.runs.front().records;
    for (std::size_t r = 0; r < first.size(); ++r) {
      std::vector<double> vals;
      for (const auto& run : curve.runs) vals.push_back(value(run.records.at(r)));
      curve.points.push_back(aggregate(first[r].iteration, vals));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

double error_value(const DiagnosticRecord& r) {
  if (!r.test_fn_error) throw DomainError("record has no test-function error");
  return *r.test_fn_error;
}

void prepare_output(const ExperimentConfig& c, ExperimentOutput& out) {
  if (c.output_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec || !std::filesystem::is_directory(c.output_dir)) {
    throw IoError("cannot create output directory " + c.output_dir.string());
  }
  const auto path = c.output_dir / (to_string(c.kind) + "_config.cfg");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << c.to_key_values().to_string();
  out.files.push_back(path);
}

void emit(const ExperimentConfig& c, ExperimentOutput& out, const std::string& name,
          const CsvTable& table) {
  if (c.output_dir.empty()) return;
  const auto path = c.output_dir / name;
  write_csv(path, table);
  out.files.push_back(path);
}

std::shared_ptr<const TargetModel> gaussian_target(const ExperimentConfig& c) {
  return std::make_shared<const TargetModel>(gaussian1d_target(c.target_mean, c.target_variance));
}

// Error curves for every (algorithm, M) cell from GaussianInit initializations.
std::vector<Curve> error_curves(const ExperimentConfig& c,
                                const std::shared_ptr<const TargetModel>& target) {
  std::vector<RunTask> tasks;
  std::vector<std::tuple<Algorithm, Eigen::Index, std::string>> cells;
  const auto diag = DiagnosticsSpec::from_target(*target);
  for (Algorithm a : c.algorithms) {
    for (Eigen::Index m : c.particles) {
      cells.emplace_back(a, m, "");
      for (std::uint64_t seed : c.seeds) {
        tasks.push_back({sampler_for(c, a, seed), GaussianInit{m, c.init_mean, c.init_stddev},
                         target, diag, label_for(a, m, seed)});
      }
    }
  }
  return build_curves(run_tasks(tasks, c.jobs), c.seeds.size(), cells, error_value);
}

void require(const ExperimentConfig& c, ExperimentKind kind) {
  c.validate();
  if (c.kind != kind) {
    throw ConfigError("config is for experiment '" + to_string(c.kind) + "', not '" +
                      to_string(kind) + "'");
  }
}

double value_at_or_before(const Curve& curve, std::size_t iteration) {
  double v = curve.points.front().mean;
  for (const auto& p : curve.points) {
    if (p.iteration <= iteration) v = p.mean;
  }
  return v;
}

}  // namespace

ExperimentOutput run_gaussian_sweep(const ExperimentConfig& c) {
  require(c, ExperimentKind::gaussian_sweep);
  ExperimentOutput out;
  prepare_output(c, out);
  out.curves = error_curves(c, gaussian_target(c));

  const std::size_t early = std::min<std::size_t>(100, c.iterations);
  CsvTable summary{{"algorithm", "M", "err_at_T" + std::to_string(early),
                    "err_at_T" + std::to_string(c.iterations)},
                   {}};
  for (const auto& curve : out.curves) {
    CsvTable t{{"iteration", "mean_err", "stderr_err"}, {}};
    for (const auto& p : curve.points) {
      t.rows.push_back({std::to_string(p.iteration), format_double(p.mean), format_double(p.stderr_mean)});
    }
    emit(c, out, trace_file_name(c.kind, curve.algorithm, curve.particles), t);
    summary.rows.push_back({to_string(curve.algorithm), std::to_string(curve.particles),
                            format_double(value_at_or_before(curve, early)),
                            format_double(curve.points.back().mean)});
  }
  emit(c, out, to_string(c.kind) + "_summary.csv", summary);
  return out;
}

ExperimentOutput run_m_sweep(const ExperimentConfig& c) {
  require(c, ExperimentKind::m_sweep);
  ExperimentOutput out;
  prepare_output(c, out);
  out.curves = error_curves(c, gaussian_target(c));
  for (Algorithm a : c.algorithms) {
    CsvTable t{{"M", "mean_err", "stderr_err"}, {}};
    for (const auto& curve : out.curves) {
      if (curve.algorithm != a) continue;
      const auto& last = curve.points.back();
      t.rows.push_back({std::to_string(curve.particles), format_double(last.mean),
                        format_double(last.stderr_mean)});
    }
    emit(c, out, to_string(c.kind) + "_" + to_string(a) + ".csv", t);
  }
  return out;
}

ExperimentOutput run_multimode(const ExperimentConfig& c) {
  require(c, ExperimentKind::multimode);
  ExperimentOutput out;
  prepare_output(c, out);
  auto target = std::make_shared<const TargetModel>(multimode1d_target());
  auto diag = DiagnosticsSpec::from_target(*target);
  diag.mode_radius = c.mode_radius;

  std::vector<RunTask> tasks;
  for (Algorithm a : c.algorithms) {
    for (Eigen::Index m : c.particles) {
      for (std::uint64_t seed : c.seeds) {
        tasks.push_back({sampler_for(c, a, seed), GaussianInit{m, c.init_mean, c.init_stddev},
                         target, diag, label_for(a, m, seed)});
      }
    }
  }
  auto traces = run_tasks(tasks, c.jobs);

  // Position files describe the first seed; the summary lists every seed.
  CsvTable summary{{"algorithm", "seed", "modes_covered"}, {}};
  std::size_t t = 0;
  for (Algorithm a : c.algorithms) {
    for (Eigen::Index m : c.particles) {
      for (std::size_t s = 0; s < c.seeds.size(); ++s, ++t) {
        ModeResult r;
        r.algorithm = a;
        r.seed = c.seeds[s];
        r.modes_covered = *traces[t].records.back().modes_covered;
        r.final_positions = traces[t].final_ensemble.positions;
        if (s == 0) {
          CsvTable pos{{"particle_index", "theta"}, {}};
          for (Eigen::Index i = 0; i < r.final_positions.rows(); ++i) {
            pos.rows.push_back({std::to_string(i), format_double(r.final_positions(i, 0))});
          }
          emit(c, out, trace_file_name(c.kind, a, m), pos);
        }
        summary.rows.push_back(
            {to_string(a), std::to_string(r.seed), std::to_string(r.modes_covered)});
        out.modes.push_back(std::move(r));
      }
    }
  }
  emit(c, out, to_string(c.kind) + "_summary.csv", summary);
  return out;
}

ExperimentOutput run_posterior_gaussian(const ExperimentConfig& c) {
  require(c, ExperimentKind::posterior_gaussian);
  ExperimentOutput out;
  prepare_output(c, out);
  auto target = std::make_shared<const TargetModel>(conjugate_posterior_target(
      gaussian_data(c.data_size, c.target_mean, std::sqrt(c.target_variance), c.data_seed)));
  out.curves = error_curves(c, target);
  for (Algorithm a : c.algorithms) {
    CsvTable t{{"iteration", "M", "mean_err"}, {}};
    for (const auto& curve : out.curves) {
      if (curve.algorithm != a) continue;
      for (const auto& p : curve.points) {
        if (p.iteration == 0) continue;
        t.rows.push_back({std::to_string(p.iteration), std::to_string(curve.particles),
                          format_double(p.mean)});
      }
    }
    emit(c, out, to_string(c.kind) + "_" + to_string(a) + ".csv", t);
  }
  return out;
}

ExperimentOutput run_epd_compare(const ExperimentConfig& c) {
  require(c, ExperimentKind::epd_compare);
  ExperimentOutput out;
  prepare_output(c, out);
  auto target = gaussian_target(c);
  DiagnosticsSpec diag;  // EPD only

  std::vector<RunTask> tasks;
  std::vector<std::tuple<Algorithm, Eigen::Index, std::string>> cells;
  for (Algorithm a : c.algorithms) {
    for (Eigen::Index m : c.particles) {
      for (const std::string regime : {"coincident", "dispersed"}) {
        cells.emplace_back(a, m, regime);
        for (std::uint64_t seed : c.seeds) {
          InitSpec init = regime == "coincident"
                              ? InitSpec(Matrix::Constant(m, 1, c.coincident_value))
                              : InitSpec(GaussianInit{m, c.dispersed_mean, c.dispersed_stddev});
          tasks.push_back({sampler_for(c, a, seed), init, target, diag, label_for(a, m, seed, regime)});
        }
      }
    }
  }
  out.curves = build_curves(run_tasks(tasks, c.jobs), c.seeds.size(), cells,
                            [](const DiagnosticRecord& r) { return r.epd; });

  CsvTable t{{"iteration", "algorithm", "init_regime", "mean_epd", "stderr_epd"}, {}};
  for (const auto& curve : out.curves) {
    for (const auto& p : curve.points) {
      t.rows.push_back({std::to_string(p.iteration), to_string(curve.algorithm), curve.regime,
                        format_double(p.mean), format_double(p.stderr_mean)});
    }
  }
  emit(c, out, to_string(c.kind) + ".csv", t);
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::gaussian_sweep: return run_gaussian_sweep(config);
    case ExperimentKind::m_sweep: return run_m_sweep(config);
    case ExperimentKind::multimode: return run_multimode(config);
    case ExperimentKind::posterior_gaussian: return run_posterior_gaussian(config);
    case ExperimentKind::epd_compare: return run_epd_compare(config);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace sposkit
