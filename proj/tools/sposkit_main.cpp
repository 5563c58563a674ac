#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sposkit/config_file.hpp"
#include "sposkit/errors.hpp"
#include "sposkit/experiments.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIo = 3,
  kDiverged = 4,
};

struct Options {
  std::string config_path;
  std::string experiment;
  std::string out_dir;
  std::uint64_t seed_offset = 0;
  std::vector<std::string> overrides;
};

sposkit::ExperimentConfig resolve(const Options& opt) {
  using namespace sposkit;
  KeyValueConfig kv;
  if (!opt.config_path.empty()) kv = KeyValueConfig::load(opt.config_path);
  if (!opt.experiment.empty()) kv.set("experiment", opt.experiment);
  for (const auto& o : opt.overrides) kv.apply_override(o);
  if (!kv.contains("experiment")) {
    throw ConfigError("no experiment selected; pass --experiment or a config with `experiment`");
  }

  ExperimentConfig config = ExperimentConfig::from_key_values(kv);
  if (!opt.out_dir.empty()) {
    config.output_dir = opt.out_dir;
  } else if (!kv.contains("output_dir")) {
    const char* env = std::getenv("SPOSKIT_OUT");
    config.output_dir = (env != nullptr && *env != '\0') ? env : "sposkit-out";
  }
  config.add_seed_offset(opt.seed_offset);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-optimization sampling experiments"};
  Options opt;
  app.add_option("--config", opt.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--experiment", opt.experiment,
                 "gaussian-sweep | m-sweep | multimode | posterior-gaussian | epd-compare");
  app.add_option("--out", opt.out_dir, "output directory (default: $SPOSKIT_OUT)");
  app.add_option("--seed-offset", opt.seed_offset, "added to every configured seed");
  app.add_option("--override", opt.overrides, "key=value applied after the config file")
      ->allow_extra_args(false);
  CLI11_PARSE(app, argc, argv);

  try {
    const sposkit::ExperimentConfig config = resolve(opt);
    const auto output = sposkit::run_experiment(config);
    for (const auto& file : output.files) std::cout << file.string() << '\n';
    return kOk;
  } catch (const sposkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const sposkit::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const sposkit::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
