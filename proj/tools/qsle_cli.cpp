#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/experiments.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

qsle::ExperimentConfig resolve(const Flags& flags, const std::string& experiment) {
  auto config = flags.config.empty() ? qsle::ExperimentConfig{} : qsle::load_config(flags.config);
  if (!experiment.empty()) config.experiment = experiment;
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out.empty()) config.output_dir = flags.out;
  return config;
}

int run(const Flags& flags, const std::string& experiment) {
  const auto config = resolve(flags, experiment);
  const auto set = qsle::run_experiment(config, config.output_dir);
  if (!flags.quiet) {
    std::cout << config.experiment << ": wrote " << set.files.size() << " files to "
              << set.directory.string() << " (config " << qsle::config_hash(config) << ")\n";
    for (const auto& f : set.files) std::cout << "  " << f << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Gaussian priors and spectral likelihood expansions: experiment driver"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "master seed override");
    sub->add_flag("--quiet", flags.quiet, "no progress output");
  };

  const std::pair<const char*, const char*> experiments[] = {{"one-d", "one_d"},
                                                             {"heat-2d", "heat_2d"},
                                                             {"convergence", "convergence"},
                                                             {"density-dump", "density_dump"}};
  std::string chosen;
  for (const auto& [name, key] : experiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + key + " experiment");
    add_common(sub);
    sub->callback([&chosen, key = std::string(key)] { chosen = key; });
  }
  auto* print = app.add_subcommand("print-config", "print the effective configuration as JSON");
  add_common(print);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (print->parsed()) {
      std::cout << qsle::to_json(resolve(flags, "")).dump(2) << '\n';
      return 0;
    }
    return run(flags, chosen);
  } catch (const qsle::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
