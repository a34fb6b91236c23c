#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "entmix/run_commands.hpp"

namespace {

int dispatch(const std::string& name, const entmix::ExperimentConfig& cfg, std::ostream& out) {
  bool ok = true;
  if (name == "profile") ok = entmix::run_profile(cfg, out);
  else if (name == "concentrate") ok = entmix::run_concentrate(cfg, out);
  else if (name == "beta") ok = entmix::run_beta(cfg, out);
  else if (name == "forward") ok = entmix::run_forward(cfg, out);
  else if (name == "mix") ok = entmix::run_mix(cfg, out);
  else if (name == "stats") ok = entmix::run_stats(cfg, out);
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random stochastic matrix mixing experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  std::string out_path;
  long long seed_override = -1;
  bool assert_checks = false;

  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--out", out_path, "output CSV path (overrides config)");
  app.add_flag("--assert", assert_checks, "exit 3 when the subcommand's invariants fail");

  for (const char* name : {"profile", "concentrate", "beta", "forward", "mix", "stats"})
    app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  entmix::ExperimentConfig cfg;
  try {
    cfg = entmix::load_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_path.empty()) cfg.output = out_path;
  } catch (const entmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::ostringstream buffer;
    const int code = dispatch(sub, cfg, buffer);
    if (cfg.output.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      if (!f) {
        std::cerr << "cannot open output path: " << cfg.output << "\n";
        return 2;
      }
      f << buffer.str();
    }
    if (code != 0 && assert_checks) {
      std::cerr << sub << ": invariant checks failed\n";
      return 3;
    }
    return 0;
  } catch (const entmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
