#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ncsched/errors.h"
#include "ncsched/pipeline.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long long> horizon;
  std::optional<double> loss_prob;
  std::optional<std::string> mode;
  bool override_validation = false;
  bool serial = false;
  std::optional<std::string> certificates;
  std::optional<std::string> cycle;
  std::optional<std::string> schedule;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* config = cmd->add_option("--config", f.config, "JSON run configuration");
  if (needs_config) config->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (default $NCSCHED_OUT_DIR or ncsched-out)");
  cmd->add_option("--seed", f.seed, "simulation seed");
  cmd->add_option("--horizon", f.horizon, "simulation horizon H")->check(CLI::PositiveNumber);
  cmd->add_option("--loss-prob", f.loss_prob, "per-step loss probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--mode", f.mode, "auto-partition | given-partition | direct-cycle");
  cmd->add_flag("--override-validation", f.override_validation,
                "continue when the standing assumptions fail");
  cmd->add_flag("--serial", f.serial, "use the serial reference kernels");
  cmd->add_option("--certificates", f.certificates, "certificates.json to reuse")
      ->check(CLI::ExistingFile);
  cmd->add_option("--cycle", f.cycle, "cycle.csv to reuse")->check(CLI::ExistingFile);
  cmd->add_option("--schedule", f.schedule, "schedule_period.txt to reuse")
      ->check(CLI::ExistingFile);
}

ncsched::CommandOptions to_options(const Flags& f,
                                   const std::optional<std::string>& config_dir) {
  ncsched::CommandOptions o;
  if (!f.out.empty()) {
    o.out_dir = f.out;
  } else if (const char* env = std::getenv(ncsched::kOutDirEnv); env && *env) {
    o.out_dir = env;
  } else if (config_dir) {
    o.out_dir = *config_dir;
  }
  o.seed = f.seed;
  o.horizon = f.horizon;
  o.loss_prob = f.loss_prob;
  if (f.mode) o.mode = ncsched::parse_synthesis_mode(*f.mode);
  o.override_validation = f.override_validation;
  if (f.certificates) o.certificates_path = *f.certificates;
  if (f.cycle) o.cycle_path = *f.cycle;
  if (f.schedule) o.schedule_path = *f.schedule;
  o.exec = f.serial ? ncsched::Execution::kSerial : ncsched::Execution::kParallel;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic scheduling synthesis for plants sharing lossy channels"};
  app.require_subcommand(1);
  Flags f;

  using Command = int (*)(const ncsched::RunConfig&, const ncsched::CommandOptions&,
                          std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"certify", ncsched::cmd_certify},   {"synthesize", ncsched::cmd_synthesize},
      {"schedule", ncsched::cmd_schedule}, {"simulate", ncsched::cmd_simulate},
      {"check", ncsched::cmd_check},
  };
  const char* help[] = {
      "compute per-plant Lyapunov-like certificates",
      "synthesize a contractive cycle and its schedule",
      "build the periodic schedule from a cycle",
      "simulate the scheduled plants under admissible losses",
      "check assumptions, certificates and sufficient conditions",
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* cmd = app.add_subcommand(commands[i].first, help[i]);
    add_common(cmd, f, true);
    subs.emplace_back(cmd, commands[i].second);
  }
  auto* reproduce =
      app.add_subcommand("reproduce-example", "run the bundled five-plant example end to end");
  add_common(reproduce, f, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (reproduce->parsed()) {
      return ncsched::cmd_reproduce_example(to_options(f, std::nullopt), std::cout);
    }
    for (const auto& [cmd, run] : subs) {
      if (!cmd->parsed()) continue;
      const ncsched::RunConfig config = ncsched::load_config(f.config);
      return run(config, to_options(f, config.output_dir), std::cout);
    }
  } catch (const ncsched::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ncsched::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
