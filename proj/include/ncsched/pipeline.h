#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ncsched/io.h"

namespace ncsched {

/// Command-line overrides shared by all subcommands.
struct CommandOptions {
  std::filesystem::path out_dir = "ncsched-out";
  std::optional<std::uint64_t> seed;
  std::optional<long long> horizon;
  std::optional<double> loss_prob;
  std::optional<SynthesisMode> mode;
  bool override_validation = false;
  // Persisted intermediates; when empty the stage is recomputed.
  std::optional<std::filesystem::path> certificates_path;
  std::optional<std::filesystem::path> cycle_path;
  std::optional<std::filesystem::path> schedule_path;
  Execution exec = Execution::kParallel;
};

// Environment variable consulted for the default output directory.
inline constexpr const char* kOutDirEnv = "NCSCHED_OUT_DIR";

/// Bundled five-plant, two-channel example configuration.
std::string_view example_config_json();

// Each command writes its files under options.out_dir, prints a summary to
// `out` and returns a process exit code (0 on success).
int cmd_certify(const RunConfig& config, const CommandOptions& options,
                std::ostream& out);
int cmd_synthesize(const RunConfig& config, const CommandOptions& options,
                   std::ostream& out);
int cmd_schedule(const RunConfig& config, const CommandOptions& options,
                 std::ostream& out);
int cmd_simulate(const RunConfig& config, const CommandOptions& options,
                 std::ostream& out);
int cmd_check(const RunConfig& config, const CommandOptions& options,
              std::ostream& out);
int cmd_reproduce_example(const CommandOptions& options, std::ostream& out);

}  // namespace ncsched
