#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncsched/certificates.h"
#include "ncsched/cycle_synthesis.h"
#include "ncsched/loss_sim.h"
#include "ncsched/plant_model.h"
#include "ncsched/scheduling_logic.h"

namespace ncsched {

inline constexpr int kSchemaVersion = 1;

struct SimulationConfig {
  long long horizon = 1000;
  int runs = 100;
  std::uint64_t seed = 1;
  double loss_prob = 0.3;
  double x0_range = 10.0;
  std::optional<std::string> loss_file;  // losses.csv to replay in run 0
};

/// Externally supplied scalars (for example, previously published values)
/// kept apart from certificates computed by this toolkit.
struct ReferenceScalars {
  std::string source;
  std::vector<CertificateScalars> plants;  // index = id - 1
};

struct RunConfig {
  std::vector<PlantModel> plants;
  NetworkSpec network;
  int grid = kDefaultGrid;
  SelectionRule selection_rule = SelectionRule::kMaxBudget;
  SynthesisMode mode = SynthesisMode::kAutoPartition;
  std::optional<Partition> partition;
  SimulationConfig simulation;
  std::optional<ReferenceScalars> reference;
  std::optional<std::string> output_dir;
};

/// Parses and schema-checks a JSON configuration. Unknown keys, missing
/// required keys, bad dimensions and an empty plant list raise
/// ValidationError. Numbers may be given as JSON numbers or decimal strings.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes bytes verbatim (LF endings preserved), creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal rendering of a double.
std::string format_exact(double value);
std::string format_fixed(double value, int digits);

// Certificates: lossless JSON, scalar CSV, human-readable report.
std::string certificates_json(std::span<const StabilityCertificate> certs,
                              int max_burst);
std::vector<StabilityCertificate> parse_certificates_json(std::string_view text);
std::string certificates_csv(std::span<const StabilityCertificate> certs);
std::string certificates_report(std::span<const StabilityCertificate> certs,
                                int max_burst);

// Cycle: vertex,active_set,t_factor
std::string cycle_csv(const Cycle& cycle);
Cycle parse_cycle_csv(std::string_view text);

// Schedule: per-instant rows t,active_set,segment_index for t in [0, H) and a
// compact period description that round-trips.
std::string schedule_csv(const ScheduleLogic& schedule, long long horizon);
std::string schedule_period_text(const ScheduleLogic& schedule);
ScheduleLogic parse_schedule_period_text(std::string_view text);

// trajectory.csv: t,plant,x1..xd,norm2,mode,loss_flag for t in [0, H).
std::string trajectory_csv(const Trajectory& trajectory);
// losses.csv: t,channel,kappa with channels numbered from 1.
std::string losses_csv(const LossSignal& loss);
LossSignal parse_losses_csv(std::string_view text);

std::string synthesis_report_text(const SynthesisReport& report,
                                  std::span<const CertificateScalars> certs,
                                  int max_burst);

}  // namespace ncsched
