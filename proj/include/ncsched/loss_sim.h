#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncsched/certificates.h"
#include "ncsched/execution.h"
#include "ncsched/plant_model.h"
#include "ncsched/scheduling_logic.h"

namespace ncsched {

/// Per-channel loss indicators kappa_j(t), t in [0, horizon); 1 means the
/// control input sent on channel j at t is lost.
struct LossSignal {
  int channels = 0;
  long long horizon = 0;
  std::vector<std::vector<std::uint8_t>> kappa;  // [channel][t]

  bool lost(int channel, long long t) const {
    return kappa[static_cast<std::size_t>(channel)]
                [static_cast<std::size_t>(t)] != 0;
  }
};

LossSignal no_losses(int channels, long long horizon);

/// I.i.d. Bernoulli(loss_prob) per channel; a draw that would extend a run
/// past max_burst is forced to 0. Deterministic in the seed.
LossSignal gen_random_admissible(int channels, long long horizon,
                                 int max_burst, double loss_prob,
                                 std::uint64_t seed);

/// Each channel repeats [1 x max_burst, 0], with kappa_j(t) = 1 iff
/// (t - offset_j) mod (max_burst + 1) < max_burst. Offsets must lie in
/// [0, max_burst].
LossSignal gen_worst_case(int channels, long long horizon, int max_burst,
                          std::span<const int> offsets);

struct Admissibility {
  bool admissible = true;
  int channel = -1;     // first offending channel
  long long start = -1; // start of the offending run
};

Admissibility validate_admissible(const LossSignal& signal, int max_burst);

enum class Mode : std::uint8_t { kStable = 0, kUnstable = 1 };

struct PlantTrajectory {
  int plant_id = 0;
  std::vector<Vector> states;            // x(0) .. x(H)
  std::vector<double> norm2;             // |x(t)|^2, t = 0 .. H
  std::vector<Mode> modes;               // sigma(t), t = 0 .. H-1
  std::vector<std::uint8_t> loss_flags;  // 1 when scheduled but lost
};

struct Trajectory {
  long long horizon = 0;
  std::vector<PlantTrajectory> plants;
};

struct SimulationOptions {
  bool allow_inadmissible = false;
};

/// Exact recursion x(t+1) = A_sigma(t) x(t). A plant is in the stable mode at
/// t iff it is scheduled at t and the channel carrying it has kappa = 0.
/// Throws ValidationError on dimension mismatches, a short loss signal, or an
/// inadmissible one (unless allowed).
Trajectory simulate(std::span<const PlantModel> plants,
                    const ScheduleLogic& schedule, const LossSignal& loss,
                    std::span<const Vector> x0, long long horizon,
                    const SimulationOptions& options = {});

struct EnvelopeTrace {
  int plant_id = 0;
  std::vector<long long> stable_steps;    // D_s(0, t)
  std::vector<long long> unstable_steps;  // D_u(0, t)
  std::vector<long long> su_switches;     // N_su(0, t)
  std::vector<long long> us_switches;     // N_us(0, t)
  std::vector<double> log_psi;            // ln psi(t)
  std::vector<double> lyapunov;           // V_sigma(t)(x(t))
  double norm_constant = 0.0;             // sqrt(max lambda_max P / min lambda_min P)
  long long violations = 0;
  long long first_violation = -1;
  double worst_log_excess = -1e300;       // max of ln V(t) - ln psi(t) - ln V(0)
};

struct EnvelopeReport {
  std::vector<EnvelopeTrace> plants;
  long long violations = 0;
  bool ok() const { return violations == 0; }
};

/// Checks V_sigma(t)(x(t)) <= psi(t) V_sigma(0)(x(0)) at every t < H, where
/// ln psi = -|ln lambda_s| D_s + ln lambda_u D_u + ln mu_su N_su
///          + ln mu_us N_us and D_s, D_u count steps spent in each mode.
EnvelopeReport envelope_check(const Trajectory& trajectory,
                              std::span<const StabilityCertificate> certs,
                              double rel_tol = 1e-7);

enum class LossKind { kWorstCase, kRandom };

struct GasPlantResult {
  int plant_id = 0;
  std::vector<double> period_peaks;  // max |x| over each full period
  bool peaks_non_increasing = true;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  bool final_small = true;
  bool pass = true;
};

struct GasReport {
  bool skipped = false;
  std::string note;
  std::vector<GasPlantResult> plants;
  bool pass = true;
};

/// Empirical stability proxy. Worst-case runs must have non-increasing
/// per-period peaks after the first period (factor 1 + 1e-9); random runs
/// must end below 1e-3 max(1, |x0|). Skipped when H < 10 period.
GasReport gas_empirical(const Trajectory& trajectory, long long period,
                        LossKind kind);

/// Loss-free steps of each scheduled plant in every complete window.
struct WindowCount {
  int plant_id = 0;
  int segment = 0;
  long long start = 0;
  long long stable_steps = 0;
  long long t_factor = 0;
};

std::vector<WindowCount> closed_loop_steps_per_window(
    const Trajectory& trajectory, const ScheduleLogic& schedule);

struct BatchOptions {
  int runs = 100;
  long long horizon = 1000;
  std::uint64_t seed = 1;
  double loss_prob = 0.3;
  double x0_range = 10.0;
  double decay_ratio = 1e-6;  // threshold on |x(t)|^2 / |x(0)|^2
};

struct RunSummary {
  int run = 0;
  std::vector<Vector> x0;
  long long envelope_violations = 0;
  bool gas_pass = false;
  std::vector<double> final_norm2;
  // First t with |x(t)|^2 < decay_ratio |x(0)|^2, -1 if never.
  std::vector<long long> decay_time;
  bool admissible = true;
};

/// Random initial states in [-x0_range, x0_range]^d and random admissible
/// losses per run; run r draws from Rng::stream(seed, r). Runs are
/// independent, so the parallel kernel distributes them across threads.
std::vector<RunSummary> run_batch(std::span<const PlantModel> plants,
                                  const ScheduleLogic& schedule,
                                  std::span<const StabilityCertificate> certs,
                                  const BatchOptions& options,
                                  Execution exec = Execution::kParallel);

/// The initial states and loss signal that run_batch uses for run r.
std::vector<Vector> batch_initial_states(std::span<const PlantModel> plants,
                                         const BatchOptions& options, int run);
LossSignal batch_loss_signal(const ScheduleLogic& schedule,
                             const BatchOptions& options, int run);

}  // namespace ncsched
