#include "ncsched/loss_sim.h"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "ncsched/errors.h"
#include "ncsched/rng.h"

namespace ncsched {

namespace {

// Below this the quadratic form carries too few significant bits for a
// relative comparison.
constexpr double kLyapunovFloor = DBL_MIN * 0x1.0p52;
constexpr double kPeakSlack = 1e-9;
constexpr double kFinalRatio = 1e-3;
constexpr long long kMinPeriodsForGas = 10;

std::vector<Vector> draw_initial_states(Rng& rng,
                                        std::span<const PlantModel> plants,
                                        double range) {
  std::vector<Vector> out;
  for (const auto& p : plants) {
    Vector x(p.A.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-range, range);
    out.push_back(std::move(x));
  }
  return out;
}

double peak_norm(const PlantTrajectory& p, long long from, long long to) {
  double peak = 0.0;
  for (long long t = from; t < to; ++t) {
    peak = std::max(peak, std::sqrt(p.norm2[static_cast<std::size_t>(t)]));
  }
  return peak;
}

RunSummary run_one(std::span<const PlantModel> plants,
                   const ScheduleLogic& schedule,
                   std::span<const StabilityCertificate> certs,
                   const BatchOptions& options, int run) {
  RunSummary summary;
  summary.run = run;
  summary.x0 = batch_initial_states(plants, options, run);
  const LossSignal loss = batch_loss_signal(schedule, options, run);
  summary.admissible = validate_admissible(loss, schedule.max_burst()).admissible;
  const Trajectory traj =
      simulate(plants, schedule, loss, summary.x0, options.horizon);
  summary.envelope_violations = envelope_check(traj, certs).violations;
  summary.gas_pass =
      gas_empirical(traj, schedule.period(), LossKind::kRandom).pass;
  for (const auto& p : traj.plants) {
    summary.final_norm2.push_back(p.norm2.back());
    const double threshold = options.decay_ratio * p.norm2.front();
    long long when = -1;
    for (std::size_t t = 0; t < p.norm2.size(); ++t) {
      if (p.norm2[t] < threshold || (p.norm2.front() == 0.0 && p.norm2[t] == 0.0)) {
        when = static_cast<long long>(t);
        break;
      }
    }
    summary.decay_time.push_back(when);
  }
  return summary;
}

}  // namespace

LossSignal no_losses(int channels, long long horizon) {
  if (channels < 1 || horizon < 0) {
    throw ValidationError("loss signal needs >= 1 channel and horizon >= 0");
  }
  LossSignal s;
  s.channels = channels;
  s.horizon = horizon;
  s.kappa.assign(static_cast<std::size_t>(channels),
                 std::vector<std::uint8_t>(static_cast<std::size_t>(horizon), 0));
  return s;
}

LossSignal gen_random_admissible(int channels, long long horizon,
                                 int max_burst, double loss_prob,
                                 std::uint64_t seed) {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) {
    throw ValidationError("loss probability must lie in [0, 1]");
  }
  if (max_burst < 0) throw ValidationError("max burst length must be >= 0");
  LossSignal s = no_losses(channels, horizon);
  for (int c = 0; c < channels; ++c) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    auto& row = s.kappa[static_cast<std::size_t>(c)];
    int run = 0;
    for (auto& k : row) {
      const bool draw = rng.bernoulli(loss_prob);
      if (draw && run < max_burst) {
        k = 1;
        ++run;
      } else {
        run = 0;
      }
    }
  }
  return s;
}

LossSignal gen_worst_case(int channels, long long horizon, int max_burst,
                          std::span<const int> offsets) {
  if (static_cast<int>(offsets.size()) != channels) {
    throw ValidationError("need one phase offset per channel");
  }
  LossSignal s = no_losses(channels, horizon);
  const long long block = max_burst + 1;
  for (int c = 0; c < channels; ++c) {
    const int offset = offsets[static_cast<std::size_t>(c)];
    if (offset < 0 || offset > max_burst) {
      throw ValidationError("phase offsets must lie in [0, max burst]");
    }
    for (long long t = 0; t < horizon; ++t) {
      const long long phase = ((t - offset) % block + block) % block;
      s.kappa[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] =
          phase < max_burst ? 1 : 0;
    }
  }
  return s;
}

Admissibility validate_admissible(const LossSignal& signal, int max_burst) {
  for (int c = 0; c < signal.channels; ++c) {
    const auto& row = signal.kappa[static_cast<std::size_t>(c)];
    long long run = 0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      run = row[t] != 0 ? run + 1 : 0;
      if (run > max_burst) {
        return {false, c, static_cast<long long>(t) - max_burst};
      }
    }
  }
  return {};
}

Trajectory simulate(std::span<const PlantModel> plants,
                    const ScheduleLogic& schedule, const LossSignal& loss,
                    std::span<const Vector> x0, long long horizon,
                    const SimulationOptions& options) {
  if (horizon < 0) throw ValidationError("horizon must be >= 0");
  if (x0.size() != plants.size()) {
    throw ValidationError("need one initial state per plant");
  }
  if (loss.channels != schedule.capacity() || loss.horizon < horizon) {
    throw ValidationError("loss signal must cover every channel and the horizon");
  }
  if (!options.allow_inadmissible) {
    const Admissibility a = validate_admissible(loss, schedule.max_burst());
    if (!a.admissible) {
      throw ValidationError("loss signal is not admissible: channel " +
                            std::to_string(a.channel + 1) + " has a run longer than " +
                            std::to_string(schedule.max_burst()) + " starting at t = " +
                            std::to_string(a.start));
    }
  }
  Trajectory traj;
  traj.horizon = horizon;
  for (std::size_t i = 0; i < plants.size(); ++i) {
    const PlantModel& plant = plants[i];
    if (plant.id != static_cast<int>(i) + 1) {
      throw ValidationError("plants must be ordered by id 1..N");
    }
    if (x0[i].size() != plant.A.rows()) {
      throw ValidationError("initial state of plant " + std::to_string(plant.id) +
                            " has the wrong dimension");
    }
    const Matrix A_s = closed_loop_matrix(plant);
    PlantTrajectory p;
    p.plant_id = plant.id;
    p.states.reserve(static_cast<std::size_t>(horizon) + 1);
    p.states.push_back(x0[i]);
    p.norm2.push_back(x0[i].squaredNorm());
    for (long long t = 0; t < horizon; ++t) {
      const int channel = schedule.channel_of(plant.id, t);
      const bool dropped = channel >= 0 && loss.lost(channel, t);
      const bool stable = channel >= 0 && !dropped;
      p.modes.push_back(stable ? Mode::kStable : Mode::kUnstable);
      p.loss_flags.push_back(dropped ? 1 : 0);
      Vector next = (stable ? A_s : plant.A) * p.states.back();
      p.norm2.push_back(next.squaredNorm());
      p.states.push_back(std::move(next));
    }
    traj.plants.push_back(std::move(p));
  }
  return traj;
}

EnvelopeReport envelope_check(const Trajectory& trajectory,
                              std::span<const StabilityCertificate> certs,
                              double rel_tol) {
  if (certs.size() != trajectory.plants.size()) {
    throw ValidationError("need one certificate per simulated plant");
  }
  EnvelopeReport report;
  const double log_tol = std::log1p(rel_tol);
  for (std::size_t i = 0; i < trajectory.plants.size(); ++i) {
    const PlantTrajectory& p = trajectory.plants[i];
    const StabilityCertificate& c = certs[i];
    const Matrix& Ps = c.stable.P;
    const Matrix& Pu = c.unstable.P;
    const double ln_ls = std::log(c.stable.lambda);
    const double ln_lu = std::log(c.unstable.lambda);
    const double ln_su = std::log(c.mu_su);
    const double ln_us = std::log(c.mu_us);

    EnvelopeTrace e;
    e.plant_id = p.plant_id;
    Eigen::SelfAdjointEigenSolver<Matrix> es(Ps, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> eu(Pu, Eigen::EigenvaluesOnly);
    e.norm_constant = std::sqrt(
        std::max(es.eigenvalues().maxCoeff(), eu.eigenvalues().maxCoeff()) /
        std::min(es.eigenvalues().minCoeff(), eu.eigenvalues().minCoeff()));

    const std::size_t steps = p.modes.size();
    long long ds = 0, du = 0, nsu = 0, nus = 0;
    double log_v0 = 0.0;
    bool v0_zero = false;
    for (std::size_t t = 0; t < steps; ++t) {
      const Mode mode = p.modes[t];
      if (t > 0 && mode != p.modes[t - 1]) {
        if (mode == Mode::kUnstable) ++nsu;
        else ++nus;
      }
      const Matrix& P = mode == Mode::kStable ? Ps : Pu;
      const double v = p.states[t].dot(P * p.states[t]);
      const double log_psi = ln_ls * static_cast<double>(ds) +
                             ln_lu * static_cast<double>(du) +
                             ln_su * static_cast<double>(nsu) +
                             ln_us * static_cast<double>(nus);
      e.stable_steps.push_back(ds);
      e.unstable_steps.push_back(du);
      e.su_switches.push_back(nsu);
      e.us_switches.push_back(nus);
      e.log_psi.push_back(log_psi);
      e.lyapunov.push_back(v);
      if (t == 0) {
        v0_zero = !(v > 0.0);
        log_v0 = v0_zero ? 0.0 : std::log(v);
      } else if (!v0_zero && v >= kLyapunovFloor) {
        const double excess = std::log(v) - log_v0 - log_psi;
        e.worst_log_excess = std::max(e.worst_log_excess, excess);
        if (excess > log_tol) {
          if (e.violations == 0) e.first_violation = static_cast<long long>(t);
          ++e.violations;
        }
      }
      if (mode == Mode::kStable) ++ds;
      else ++du;
    }
    report.violations += e.violations;
    report.plants.push_back(std::move(e));
  }
  return report;
}

GasReport gas_empirical(const Trajectory& trajectory, long long period,
                        LossKind kind) {
  GasReport report;
  if (period < 1) throw ValidationError("period must be positive");
  if (trajectory.horizon < kMinPeriodsForGas * period) {
    report.skipped = true;
    report.note = "horizon " + std::to_string(trajectory.horizon) +
                  " is shorter than 10 periods (" +
                  std::to_string(kMinPeriodsForGas * period) +
                  "); stability check skipped";
    return report;
  }
  const long long periods = (trajectory.horizon + 1) / period;
  for (const auto& p : trajectory.plants) {
    GasPlantResult r;
    r.plant_id = p.plant_id;
    for (long long k = 0; k < periods; ++k) {
      r.period_peaks.push_back(peak_norm(p, k * period, (k + 1) * period));
    }
    for (std::size_t k = 2; k < r.period_peaks.size(); ++k) {
      if (r.period_peaks[k] >
          r.period_peaks[k - 1] * (1.0 + kPeakSlack) + DBL_MIN) {
        r.peaks_non_increasing = false;
      }
    }
    r.initial_norm = std::sqrt(p.norm2.front());
    r.final_norm = std::sqrt(p.norm2.back());
    r.final_small = r.final_norm < kFinalRatio * std::max(1.0, r.initial_norm);
    r.pass = kind == LossKind::kWorstCase ? r.peaks_non_increasing : r.final_small;
    report.pass = report.pass && r.pass;
    report.plants.push_back(std::move(r));
  }
  return report;
}

std::vector<WindowCount> closed_loop_steps_per_window(
    const Trajectory& trajectory, const ScheduleLogic& schedule) {
  std::vector<WindowCount> out;
  const long long period = schedule.period();
  const auto& segments = schedule.segments();
  for (long long base = 0; base < trajectory.horizon; base += period) {
    for (std::size_t k = 0; k < segments.size(); ++k) {
      const auto& seg = segments[k];
      const long long start = base + seg.start;
      if (start + seg.length > trajectory.horizon) return out;
      for (int plant : seg.active) {
        const auto& p = trajectory.plants[static_cast<std::size_t>(plant - 1)];
        long long count = 0;
        for (long long t = start; t < start + seg.length; ++t) {
          count += p.modes[static_cast<std::size_t>(t)] == Mode::kStable ? 1 : 0;
        }
        out.push_back({plant, static_cast<int>(k), start, count, seg.t_factor});
      }
    }
  }
  return out;
}

std::vector<Vector> batch_initial_states(std::span<const PlantModel> plants,
                                         const BatchOptions& options, int run) {
  Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(run));
  return draw_initial_states(rng, plants, options.x0_range);
}

LossSignal batch_loss_signal(const ScheduleLogic& schedule,
                             const BatchOptions& options, int run) {
  // Separate from the initial-state stream of the same run.
  const std::uint64_t loss_seed =
      mix_seed(options.seed ^ 0xA5A5A5A5A5A5A5A5ULL, static_cast<std::uint64_t>(run));
  return gen_random_admissible(schedule.capacity(), options.horizon,
                               schedule.max_burst(), options.loss_prob,
                               loss_seed);
}

std::vector<RunSummary> run_batch(std::span<const PlantModel> plants,
                                  const ScheduleLogic& schedule,
                                  std::span<const StabilityCertificate> certs,
                                  const BatchOptions& options, Execution exec) {
  if (options.runs < 0) throw ValidationError("run count must be >= 0");
  std::vector<RunSummary> out(static_cast<std::size_t>(options.runs));
  if (exec == Execution::kSerial) {
    for (int r = 0; r < options.runs; ++r) {
      out[static_cast<std::size_t>(r)] = run_one(plants, schedule, certs, options, r);
    }
    return out;
  }
  std::vector<std::string> errors(static_cast<std::size_t>(options.runs));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < options.runs; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = run_one(plants, schedule, certs, options, r);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(r)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw ValidationError(e);
  }
  return out;
}

}  // namespace ncsched
