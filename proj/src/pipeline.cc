#include "ncsched/pipeline.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ncsched/errors.h"
#include "ncsched/rng.h"

namespace ncsched {

namespace {

constexpr int kCertificateSamples = 1000;

std::filesystem::path out_path(const CommandOptions& options, const char* name) {
  return options.out_dir / name;
}

// Returns false (after printing the report) when the standing assumptions fail
// and no override was given.
bool check_assumptions(const RunConfig& config, const CommandOptions& options,
                       std::ostream& out) {
  const ValidationReport report = validate_network(config.plants, config.network);
  if (report.ok()) return true;
  out << "validation failed:\n" << report.summary();
  if (options.override_validation) {
    out << "continuing because --override-validation was given\n";
    return true;
  }
  return false;
}

std::vector<StabilityCertificate> compute_certificates(const RunConfig& config,
                                                       const CommandOptions& options) {
  const auto outcomes = certify_all(config.plants, config.grid, config.selection_rule,
                                    config.network.max_burst, options.exec);
  std::vector<StabilityCertificate> certs;
  std::string errors;
  for (const auto& o : outcomes) {
    if (o.certificate) {
      certs.push_back(*o.certificate);
    } else {
      errors += (errors.empty() ? "" : "; ") + o.error;
    }
  }
  if (!errors.empty()) throw InfeasibleError(errors);
  return certs;
}

std::vector<StabilityCertificate> obtain_certificates(const RunConfig& config,
                                                      const CommandOptions& options) {
  if (options.certificates_path) {
    auto certs = parse_certificates_json(read_file(*options.certificates_path));
    if (certs.size() != config.plants.size()) {
      throw ValidationError("certificate file does not match the plant count");
    }
    return certs;
  }
  return compute_certificates(config, options);
}

SynthesisMode mode_of(const RunConfig& config, const CommandOptions& options) {
  return options.mode.value_or(config.mode);
}

SynthesisReport synthesize(const RunConfig& config, const CommandOptions& options,
                           std::span<const CertificateScalars> scalars) {
  TFactorOptions t_options;
  t_options.exec = options.exec;
  return synthesize_cycle(scalars, config.network.capacity, config.network.max_burst,
                          mode_of(config, options), config.partition, t_options);
}

long long horizon_of(const RunConfig& config, const CommandOptions& options) {
  return options.horizon.value_or(config.simulation.horizon);
}

BatchOptions batch_options(const RunConfig& config, const CommandOptions& options) {
  BatchOptions b;
  b.runs = config.simulation.runs;
  b.horizon = horizon_of(config, options);
  b.seed = options.seed.value_or(config.simulation.seed);
  b.loss_prob = options.loss_prob.value_or(config.simulation.loss_prob);
  b.x0_range = config.simulation.x0_range;
  if (b.horizon < 1) throw ValidationError("horizon must be >= 1");
  if (!(b.loss_prob >= 0.0 && b.loss_prob <= 1.0)) {
    throw ValidationError("loss probability must lie in [0, 1]");
  }
  return b;
}

void print_certificate_table(std::span<const StabilityCertificate> certs,
                             std::ostream& out) {
  out << "plant  lambda_s   lambda_u   mu_su      mu_us      budget\n";
  for (const auto& c : certs) {
    out << std::setw(5) << c.plant_id << "  " << format_fixed(c.stable.lambda, 6) << "  "
        << format_fixed(c.unstable.lambda, 6) << "  " << std::setw(9)
        << format_fixed(c.mu_su, 4) << "  " << std::setw(9) << format_fixed(c.mu_us, 4)
        << "  " << format_fixed(c.budget, 4) << "\n";
  }
}

struct SimulationOutcome {
  long long envelope_violations = 0;
  int gas_failures = 0;
  int decay_failures = 0;
  bool gas_skipped = false;
  bool worst_case_pass = true;
  bool all_pass() const {
    return envelope_violations == 0 && gas_failures == 0 && decay_failures == 0 &&
           worst_case_pass;
  }
};

std::string runs_csv(const std::vector<RunSummary>& runs) {
  std::string out = "run,plant,x0_norm,final_norm2,decay_time,envelope_violations,gas_pass\n";
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.x0.size(); ++i) {
      out += std::to_string(r.run) + "," + std::to_string(i + 1) + "," +
             format_exact(r.x0[i].norm()) + "," + format_exact(r.final_norm2[i]) + "," +
             std::to_string(r.decay_time[i]) + "," +
             std::to_string(r.envelope_violations) + "," + (r.gas_pass ? "1" : "0") +
             "\n";
    }
  }
  return out;
}

SimulationOutcome run_simulation(const RunConfig& config, const CommandOptions& options,
                                 const ScheduleLogic& schedule,
                                 std::span<const StabilityCertificate> certs,
                                 std::ostream& out) {
  const BatchOptions batch = batch_options(config, options);
  SimulationOutcome result;
  if (batch.horizon < schedule.period()) {
    out << "warning: horizon " << batch.horizon << " is shorter than one period ("
        << schedule.period() << ")\n";
  }

  const auto runs = run_batch(config.plants, schedule, certs, batch, options.exec);

  // Run 0 is recorded in full, replaying a loss file when one is configured.
  LossSignal loss0 = batch_loss_signal(schedule, batch, 0);
  SimulationOptions sim_options;
  if (config.simulation.loss_file) {
    loss0 = parse_losses_csv(read_file(*config.simulation.loss_file));
    sim_options.allow_inadmissible = options.override_validation;
  }
  const auto x0 = batch_initial_states(config.plants, batch, 0);
  const Trajectory traj0 =
      simulate(config.plants, schedule, loss0, x0, batch.horizon, sim_options);
  write_file(out_path(options, "trajectory.csv"), trajectory_csv(traj0));
  write_file(out_path(options, "losses.csv"), losses_csv(loss0));
  write_file(out_path(options, "runs.csv"), runs_csv(runs));

  for (const auto& r : runs) {
    result.envelope_violations += r.envelope_violations;
    result.gas_failures += r.gas_pass ? 0 : 1;
    for (std::size_t i = 0; i < r.decay_time.size(); ++i) {
      if (r.decay_time[i] < 0) ++result.decay_failures;
    }
  }
  if (config.simulation.loss_file) {
    result.envelope_violations += envelope_check(traj0, certs).violations;
  }

  std::vector<int> offsets(static_cast<std::size_t>(schedule.capacity()), 0);
  const LossSignal worst = gen_worst_case(schedule.capacity(), batch.horizon,
                                          schedule.max_burst(), offsets);
  const Trajectory worst_traj = simulate(config.plants, schedule, worst, x0, batch.horizon);
  const GasReport gas = gas_empirical(worst_traj, schedule.period(), LossKind::kWorstCase);
  result.gas_skipped = gas.skipped;
  result.worst_case_pass = gas.pass;
  result.envelope_violations += envelope_check(worst_traj, certs).violations;

  out << "simulation: " << batch.runs << " runs, horizon " << batch.horizon
      << ", seed " << batch.seed << ", loss probability " << batch.loss_prob << "\n";
  out << "  envelope violations: " << result.envelope_violations << "\n";
  if (gas.skipped) {
    out << "  " << gas.note << "\n";
  } else {
    out << "  random-loss runs failing the final-norm check: " << result.gas_failures
        << "\n"
        << "  worst-case burst run, period peaks non-increasing: "
        << (gas.pass ? "yes" : "NO") << "\n";
  }
  out << "  plant trajectories not reaching |x|^2 < " << batch.decay_ratio
      << " |x0|^2: " << result.decay_failures << (gas.skipped ? " (not judged)" : "")
      << "\n";
  if (gas.skipped) {
    result.gas_failures = 0;
    result.decay_failures = 0;
    result.worst_case_pass = true;
  }
  return result;
}

ScheduleLogic obtain_schedule(const RunConfig& config, const CommandOptions& options,
                              std::span<const CertificateScalars> scalars) {
  const int ell = config.network.max_burst;
  if (options.schedule_path) {
    ScheduleLogic s = parse_schedule_period_text(read_file(*options.schedule_path));
    if (s.max_burst() != ell) {
      throw ValidationError("schedule was built for a different max burst");
    }
    return build_schedule(s.cycle(), ell, scalars, !options.override_validation);
  }
  if (options.cycle_path) {
    const Cycle c = parse_cycle_csv(read_file(*options.cycle_path));
    return build_schedule(c, ell, scalars, !options.override_validation);
  }
  return build_schedule(synthesize(config, options, scalars).cycle, ell);
}

template <typename Fn>
int guarded(std::ostream& out, Fn&& fn) {
  try {
    return fn();
  } catch (const InfeasibleError& e) {
    out << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cmd_certify(const RunConfig& config, const CommandOptions& options,
                std::ostream& out) {
  return guarded(out, [&] {
    if (!check_assumptions(config, options, out)) return 2;
    const auto outcomes = certify_all(config.plants, config.grid, config.selection_rule,
                                      config.network.max_burst, options.exec);
    std::vector<StabilityCertificate> certs;
    int failures = 0;
    for (const auto& o : outcomes) {
      if (o.certificate) {
        certs.push_back(*o.certificate);
      } else {
        out << "plant " << o.plant_id << ": " << o.error << "\n";
        ++failures;
      }
    }
    if (failures > 0) return 1;
    write_file(out_path(options, "certificates.json"),
               certificates_json(certs, config.network.max_burst));
    write_file(out_path(options, "certificates.csv"), certificates_csv(certs));
    write_file(out_path(options, "certificates.txt"),
               certificates_report(certs, config.network.max_burst));
    out << "certified " << certs.size() << " plants (grid " << config.grid << ", rule "
        << to_string(config.selection_rule) << ")\n";
    print_certificate_table(certs, out);
    return 0;
  });
}

int cmd_synthesize(const RunConfig& config, const CommandOptions& options,
                   std::ostream& out) {
  return guarded(out, [&] {
    if (!check_assumptions(config, options, out)) return 2;
    const auto certs = obtain_certificates(config, options);
    const auto scalars = scalars_of(certs);
    const SynthesisReport report = synthesize(config, options, scalars);
    const ScheduleLogic schedule = build_schedule(report.cycle, config.network.max_burst);
    const std::string text =
        synthesis_report_text(report, scalars, config.network.max_burst);
    write_file(out_path(options, "synthesis_report.txt"), text);
    write_file(out_path(options, "cycle.csv"), cycle_csv(report.cycle));
    write_file(out_path(options, "schedule_period.txt"), schedule_period_text(schedule));
    write_file(out_path(options, "schedule.csv"),
               schedule_csv(schedule, horizon_of(config, options)));
    out << text << "period = " << schedule.period() << "\n";
    return 0;
  });
}

int cmd_schedule(const RunConfig& config, const CommandOptions& options,
                 std::ostream& out) {
  return guarded(out, [&] {
    if (!check_assumptions(config, options, out)) return 2;
    const auto certs = obtain_certificates(config, options);
    const auto scalars = scalars_of(certs);
    const ScheduleLogic schedule = obtain_schedule(config, options, scalars);
    write_file(out_path(options, "schedule_period.txt"), schedule_period_text(schedule));
    write_file(out_path(options, "schedule.csv"),
               schedule_csv(schedule, horizon_of(config, options)));
    out << schedule_period_text(schedule);
    return 0;
  });
}

int cmd_simulate(const RunConfig& config, const CommandOptions& options,
                 std::ostream& out) {
  return guarded(out, [&] {
    if (!check_assumptions(config, options, out)) return 2;
    const auto certs = obtain_certificates(config, options);
    const auto scalars = scalars_of(certs);
    const ScheduleLogic schedule = obtain_schedule(config, options, scalars);
    const SimulationOutcome r = run_simulation(config, options, schedule, certs, out);
    out << (r.all_pass() ? "PASS" : "FAIL") << "\n";
    return r.all_pass() ? 0 : 1;
  });
}

int cmd_check(const RunConfig& config, const CommandOptions& options,
              std::ostream& out) {
  return guarded(out, [&] {
    const ValidationReport report = validate_network(config.plants, config.network);
    out << "standing assumptions:\n" << report.summary();
    bool ok = report.ok();
    if (!ok && !options.override_validation) return 2;

    const auto certs = obtain_certificates(config, options);
    out << "certificate checks (" << kCertificateSamples << " samples each):\n";
    for (std::size_t i = 0; i < certs.size(); ++i) {
      const CertificateCheck c =
          verify_certificate(config.plants[i], certs[i], kCertificateSamples,
                             mix_seed(options.seed.value_or(config.simulation.seed), i));
      out << "  plant " << certs[i].plant_id << ": " << (c.ok ? "ok" : "FAIL")
          << " (max decrease violation " << c.max_decrease_violation << ", max comparison violation "
          << c.max_comparison_violation << ")\n";
      ok = ok && c.ok;
    }
    const auto scalars = scalars_of(certs);
    const int n = static_cast<int>(config.plants.size());
    const GlobalSufficiency g = check_global_sufficiency(
        scalars, n, config.network.capacity, config.network.max_burst);
    out << "balanced-group condition: " << (g.balanced_holds ? "holds" : "fails") << "\n";
    if (g.half_capacity_applicable) {
      out << "pairs condition: " << (g.half_capacity_holds ? "holds" : "fails") << "\n";
    }
    out << "any-capacity condition: " << (g.any_capacity_holds ? "holds" : "fails") << "\n";
    if (config.partition) {
      const UniformSufficiency u =
          check_uniform_sufficiency(*config.partition, scalars, config.network.max_burst);
      out << "configured partition " << to_string(*config.partition) << ": "
          << (u.holds ? "holds" : "fails") << "\n";
    }
    return ok ? 0 : 1;
  });
}

int cmd_reproduce_example(const CommandOptions& options, std::ostream& out) {
  return guarded(out, [&] {
    const RunConfig config = parse_config(example_config_json());
    const int n = static_cast<int>(config.plants.size());
    const int m = config.network.capacity;
    const int ell = config.network.max_burst;
    if (!check_assumptions(config, options, out)) return 2;
    out << "N = " << n << ", M = " << m << ", max burst = " << ell
        << ", |V| = " << binomial(n, m) << "\n\n";

    const auto certs = compute_certificates(config, options);
    const auto scalars = scalars_of(certs);
    const auto& ref = config.reference->plants;
    write_file(out_path(options, "certificates.json"), certificates_json(certs, ell));
    write_file(out_path(options, "certificates.csv"), certificates_csv(certs));

    out << "certificate scalars, computed vs reference:\n"
        << "plant  lambda_s (ref)       lambda_u (ref)       mu_su (ref)            "
           "mu_us (ref)\n";
    for (int i = 0; i < n; ++i) {
      const auto& c = scalars[static_cast<std::size_t>(i)];
      const auto& r = ref[static_cast<std::size_t>(i)];
      out << std::setw(5) << i + 1 << "  " << format_fixed(c.lambda_s, 4) << " ("
          << format_fixed(r.lambda_s, 4) << ")      " << format_fixed(c.lambda_u, 4)
          << " (" << format_fixed(r.lambda_u, 4) << ")      " << std::setw(8)
          << format_fixed(c.mu_su, 4) << " (" << std::setw(8) << format_fixed(r.mu_su, 4)
          << ")   " << format_fixed(c.mu_us, 4) << " (" << format_fixed(r.mu_us, 4)
          << ")\n";
    }

    const Partition& partition = *config.partition;
    out << "\nsufficiency with reference scalars, partition " << to_string(partition)
        << ":\n";
    const UniformSufficiency u = check_uniform_sufficiency(partition, ref, ell);
    for (const auto& mg : u.margins) {
      out << "  plant " << mg.plant << ": " << format_fixed(mg.lhs, 4)
          << (mg.holds() ? " > " : " <= ") << format_fixed(mg.rhs, 4) << "\n";
    }
    const GlobalSufficiency g = check_global_sufficiency(ref, n, m, ell);
    out << "  balanced-group condition: " << (g.balanced_holds ? "holds" : "fails")
        << "; any-capacity condition: " << (g.any_capacity_holds ? "holds" : "fails")
        << "\n";

    TFactorOptions t_options;
    t_options.exec = options.exec;
    std::vector<PartitionCycle> groups;
    for (const auto& group : partition.groups) {
      auto rr = round_robin_cycle(group, ref, ell, t_options);
      if (!rr) throw InfeasibleError("reference partition has no contractive group cycle");
      groups.push_back(std::move(*rr));
    }
    const Composition comp = compose_partition_cycles(groups, ref, ell);
    out << "\ngroup cycles with reference scalars (K = " << comp.period_units << "):\n";
    for (std::size_t j = 0; j < groups.size(); ++j) {
      Cycle scaled = groups[j].as_cycle();
      for (auto& t : scaled.t_factors) t *= comp.scales[j];
      out << "  group " << ActiveSet::of(groups[j].plants).to_string()
          << ": uniform T = " << scaled.t_factors.front() << ", zbar";
      for (int p : groups[j].plants) {
        out << " " << format_fixed(zbar(scaled, p, ref, ell), 4);
      }
      out << "\n";
    }
    out << "composed cycle:";
    for (std::size_t k = 0; k < comp.cycle.vertices.size(); ++k) {
      out << " " << comp.cycle.vertices[k].to_string() << ":" << comp.cycle.t_factors[k];
    }
    out << "\n  zbar";
    for (double z : comp.contraction.zbar) out << " " << format_fixed(z, 4);
    out << "\n\n";

    const SynthesisReport report = synthesize(config, options, scalars);
    const ScheduleLogic schedule = build_schedule(report.cycle, ell);
    write_file(out_path(options, "synthesis_report.txt"),
               synthesis_report_text(report, scalars, ell));
    write_file(out_path(options, "cycle.csv"), cycle_csv(report.cycle));
    write_file(out_path(options, "schedule_period.txt"), schedule_period_text(schedule));
    write_file(out_path(options, "schedule.csv"),
               schedule_csv(schedule, horizon_of(config, options)));
    out << "synthesized with computed certificates (" << report.route << "):";
    for (std::size_t k = 0; k < report.cycle.vertices.size(); ++k) {
      out << " " << report.cycle.vertices[k].to_string() << ":" << report.cycle.t_factors[k];
    }
    out << "\n  period " << schedule.period() << ", epsilon "
        << format_fixed(report.contraction.epsilon, 4) << "\n\n";

    const SimulationOutcome r = run_simulation(config, options, schedule, certs, out);
    out << (r.all_pass() ? "PASS" : "FAIL") << "\n";
    return r.all_pass() ? 0 : 1;
  });
}

}  // namespace ncsched
