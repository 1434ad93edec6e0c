#include <cmath>

#include <gtest/gtest.h>

#include "fixture.h"
#include "ncsched/errors.h"
#include "ncsched/loss_sim.h"

namespace ncsched {
namespace {

using testing::mat;

// Two scalar plants x+ = 2x + u with u = -1.5x, so the stable mode is 0.5
// and the unstable mode is 2.
std::vector<PlantModel> scalar_plants() {
  std::vector<PlantModel> out;
  for (int id = 1; id <= 2; ++id) {
    out.push_back({id, mat(1, 1, {2.0}), mat(1, 1, {1.0}), mat(1, 1, {-1.5})});
  }
  return out;
}

StabilityCertificate unit_certificate(int id, double lambda_s, double lambda_u) {
  StabilityCertificate c;
  c.plant_id = id;
  c.stable = {mat(1, 1, {1.0}), lambda_s};
  c.unstable = {mat(1, 1, {1.0}), lambda_u};
  return c;
}

ScheduleLogic alternating(int max_burst) {
  return ScheduleLogic({{ActiveSet::of({1}), ActiveSet::of({2})}, {1, 1}}, max_burst);
}

struct ExampleSetup {
  std::vector<StabilityCertificate> certs;
  ScheduleLogic schedule;
};

const ExampleSetup& example_setup() {
  static const ExampleSetup setup = [] {
    const auto& config = testing::example_config();
    ExampleSetup s;
    for (const auto& o : certify_all(config.plants, config.grid, config.selection_rule,
                                     config.network.max_burst)) {
      s.certs.push_back(*o.certificate);
    }
    const SynthesisReport r =
        synthesize_cycle(scalars_of(s.certs), config.network.capacity,
                         config.network.max_burst, SynthesisMode::kGivenPartition,
                         config.partition);
    s.schedule = ScheduleLogic(r.cycle, config.network.max_burst);
    return s;
  }();
  return setup;
}

TEST(LossSignals, WorstCasePattern) {
  const std::vector<int> offsets{0, 1};
  const LossSignal s = gen_worst_case(2, 7, 2, offsets);
  EXPECT_EQ(s.kappa[0], (std::vector<std::uint8_t>{1, 1, 0, 1, 1, 0, 1}));
  EXPECT_EQ(s.kappa[1], (std::vector<std::uint8_t>{0, 1, 1, 0, 1, 1, 0}));
  EXPECT_TRUE(validate_admissible(s, 2).admissible);
  EXPECT_FALSE(validate_admissible(s, 1).admissible);
  const std::vector<int> bad{3};
  EXPECT_THROW(gen_worst_case(1, 5, 2, bad), ValidationError);
}

TEST(LossSignals, RandomExtremes) {
  const LossSignal all = gen_random_admissible(1, 9, 2, 1.0, 5);
  EXPECT_EQ(all.kappa[0], (std::vector<std::uint8_t>{1, 1, 0, 1, 1, 0, 1, 1, 0}));
  const LossSignal none = gen_random_admissible(2, 50, 2, 0.0, 5);
  for (const auto& row : none.kappa) {
    for (auto k : row) EXPECT_EQ(k, 0);
  }
  EXPECT_THROW(gen_random_admissible(1, 5, 2, 1.5, 5), ValidationError);
}

TEST(LossSignals, RandomIsAdmissibleAndSeeded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LossSignal s = gen_random_admissible(3, 2000, 2, 0.6, seed);
    EXPECT_TRUE(validate_admissible(s, 2).admissible);
  }
  const LossSignal a = gen_random_admissible(2, 100, 2, 0.3, 11);
  const LossSignal b = gen_random_admissible(2, 100, 2, 0.3, 11);
  const LossSignal c = gen_random_admissible(2, 100, 2, 0.3, 12);
  EXPECT_EQ(a.kappa, b.kappa);
  EXPECT_NE(a.kappa, c.kappa);
  EXPECT_NE(a.kappa[0], a.kappa[1]);
}

TEST(LossSignals, RandomRateWithoutClipping) {
  const LossSignal s = gen_random_admissible(1, 200000, 1000, 0.3, 3);
  double count = 0;
  for (auto k : s.kappa[0]) count += k;
  EXPECT_NEAR(count / 200000.0, 0.3, 0.005);
}

TEST(ValidateAdmissible, ReportsRunStart) {
  LossSignal s = no_losses(2, 10);
  for (long long t = 4; t < 7; ++t) s.kappa[1][static_cast<std::size_t>(t)] = 1;
  const Admissibility a = validate_admissible(s, 2);
  EXPECT_FALSE(a.admissible);
  EXPECT_EQ(a.channel, 1);
  EXPECT_EQ(a.start, 4);
  EXPECT_TRUE(validate_admissible(s, 3).admissible);
}

TEST(Simulate, ScalarRecursion) {
  const auto plants = scalar_plants();
  const ScheduleLogic sched = alternating(1);
  LossSignal loss = no_losses(1, 4);
  loss.kappa[0][1] = 1;
  const std::vector<Vector> x0{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  const Trajectory traj = simulate(plants, sched, loss, x0, 4);
  // Plant 1 holds the channel at t = 0, 1 and loses t = 1.
  const auto& p1 = traj.plants[0];
  EXPECT_EQ(p1.modes, (std::vector<Mode>{Mode::kStable, Mode::kUnstable, Mode::kUnstable,
                                         Mode::kUnstable}));
  EXPECT_EQ(p1.loss_flags, (std::vector<std::uint8_t>{0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(p1.states[4](0), 0.5 * 2 * 2 * 2);
  const auto& p2 = traj.plants[1];
  EXPECT_DOUBLE_EQ(p2.states[4](0), 2 * 2 * 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(p2.norm2[4], 1.0);
}

TEST(Simulate, ZeroStateStaysZero) {
  const auto& plants = testing::example_plants();
  const ScheduleLogic& sched = example_setup().schedule;
  std::vector<Vector> x0;
  for (const auto& p : plants) x0.push_back(Vector::Zero(p.state_dim()));
  const Trajectory traj = simulate(plants, sched, gen_random_admissible(2, 200, 2, 0.5, 1), x0, 200);
  for (const auto& p : traj.plants) {
    for (double n : p.norm2) EXPECT_EQ(n, 0.0);
  }
}

TEST(Simulate, Rejections) {
  const auto plants = scalar_plants();
  const ScheduleLogic sched = alternating(1);
  const std::vector<Vector> x0{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  LossSignal burst = no_losses(1, 5);
  burst.kappa[0][0] = burst.kappa[0][1] = 1;
  EXPECT_THROW(simulate(plants, sched, burst, x0, 5), ValidationError);
  EXPECT_NO_THROW(simulate(plants, sched, burst, x0, 5, {.allow_inadmissible = true}));
  EXPECT_THROW(simulate(plants, sched, no_losses(1, 3), x0, 5), ValidationError);
  EXPECT_THROW(simulate(plants, sched, no_losses(2, 5), x0, 5), ValidationError);
  const std::vector<Vector> wrong{Vector::Constant(2, 1.0), Vector::Constant(1, 1.0)};
  EXPECT_THROW(simulate(plants, sched, no_losses(1, 5), wrong, 5), ValidationError);
}

TEST(Envelope, ExactScalarRatesHaveNoSlack) {
  // With P = 1, V follows psi exactly: V(t) = 0.25^Ds 4^Du V(0).
  const auto plants = scalar_plants();
  const ScheduleLogic sched = alternating(1);
  const std::vector<Vector> x0{Vector::Constant(1, 3.0), Vector::Constant(1, -2.0)};
  const Trajectory traj =
      simulate(plants, sched, gen_random_admissible(1, 60, 1, 0.4, 9), x0, 60);
  const std::vector<StabilityCertificate> exact{unit_certificate(1, 0.25, 4.0),
                                                unit_certificate(2, 0.25, 4.0)};
  const EnvelopeReport ok = envelope_check(traj, exact);
  EXPECT_TRUE(ok.ok());
  for (const auto& e : ok.plants) EXPECT_NEAR(e.worst_log_excess, 0.0, 1e-9);

  const Trajectory clean = simulate(plants, sched, no_losses(1, 60), x0, 60);
  const std::vector<StabilityCertificate> optimistic{unit_certificate(1, 0.2, 4.0),
                                                     unit_certificate(2, 0.25, 4.0)};
  const EnvelopeReport bad = envelope_check(clean, optimistic);
  EXPECT_EQ(bad.plants[0].stable_steps[4], 2);
  EXPECT_GT(bad.plants[0].violations, 0);
  EXPECT_EQ(bad.plants[1].violations, 0);
  EXPECT_EQ(bad.plants[0].first_violation, 1);
}

TEST(Envelope, SwitchCountsAndCosts) {
  // P_s = 1, P_u = 4: entering the unstable mode multiplies V by 4.
  const auto plants = scalar_plants();
  const ScheduleLogic sched = alternating(1);
  const std::vector<Vector> x0{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  const Trajectory traj = simulate(plants, sched, no_losses(1, 8), x0, 8);
  StabilityCertificate c = unit_certificate(1, 0.25, 4.0);
  c.unstable.P = mat(1, 1, {4.0});
  c.mu_su = 4.0;
  c.mu_us = 1.0;
  const std::vector<StabilityCertificate> certs{c, c};
  const EnvelopeReport r = envelope_check(traj, certs);
  EXPECT_TRUE(r.ok());
  // Plant 1: stable at t = 0, 1, unstable at 2, 3, stable at 4, ...
  EXPECT_EQ(r.plants[0].su_switches[2], 1);
  EXPECT_EQ(r.plants[0].us_switches[4], 1);
  EXPECT_EQ(r.plants[0].unstable_steps[4], 2);
  EXPECT_NEAR(r.plants[0].norm_constant, 2.0, 1e-15);

  c.mu_su = 3.9;
  const std::vector<StabilityCertificate> tight{c, c};
  EXPECT_GT(envelope_check(traj, tight).plants[0].violations, 0);
}

TEST(Envelope, ComputedCertificatesOnExample) {
  const auto& plants = testing::example_plants();
  const auto& setup = example_setup();
  const BatchOptions opts{.runs = 1, .horizon = 600, .seed = 4};
  const Trajectory traj = simulate(plants, setup.schedule, batch_loss_signal(setup.schedule, opts, 0),
                                   batch_initial_states(plants, opts, 0), 600);
  EXPECT_TRUE(envelope_check(traj, setup.certs).ok());
}

TEST(Gas, WorstCaseExample) {
  const auto& plants = testing::example_plants();
  const auto& setup = example_setup();
  const long long horizon = 12 * setup.schedule.period();
  const std::vector<int> offsets{0, 0};
  const LossSignal loss = gen_worst_case(2, horizon, 2, offsets);
  const Trajectory traj =
      simulate(plants, setup.schedule, loss, batch_initial_states(plants, {}, 0), horizon);
  const GasReport g = gas_empirical(traj, setup.schedule.period(), LossKind::kWorstCase);
  EXPECT_FALSE(g.skipped);
  EXPECT_TRUE(g.pass);
  EXPECT_EQ(g.plants[0].period_peaks.size(), 12u);
  EXPECT_LT(g.plants[0].period_peaks.back(), g.plants[0].period_peaks[1]);
}

TEST(Gas, SkippedOnShortHorizon) {
  const auto plants = scalar_plants();
  const ScheduleLogic sched = alternating(1);
  const std::vector<Vector> x0{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  const Trajectory traj = simulate(plants, sched, no_losses(1, 39), x0, 39);
  EXPECT_TRUE(gas_empirical(traj, 4, LossKind::kRandom).skipped);
  EXPECT_FALSE(gas_empirical(simulate(plants, sched, no_losses(1, 40), x0, 40), 4,
                             LossKind::kRandom)
                   .skipped);
}

TEST(Gas, DetectsGrowth) {
  // Always-unstable plant: never scheduled under a schedule that only serves
  // plant 1 and a phantom plant.
  std::vector<PlantModel> plants = scalar_plants();
  const ScheduleLogic sched({{ActiveSet::of({1}), ActiveSet::of({3})}, {1, 1}}, 1);
  const std::vector<Vector> x0{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  const Trajectory traj = simulate(plants, sched, no_losses(1, 40), x0, 40);
  const GasReport g = gas_empirical(traj, 4, LossKind::kWorstCase);
  EXPECT_FALSE(g.plants[1].peaks_non_increasing);
  EXPECT_FALSE(g.pass);
  EXPECT_FALSE(gas_empirical(traj, 4, LossKind::kRandom).pass);
}

TEST(Windows, GuaranteedStepsUnderWorstCase) {
  const auto& plants = testing::example_plants();
  const auto& setup = example_setup();
  const long long horizon = 3 * setup.schedule.period();
  const std::vector<int> offsets{0, 0};
  const Trajectory traj = simulate(plants, setup.schedule, gen_worst_case(2, horizon, 2, offsets),
                                   batch_initial_states(plants, {}, 0), horizon);
  const auto windows = closed_loop_steps_per_window(traj, setup.schedule);
  EXPECT_EQ(windows.size(), 3 * setup.schedule.segments().size() * 2);
  for (const auto& w : windows) EXPECT_EQ(w.stable_steps, w.t_factor);

  const Trajectory clean = simulate(plants, setup.schedule, no_losses(2, horizon),
                                    batch_initial_states(plants, {}, 0), horizon);
  for (const auto& w : closed_loop_steps_per_window(clean, setup.schedule)) {
    EXPECT_EQ(w.stable_steps, w.t_factor * 3);
  }
}

TEST(Batch, InitialStatesInRangeAndReproducible) {
  const auto& plants = testing::example_plants();
  const BatchOptions opts{.seed = 77, .x0_range = 2.5};
  const auto a = batch_initial_states(plants, opts, 3);
  EXPECT_EQ(a.size(), plants.size());
  for (const auto& x : a) EXPECT_LE(x.cwiseAbs().maxCoeff(), 2.5);
  const auto b = batch_initial_states(plants, opts, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], batch_initial_states(plants, opts, 4)[0]);
}

TEST(Batch, ExampleRunsStayInEnvelope) {
  const auto& plants = testing::example_plants();
  const auto& setup = example_setup();
  const BatchOptions opts{.runs = 6, .horizon = 15 * setup.schedule.period(), .seed = 20190101};
  const auto runs = run_batch(plants, setup.schedule, setup.certs, opts, Execution::kSerial);
  ASSERT_EQ(runs.size(), 6u);
  for (const auto& r : runs) {
    EXPECT_TRUE(r.admissible);
    EXPECT_EQ(r.envelope_violations, 0);
    EXPECT_TRUE(r.gas_pass);
    EXPECT_EQ(r.decay_time.size(), plants.size());
  }
}

}  // namespace
}  // namespace ncsched
