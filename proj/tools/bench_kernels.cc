// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "ncsched/certificates.h"
#include "ncsched/cycle_synthesis.h"
#include "ncsched/io.h"
#include "ncsched/loss_sim.h"
#include "ncsched/pipeline.h"

namespace {

using namespace ncsched;

const RunConfig& config() {
  static const RunConfig c = parse_config(example_config_json());
  return c;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial"
                                     : "parallel x" + std::to_string(parallel_threads()));
}

void BM_PairSearch(benchmark::State& state) {
  const PlantModel& plant = config().plants[0];
  const auto stable = certify_stable_mode(stable_mode_matrix(plant), 1000);
  const auto unstable = certify_unstable_mode(unstable_mode_matrix(plant), 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_certificate_pair(stable, unstable, SelectionRule::kMaxBudget,
                                                     2, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(stable.size()) *
                          static_cast<long long>(unstable.size()));
  label(state);
}

void BM_CertifyAll(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        certify_all(config().plants, 400, SelectionRule::kMaxBudget, 2, exec_of(state)));
  }
  label(state);
}

void BM_TFactorEnumeration(benchmark::State& state) {
  const auto& ref = config().reference->plants;
  const std::vector<Vertex> v{ActiveSet::of({1, 2}), ActiveSet::of({3, 4}),
                              ActiveSet::of({1, 5}), ActiveSet::of({2, 3}),
                              ActiveSet::of({4, 5}), ActiveSet::of({1, 3})};
  TFactorOptions o;
  o.method = TFactorMethod::kEnum;
  o.t_max = 9;
  o.exec = exec_of(state);
  for (auto _ : state) {
    // With bursts of 40 no T in the box contracts plant 1, so every vector
    // is evaluated.
    benchmark::DoNotOptimize(solve_t_factors(v, ref, 40, o));
  }
  state.SetItemsProcessed(state.iterations() * 531441);
  label(state);
}

void BM_SimulationBatch(benchmark::State& state) {
  const auto outcomes = certify_all(config().plants, 400, SelectionRule::kMaxBudget, 2);
  std::vector<StabilityCertificate> certs;
  for (const auto& o : outcomes) certs.push_back(*o.certificate);
  const SynthesisReport r = synthesize_cycle(scalars_of(certs), 2, 2,
                                             SynthesisMode::kGivenPartition, config().partition);
  const ScheduleLogic schedule(r.cycle, 2);
  const BatchOptions opts{.runs = 64, .horizon = 1000, .seed = 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch(config().plants, schedule, certs, opts, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * opts.runs);
  label(state);
}

BENCHMARK(BM_PairSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CertifyAll)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TFactorEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulationBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
