#include <benchmark/benchmark.h>

#include "fdisac/harness.hpp"
#include "fdisac/transceiver.hpp"

using namespace fdisac;

namespace {

const ExperimentConfig& config_for(int which) {
  static const ExperimentConfig desk = desk_scale_config();
  static const ExperimentConfig full = full_scale_config();
  return which ? full : desk;
}

}  // namespace

// Bootstrap-slot receive grid: echo + SI + cancellation + noise.
static void BM_FdReception(benchmark::State& state) {
  const ExperimentConfig& c = config_for(static_cast<int>(state.range(0)));
  const Scenario sc = scenario_for_run(c, 1);
  const BeamformerSet set = bootstrap_beamformers(c, sc.si_channel, 1.0);
  const OfdmGrid s = make_symbol_grid(c.ofdm, c.array.streams, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_fd_reception(s, sc.targets, c.ofdm, sc.si_channel, set,
                                                   c.array, c.scenario.channel.noise_floor_dbm,
                                                   3));
  }
}
BENCHMARK(BM_FdReception)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Optimize(benchmark::State& state) {
  const ExperimentConfig& c = config_for(static_cast<int>(state.range(0)));
  const Scenario sc = scenario_for_run(c, 1);
  std::vector<double> doas, dl;
  for (const auto& t : sc.targets) {
    doas.push_back(t.doa);
    if (t.is_dl_scatterer) dl.push_back(t.doa);
  }
  const OptimizerConfig oc = c.optimizer_config(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(optimize(doas, dl, sc.si_channel, c.array, oc));
}
BENCHMARK(BM_Optimize)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

// One full Monte Carlo run (sensing, optimisation, ideal baseline).
static void BM_RunSingle(benchmark::State& state) {
  const ExperimentConfig& c = config_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_single(c, 30.0, 1));
}
BENCHMARK(BM_RunSingle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
