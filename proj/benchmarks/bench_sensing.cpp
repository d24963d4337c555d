#include <benchmark/benchmark.h>

#include <random>

#include "fdisac/likelihood.hpp"
#include "fdisac/sensing.hpp"

using namespace fdisac;

namespace {

CMatrix noise(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {g(rng), g(rng)};
  return m;
}

}  // namespace

// P x Q likelihood map via the 2-D FFT.
static void BM_LikelihoodMap(benchmark::State& state) {
  const CMatrix z = noise(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(likelihood_map(z));
  state.SetItemsProcessed(state.iterations() * z.size());
}
BENCHMARK(BM_LikelihoodMap)->Args({128, 56})->Args({792, 112})->Unit(benchmark::kMicrosecond);

static void BM_LikelihoodPeakRefined(benchmark::State& state) {
  const CMatrix z = noise(state.range(0), state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(find_likelihood_peak(z, true));
}
BENCHMARK(BM_LikelihoodPeakRefined)->Args({792, 112})->Unit(benchmark::kMicrosecond);

// MUSIC scan over [-90, 90] at 0.1 degrees, 8 chains x 16 elements.
static void BM_Music(benchmark::State& state) {
  const BeamCodebook book = dft_codebook(5, 16);
  const AnalogBeamformer w =
      beams_from_indices(book, sector_sweep_indices(8, book.size(), 16));
  const CMatrix x = noise(8, 400, 3);
  const CMatrix cov = x * x.adjoint() / 400.0;
  const double lambda = kSpeedOfLight / 28e9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(music_spectrum(cov, w, static_cast<int>(state.range(0)),
                                            lambda / 2.0, lambda));
  }
}
BENCHMARK(BM_Music)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);

static void BM_HermitianEigen(benchmark::State& state) {
  const auto n = state.range(0);
  const CMatrix x = noise(n, 2 * n, 4);
  const CMatrix cov = x * x.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eigen_descending(cov));
}
BENCHMARK(BM_HermitianEigen)->Arg(8)->Arg(32)->Arg(128);
BENCHMARK_MAIN();
