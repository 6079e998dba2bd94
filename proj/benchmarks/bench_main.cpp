#include <benchmark/benchmark.h>

#include "mimosim/engine.hpp"
#include "mimosim/power_allocation.hpp"
#include "mimosim/precoding.hpp"
#include "mimosim/random.hpp"

using namespace mimosim;

namespace {

CMatrix channel(Eigen::Index K, Eigen::Index M) {
  RandomStream rng(123);
  return rng.complex_normal_matrix(K, M);
}

void BM_Precoder(benchmark::State& state, PrecoderKind kind) {
  const auto M = state.range(0), K = state.range(1);
  const CMatrix H = channel(K, M);
  const LinkBudget b = LinkBudget::from_snr_db(10.0, M);
  const RVector n = RVector::Ones(K);
  for (auto _ : state) benchmark::DoNotOptimize(make_precoder(kind, H, n, b).P.data());
}
BENCHMARK_CAPTURE(BM_Precoder, MF, PrecoderKind::MF)->Args({64, 16})->Args({16, 4});
BENCHMARK_CAPTURE(BM_Precoder, ZF, PrecoderKind::ZF)->Args({64, 16})->Args({16, 4});
BENCHMARK_CAPTURE(BM_Precoder, MMSE, PrecoderKind::MMSE)->Args({64, 16})->Args({16, 4});

void BM_ApaRun(benchmark::State& state) {
  const auto M = state.range(0), K = state.range(1);
  const CMatrix H = channel(K, M);
  const LinkBudget b = LinkBudget::from_snr_db(10.0, M);
  const Precoder p = mmse_precoder(H, RVector::Ones(K), b);
  const ApaParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(apa_run(H, p.P, p.f, b, params, ConstraintMode::PerAntenna).allocation.eta.data());
}
BENCHMARK(BM_ApaRun)->Args({64, 16})->Args({16, 4});

void BM_Projection(benchmark::State& state) {
  const auto M = state.range(0), K = state.range(1);
  const CMatrix P = channel(M, K);
  const AntennaLoad load = AntennaLoad::per_antenna(P, 1.0 / static_cast<double>(M));
  const RVector v = RVector::Constant(K, 2.0);
  for (auto _ : state) {
    ConstraintProjector proj(load);
    benchmark::DoNotOptimize(proj.project(v).data());
  }
}
BENCHMARK(BM_Projection)->Args({64, 16})->Args({16, 4});

void BM_Trial(benchmark::State& state) {
  SweepConfig c;
  c.scenarios = {state.range(0) ? ScenarioConfig::multi_cell(4, 16, 4) : ScenarioConfig::cell_free(64, 16)};
  c.snr_db = {10.0};
  c.frames = 100;
  c.csit.sigma_e_sq = 0.1;
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(c, 0, trial++).records.size());
}
BENCHMARK(BM_Trial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
