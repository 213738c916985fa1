#include <benchmark/benchmark.h>

#include <pompkit/pompkit.hpp>

using namespace pompkit;

namespace {

ModelSpec gompertz_fixture() {
  Rng rng(1);
  return with_simulated_data(gompertz_model(), gompertz_default_params(), rng);
}

ModelSpec ricker_fixture() {
  Rng rng(2);
  return with_simulated_data(ricker_model(), ricker_default_params(), rng);
}

}  // namespace

static void BM_PfilterGompertz(benchmark::State& state) {
  const auto m = gompertz_fixture();
  const auto p = gompertz_default_params();
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(pfilter(m, p, static_cast<std::size_t>(state.range(0)), rng).loglik);
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<int64_t>(m.data.size()));
}
BENCHMARK(BM_PfilterGompertz)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_KalmanGompertz(benchmark::State& state) {
  const auto m = gompertz_fixture();
  const auto p = gompertz_default_params();
  for (auto _ : state) benchmark::DoNotOptimize(gompertz_kalman_loglik(m.data, p));
}
BENCHMARK(BM_KalmanGompertz);

static void BM_SystematicResample(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> w(static_cast<std::size_t>(state.range(0)));
  for (double& x : w) x = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(systematic_resample(w, rng));
}
BENCHMARK(BM_SystematicResample)->Arg(1000)->Arg(100000);

static void BM_EulerMultinomial(benchmark::State& state) {
  Rng rng(5);
  const std::vector<double> rates{0.8, 0.02};
  std::vector<double> counts(2);
  for (auto _ : state) {
    reulermultinom(30000, rates, 1.0 / 52 / 20, counts, rng);
    benchmark::DoNotOptimize(counts.data());
  }
}
BENCHMARK(BM_EulerMultinomial);

static void BM_SimulateSirDecade(benchmark::State& state) {
  const auto m = sir_model();
  const auto p = sir_default_params();
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, p, rng, 1));
}
BENCHMARK(BM_SimulateSirDecade)->Unit(benchmark::kMillisecond);

static void BM_RickerSyntheticLikelihood(benchmark::State& state) {
  const auto m = ricker_fixture();
  const auto sqrt_t = [](double v) { return std::sqrt(v); };
  const std::vector<Probe> probes{probe_marginal("y", m.data.series("y"), 3, sqrt_t),
                                  probe_acf("y", {0, 1, 2, 3, 4}, sqrt_t),
                                  probe_nlar("y", {1, 1, 1, 2}, {1, 2, 3, 1}, sqrt_t)};
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(probe(m, ricker_default_params(), probes, 1000, rng).synth_loglik);
}
BENCHMARK(BM_RickerSyntheticLikelihood)->Unit(benchmark::kMillisecond);

static void BM_NlfQuasiLoglik(benchmark::State& state) {
  const auto m = gompertz_fixture();
  NlfSettings s;
  s.lags = {2, 3};
  Rng rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(nlf_quasi_loglik(m, gompertz_default_params(), s, rng));
}
BENCHMARK(BM_NlfQuasiLoglik)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
