#include <benchmark/benchmark.h>

#include "hawkesvol/diffusion.hpp"
#include "hawkesvol/mle.hpp"
#include "hawkesvol/simulate.hpp"
#include "hawkesvol/smle.hpp"

using namespace hawkesvol;

namespace {

SymmetricHawkesParams table1_set1() {
  SymmetricHawkesParams p;
  p.mu = 0.01;
  p.alpha_s = 0.4;
  p.alpha_c = 0.5;
  p.beta = 1.5;
  p.tick = 0.025;
  p.s0 = 100.0;
  return p;
}

EventStream session_stream(double horizon) {
  SimConfig cfg;
  cfg.horizon = horizon;
  cfg.seed = 1;
  return simulate(table1_set1(), cfg);
}

void BM_Simulate(benchmark::State& state) {
  auto p = table1_set1();
  SimConfig cfg;
  cfg.horizon = static_cast<double>(state.range(0));
  std::size_t events = 0;
  for (auto _ : state) {
    cfg.path_index++;
    auto s = simulate(p, cfg);
    events += s.size();
    benchmark::DoNotOptimize(s);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Simulate)->Arg(3600)->Arg(19800)->Unit(benchmark::kMillisecond);

void BM_LoglikGradient(benchmark::State& state) {
  auto s = session_stream(static_cast<double>(state.range(0)));
  SymmetricLikelihood lik(s);
  std::array<double, 4> theta = {0.01, 0.4, 0.5, 1.5}, grad{};
  for (auto _ : state) {
    benchmark::DoNotOptimize(lik(theta, &grad));
    theta[1] += 1e-12;
  }
  state.counters["events"] = static_cast<double>(s.size());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_LoglikGradient)->Arg(19800)->Arg(5 * 19800)->Unit(benchmark::kMicrosecond);

void BM_FitReparam(benchmark::State& state) {
  auto s = session_stream(19800);
  auto init = default_initial_guess(s, 0.025, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_symmetric_reparam(s, init));
}
BENCHMARK(BM_FitReparam)->Unit(benchmark::kMillisecond);

void BM_FitBetaGrid(benchmark::State& state) {
  auto s = session_stream(19800);
  auto init = default_initial_guess(s, 0.025, 100.0);
  FitOptions opts;
  opts.method = FitMethod::BetaGrid;
  opts.grid = {1.0, 2.5, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(fit_symmetric(s, init, opts));
}
BENCHMARK(BM_FitBetaGrid)->Unit(benchmark::kMillisecond);

void BM_SimulatedLoglik(benchmark::State& state) {
  auto p = map_params(0.1, 0.2, 0.1, 0.5, 0.01, 50.0);
  SmleConfig cfg;
  cfg.m_paths = static_cast<int>(state.range(0));
  cfg.tick = 0.01;
  std::vector<double> obs(61, 50.0);
  for (std::size_t i = 1; i < obs.size(); ++i) obs[i] = obs[i - 1] + (i % 3 == 0 ? 0.05 : -0.02);
  SmleWorkspace ws(obs.size() - 1, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(simulated_loglik(p, obs, cfg, ws));
}
BENCHMARK(BM_SimulatedLoglik)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
