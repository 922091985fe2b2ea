#include <benchmark/benchmark.h>

#include "slm/instances.hpp"
#include "slm/marginal.hpp"
#include "slm/sampler.hpp"

using namespace slm;

namespace {

void BM_RadialIntegral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  double m = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_radial_integral(d, m, 1.0));
    m = m < 30.0 ? m + 0.37 : 0.5;
  }
}
BENCHMARK(BM_RadialIntegral)->Arg(1)->Arg(2)->Arg(4)->Arg(16)->Arg(128);

void BM_LogMarginalGeneric(benchmark::State& state) {
  const int ell = static_cast<int>(state.range(0));
  const DesignOperator x(make_design("gaussian", 200, ell, 1));
  Rng rng(2);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal(x, y, 1.0));
}
BENCHMARK(BM_LogMarginalGeneric)->Arg(2)->Arg(8)->Arg(32);

void BM_ContextStatsSbm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = ModelFamily::sbm(n);
  Rng rng(3);
  Eigen::VectorXd y(n * (n - 1));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
  const MarginalContext ctx(f, y);
  std::vector<int> z(n);
  for (int i = 0; i < n; ++i) z[i] = i % 3;
  const Structure s{{3, 0}, Labels{z}};
  for (auto _ : state) benchmark::DoNotOptimize(ctx.stats(s));
}
BENCHMARK(BM_ContextStatsSbm)->Arg(24)->Arg(64);

void BM_CollapsedStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto f = ModelFamily::sbm(n);
  Rng rng(4);
  Eigen::VectorXd y(n * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) y[sbm_pair_index(n, i, j)] = rng.bernoulli((i % 2) == (j % 2) ? 0.7 : 0.3) ? 1.0 : 0.0;
  CollapsedTarget target(f, y, {});
  std::vector<int> z(n);
  for (int i = 0; i < n; ++i) z[i] = i % 2;
  ChainState s = target.make_state(Structure{{2, 0}, Labels{z}});
  for (auto _ : state) s = collapsed_mh_step(s, target, rng);
}
BENCHMARK(BM_CollapsedStep)->Arg(24)->Arg(64);

void BM_ExactTableSparse(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto f = ModelFamily::sparse_regression(make_design("gaussian", 40, p, 5));
  Rng rng(6);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(exact_posterior_table(f, y, {}, 1u << 20));
}
BENCHMARK(BM_ExactTableSparse)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
