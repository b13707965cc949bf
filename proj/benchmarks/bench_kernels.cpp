#include <benchmark/benchmark.h>

#include <wext/exact_ot.hpp>
#include <wext/isotonic.hpp>
#include <wext/qp_oracle.hpp>
#include <wext/sinkhorn.hpp>

#include <random>

using namespace wext;

namespace {

AtomicMeasure random_measure(std::mt19937_64& g, int n, int d) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Matrix pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) pts(i, k) = coord(g);
  return make_uniform(std::move(pts));
}

void BM_CostMatrix(benchmark::State& state) {
  std::mt19937_64 g(1);
  const int n = int(state.range(0));
  const auto nu0 = random_measure(g, n, 2);
  const auto nu1 = random_measure(g, n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(cost_matrix(nu1.points, nu0.points, 2.0));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_CostMatrix)->Arg(64)->Arg(256);

void BM_SinkhornIteration(benchmark::State& state) {
  std::mt19937_64 g(2);
  const int n = int(state.range(0));
  const auto nu0 = random_measure(g, n, 2);
  const auto nu1 = random_measure(g, n, 2);
  DualState s{Vector::Zero(n), Vector::Zero(n), nu1.points};
  const double eps = 0.05, t = 2.0;
  for (auto _ : state) {
    const Matrix c = cost_matrix(s.z, nu0.points, t);
    s.phi = phi_update(s, c, nu1.weights, eps);
    s.psi = psi_update(s, c, nu0.weights, eps);
    const Matrix plan = plan_from_duals(s, c, nu0.weights, nu1.weights, eps);
    const Matrix grad = z_gradient(s, plan, nu0.points, nu1.points, nu1.weights, t);
    s.z -= 1e-3 * grad;
    benchmark::DoNotOptimize(s.z.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_SinkhornIteration)->Arg(64)->Arg(256);

void BM_ExactOt(benchmark::State& state) {
  std::mt19937_64 g(3);
  const int n = int(state.range(0));
  const auto nu0 = random_measure(g, n, 2);
  const auto nu1 = random_measure(g, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(w2_sq_exact(nu0, nu1).value);
}
BENCHMARK(BM_ExactOt)->Arg(32)->Arg(64)->Arg(128);

void BM_Pav(benchmark::State& state) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const size_t n = size_t(state.range(0));
  std::vector<double> values(n), weights(n, 1.0);
  for (double& v : values) v = u(g);
  for (auto _ : state) benchmark::DoNotOptimize(pav_isotonic(values, weights));
  state.SetItemsProcessed(state.iterations() * int64_t(n));
}
BENCHMARK(BM_Pav)->Arg(1000)->Arg(100000);

void BM_FwSolve(benchmark::State& state) {
  std::mt19937_64 g(5);
  const int n = int(state.range(0));
  const auto nu0 = random_measure(g, n, 2);
  const auto nu1 = random_measure(g, n, 2);
  FwOptions opts;
  opts.gap_tol = 1e-9;
  for (auto _ : state) benchmark::DoNotOptimize(fw_solve(nu0, nu1, 2.0, opts).value);
}
BENCHMARK(BM_FwSolve)->Arg(8)->Arg(16);

void BM_AnnealedSolve(benchmark::State& state) {
  std::mt19937_64 g(6);
  const int n = int(state.range(0));
  const auto nu0 = random_measure(g, n, 2);
  const auto nu1 = random_measure(g, n, 2);
  SolverConfig cfg;
  cfg.t = 2.0;
  cfg.epsilon = 1.0;
  cfg.anneal = AnnealSchedule{0.5, 1e-3};
  cfg.tol = 1e-7;
  for (auto _ : state) benchmark::DoNotOptimize(solve(nu0, nu1, cfg).primal_g);
}
BENCHMARK(BM_AnnealedSolve)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
