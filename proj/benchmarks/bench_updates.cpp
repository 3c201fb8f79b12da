#include <benchmark/benchmark.h>

#include "qnlab/directions.hpp"
#include "qnlab/linalg.hpp"
#include "qnlab/objectives.hpp"
#include "qnlab/rng.hpp"
#include "qnlab/solvers.hpp"
#include "qnlab/updates.hpp"

namespace {

using namespace qnlab;

void BM_Cholesky(benchmark::State& state) {
  const Index d = state.range(0);
  const SymMatrix a = random_spd(d, 1.0, 100.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(a));
}
BENCHMARK(BM_Cholesky)->Arg(16)->Arg(64)->Arg(128);

void BM_ExtremeEigs(benchmark::State& state) {
  const Index d = state.range(0);
  const SymMatrix a = random_spd(d, 1.0, 100.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(extreme_eigs(a));
}
BENCHMARK(BM_ExtremeEigs)->Arg(16)->Arg(64);

// One update of G and H (and L for scaled BFGS) against a dense target.
void BM_ApplyUpdate(benchmark::State& state, UpdateRule rule, bool factor) {
  const Index d = state.range(0);
  const SymMatrix a = random_spd(d, 1.0, 100.0, 3);
  const ApproxState start = ApproxState::scaled_identity(d, 100.0, factor);
  Rng rng(4, 0);
  const Vector ut = rng.sphere(d);
  for (auto _ : state) {
    state.PauseTiming();
    ApproxState s = start;
    const Vector u = factor ? Vector(s.l->transpose() * ut) : ut;
    const Vector au = a * u;
    state.ResumeTiming();
    apply_update(s, rule, u, au, s.g.trace() + a.trace(), kSkipTol, factor ? &ut : nullptr);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK_CAPTURE(BM_ApplyUpdate, sr1, UpdateRule::sr1(), false)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_ApplyUpdate, bfgs, UpdateRule::bfgs(), false)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_ApplyUpdate, bfgs_factor, UpdateRule::bfgs(), true)->Arg(32)->Arg(128);
BENCHMARK_CAPTURE(BM_ApplyUpdate, broyden_half, UpdateRule::broyden(0.5), false)->Arg(32)->Arg(128);

void BM_LogSumExpHessVec(benchmark::State& state) {
  const Index d = state.range(0);
  const LogSumExpObjective f = make_logsumexp_synthetic(d, d, 1.0, 5);
  Rng rng(6, 0);
  const Vector x = rng.gaussian(d) / static_cast<double>(d);
  const Vector v = rng.gaussian(d);
  for (auto _ : state) benchmark::DoNotOptimize(f.hess_vec(x, v));
}
BENCHMARK(BM_LogSumExpHessVec)->Arg(50)->Arg(200);

void BM_GreedySR1General(benchmark::State& state) {
  const Index d = state.range(0);
  const LogSumExpObjective f = make_logsumexp_synthetic(d, d + 10, 1.0, 7);
  const Vector x0 = newton_warm_start(f, initial_point_on_sphere(Vector::Zero(d), 1.0 / d, 8), 2);
  SolverOptions opts;
  opts.dense = false;
  opts.stop.max_iters = 40;
  opts.stop.grad_tol = 1e-10;
  DirectionStrategy dir;
  dir.kind = DirectionKind::GreedySR1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_general(f, x0, UpdateRule::sr1(), dir, 2.0, opts));
  }
}
BENCHMARK(BM_GreedySR1General)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
