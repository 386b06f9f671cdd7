// Serial-vs-OpenMP comparison for the per-node field kernels. The serial
// drivers are the reference implementations the parity tests check against;
// this target measures what the parallel drivers buy on the same inputs.

#include <benchmark/benchmark.h>

#include "slope/geometry.hpp"
#include "slope/operators.hpp"

namespace {

using namespace slope;

ProblemInstance make_instance(int N) {
  const TorusGrid grid(GridKind::RealRiemannian, 2, N);
  ProblemInstance inst;
  inst.grid = grid;
  inst.metric = SymTensorField(grid);
  inst.theta = SymTensorField(grid);
  for_each_index(grid.node_count(), [&](std::size_t p) {
    inst.metric.set_node_unchecked(p, HermMat::identity(2));
    inst.theta.set_node_unchecked(p, HermMat::identity(2));
  });
  inst.psi = ScalarField(grid, 0.0);
  inst.fspec = SymmetricFunctionSpec::sigma_k(2, 2);
  return inst;
}

ScalarField make_potential(const TorusGrid& grid) {
  return eval_on_grid(ExprAst::parse("0.005*sin(2*pi*x1)*cos(2*pi*x2)"), grid);
}

void bench_hessian(benchmark::State& state, Exec exec) {
  const TorusGrid grid(GridKind::RealRiemannian, 2, static_cast<int>(state.range(0)));
  const ScalarField u = make_potential(grid);
  for (auto _ : state) {
    SymTensorField h = hessian(u, 2, exec);
    benchmark::DoNotOptimize(h.raw(0));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.node_count()));
}

void bench_apply_f(benchmark::State& state, Exec exec) {
  const ProblemInstance inst = make_instance(static_cast<int>(state.range(0)));
  const ScalarField u = make_potential(inst.grid);
  for (auto _ : state) {
    PointwiseEval ev = evaluate_pointwise(inst, u, true, exec);
    benchmark::DoNotOptimize(ev.f.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(inst.grid.node_count()));
}

void bench_integrate(benchmark::State& state, Exec exec) {
  const TorusGrid grid(GridKind::RealRiemannian, 2, static_cast<int>(state.range(0)));
  const ScalarField u = make_potential(grid);
  for (auto _ : state) {
    double v = integrate(u, exec);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid.node_count()));
}

}  // namespace

BENCHMARK_CAPTURE(bench_hessian, serial, Exec::Serial)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(bench_hessian, parallel, Exec::Parallel)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(bench_apply_f, serial, Exec::Serial)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(bench_apply_f, parallel, Exec::Parallel)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(bench_integrate, serial, Exec::Serial)->Arg(256);
BENCHMARK_CAPTURE(bench_integrate, parallel, Exec::Parallel)->Arg(256);

BENCHMARK_MAIN();
