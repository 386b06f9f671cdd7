#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "slope/continuity.hpp"
#include "test_util.hpp"

using namespace slope;
using test::identity_instance;

namespace {

/// A1-style manufactured instance: theta = g = I, f = S_2^{1/2},
/// u* = a sin(2 pi x1) cos(2 pi x2), psi analytic from the exact hessian.
ProblemInstance manufactured_instance(int N, double a = 0.01) {
  ProblemInstance inst = identity_instance(2, N, SymmetricFunctionSpec::sigma_k(2, 2));
  const double A = a * 4.0 * M_PI * M_PI;
  std::ostringstream psi;
  psi.precision(17);
  psi << "0.5*log((1-" << A << "*sin(2*pi*x1)*cos(2*pi*x2))^2-(" << A
      << "*cos(2*pi*x1)*sin(2*pi*x2))^2)";
  inst.psi = eval_on_grid(ExprAst::parse(psi.str()), inst.grid);
  return inst;
}

ScalarField manufactured_reference(const TorusGrid& grid, double a = 0.01) {
  std::ostringstream u;
  u.precision(17);
  u << a << "*sin(2*pi*x1)*cos(2*pi*x2)";
  return eval_on_grid(ExprAst::parse(u.str()), grid);
}

double mean_removed_sup_diff(const ScalarField& a, const ScalarField& b) {
  ScalarField d(a.grid);
  for_each_index(a.size(), [&](std::size_t p) { d[p] = a[p] - b[p]; });
  const double m = field_mean(d);
  for_each_index(a.size(), [&](std::size_t p) { d[p] -= m; });
  return field_max_abs(d);
}

}  // namespace

TEST_CASE("trivial instance solves with c = 0 and u = 0") {
  const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0));
  const SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Converged);
  CHECK(std::abs(r.c) < 1e-12);
  CHECK(field_max_abs(r.u) < 1e-12);
  // every level is trivially converged: zero Newton iterations throughout
  for (const TraceRow& row : r.trace.rows) CHECK(row.newton_iters == 0);
  CHECK(r.trace.rows.back().t == 1.0);
}

TEST_CASE("inadmissible seed is rejected up front") {
  const ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
  const ScalarField bad = eval_on_grid(ExprAst::parse("0.05*sin(2*pi*x1)"), inst.grid);
  CHECK_THROWS_AS(ContinuitySolver(inst, bad), AdmissibilityError);
}

TEST_CASE("manufactured recovery at N = 32 with discrete psi is exact") {
  // psi built from the discrete operator makes u* an exact discrete solution
  ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
  const ScalarField u_star = manufactured_reference(inst.grid);
  const ScalarField f = apply_F(inst, u_star);
  for_each_index(inst.grid.node_count(),
                 [&](std::size_t p) { inst.psi[p] = std::log(f[p]); });
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0));
  const SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Converged);
  CHECK(mean_removed_sup_diff(r.u, u_star) < 1e-7);
  CHECK(std::abs(r.c) < 1e-8);
}

TEST_CASE("manufactured recovery with analytic psi converges at second order") {
  double errs[2];
  int idx = 0;
  for (int N : {32, 64}) {
    const ProblemInstance inst = manufactured_instance(N);
    ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0));
    const SolveResult r = solver.solve();
    REQUIRE(r.status == SolveStatus::Converged);
    errs[idx++] = mean_removed_sup_diff(r.u, manufactured_reference(inst.grid));
  }
  CHECK(errs[1] < 5e-3);
  const double ratio = errs[0] / errs[1];
  CHECK(ratio > 3.4);
  CHECK(ratio < 4.6);
}

TEST_CASE("path consistency and solution constancy invariants") {
  const ProblemInstance inst = manufactured_instance(32);
  const SolveOptions opts;
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0), opts);
  const SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Converged);
  // margin stays above the floor at every accepted state
  for (const TraceRow& row : r.trace.rows) CHECK(row.margin >= opts.margin_floor);
  // e^{-psi} F[u_final] has relative oscillation <= 2 tol
  const ScalarField f = apply_F(inst, r.u);
  double lo = 1e300, hi = -1e300;
  for (std::size_t p = 0; p < inst.grid.node_count(); ++p) {
    const double v = std::exp(-inst.psi[p]) * f[p];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK((hi - lo) / lo <= 2.0 * opts.tol * (1.0 + 1e-3));
}

TEST_CASE("newton_step is the identity on a converged state") {
  const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0));
  const ContinuityState state = solver.make_state(1.0, ScalarField(inst.grid, 0.0), 0.0);
  const ContinuityState next = solver.newton_step(state);
  CHECK(field_max_abs(next.phi) < 1e-12);
  CHECK(std::abs(next.c) < 1e-12);
}

TEST_CASE("linear problems converge in one undamped Newton step") {
  // SigmaK{k=1} is Laplace: a single full step lands at the linear-solve
  // tolerance (forcing tightened so the Krylov error is visible)
  ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(1, 2));
  inst.psi = eval_on_grid(ExprAst::parse("0.1*sin(2*pi*x1)"), inst.grid);
  SolveOptions opts;
  opts.tol = 1e-9;
  opts.krylov_forcing = 1e-8;
  opts.lin_iters = 2000;
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0), opts);
  ContinuityState state = solver.make_state(1.0, ScalarField(inst.grid, 0.0), 0.0);
  const double r0 = state.rel_residual;
  const ContinuityState next = solver.newton_step(state);
  CHECK(next.rel_residual <= 1e-4 * r0);
}

TEST_CASE("quadratic convergence tail on the manufactured instance") {
  ProblemInstance inst = manufactured_instance(32, 0.008);
  SolveOptions opts;
  opts.krylov_forcing = 1e-8;  // near-exact Newton to expose the quadratic tail
  opts.lin_iters = 2000;
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0), opts);
  ContinuityState state = solver.make_state(1.0, ScalarField(inst.grid, 0.0), 0.0);
  std::vector<double> residuals{state.rel_residual};
  for (int i = 0; i < 6 && residuals.back() > 1e-13; ++i) {
    state = solver.newton_step(state);
    residuals.push_back(state.rel_residual);
  }
  bool saw_quadratic = false;
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
    if (residuals[i] <= 1e-3 && residuals[i] > 1e-12) {
      CHECK(residuals[i + 1] <= 100.0 * residuals[i] * residuals[i]);
      saw_quadratic = true;
    }
  }
  CHECK(saw_quadratic);
}

TEST_CASE("verify_ct_bounds accepts healthy traces and rejects corrupted ones") {
  const ProblemInstance inst = manufactured_instance(32);
  ContinuitySolver solver(inst, ScalarField(inst.grid, 0.0));
  const SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Converged);
  const double tol = 1e-6 + 10.0 / (32.0 * 32.0);
  CHECK(verify_ct_bounds(r.trace, solver.c_bar(), solver.c_lower(), tol));

  ContinuityTrace corrupted = r.trace;
  for (TraceRow& row : corrupted.rows) row.c += 2.0 * std::abs(solver.c_bar()) + 1.0;
  CHECK_FALSE(verify_ct_bounds(corrupted, solver.c_bar(), solver.c_lower(), tol));

  // trivial case: c_t = 0 must sit inside the degenerate band 0 <= 0 <= 0
  const ProblemInstance triv = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  ContinuitySolver ts(triv, ScalarField(triv.grid, 0.0));
  const SolveResult tr = ts.solve();
  CHECK(verify_ct_bounds(tr.trace, ts.c_bar(), ts.c_lower(), 1e-6));
}

TEST_CASE("uniqueness probe") {
  const ProblemInstance inst = manufactured_instance(32);
  const ScalarField zero(inst.grid, 0.0);
  // identical seeds agree to solver tolerance
  const UniquenessProbe same = uniqueness_probe(inst, zero, zero);
  CHECK(same.sup_diff < 1e-10);
  CHECK(same.c_diff < 1e-12);
  // seeds differing by a constant give exactly equal solutions after mean
  // removal (mean-zero normalization quotients constants)
  const ScalarField shifted(inst.grid, 0.37);
  const UniquenessProbe constant = uniqueness_probe(inst, zero, shifted);
  CHECK(constant.sup_diff < 1e-10);
  // genuinely different admissible seeds land on the same solution
  const ScalarField bump = eval_on_grid(ExprAst::parse("0.005*sin(2*pi*x2)"), inst.grid);
  const UniquenessProbe probe = uniqueness_probe(inst, zero, bump);
  CHECK(probe.sup_diff <= 1e-6);
  CHECK(probe.c_diff <= 1e-8);
}

TEST_CASE("trace CSV format") {
  ContinuityTrace trace;
  trace.rows.push_back(TraceRow{0.0, 0.0, 0, 0.0, 1.0, 1.0});
  trace.rows.push_back(TraceRow{0.5, -0.125, 3, 1e-11, 0.75, 0.5});
  std::ostringstream out;
  write_trace_csv(out, trace);
  const std::string text = out.str();
  CHECK(text.find("t,c_t,newton_iters,residual,margin,damping_min\n") == 0);
  CHECK(text.find("0.5,-0.125,3,") != std::string::npos);
}

TEST_CASE("continuity failure carries the last good state and trace") {
  // An aggressively unstable J-type instance: margin collapses, dt underflows
  const TorusGrid grid(GridKind::ComplexHermitian, 2, 8);
  ProblemInstance inst;
  inst.grid = grid;
  inst.metric = test::constant_tensor(grid, HermMat::identity(2));
  inst.theta = test::constant_tensor(grid, HermMat::identity(2));
  inst.psi = eval_on_grid(ExprAst::parse("-(6.0*sin(2*pi*x1))"), grid);
  inst.fspec = SymmetricFunctionSpec::j_normalized(2);
  SolveOptions opts;
  opts.min_dt = 1e-3;
  ContinuitySolver solver(inst, ScalarField(grid, 0.0), opts);
  const SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::ContinuityFailure);
  CHECK_FALSE(r.trace.converged);
  CHECK(r.trace.failure_reason.find("step underflow") != std::string::npos);
  CHECK(r.trace.rows.size() >= 2);           // partial path recorded
  CHECK(r.last_state.t < 1.0);
  CHECK(r.last_state.margin > 0.0);          // last good state is admissible
  CHECK(admissible(inst, r.u).admissible);
}
