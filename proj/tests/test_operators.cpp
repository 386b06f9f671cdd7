#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "slope/operators.hpp"
#include "test_util.hpp"

using namespace slope;
using test::constant_tensor;
using test::identity_instance;

namespace {

/// Admissible low-mode random potential: scaled down until the margin clears.
ScalarField random_admissible(const ProblemInstance& inst, std::mt19937& rng,
                              double amp0 = 0.02) {
  const int d = inst.grid.real_dim();
  ScalarField u(inst.grid);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<double> coef(static_cast<std::size_t>(2 * d));
  for (double& v : coef) v = c(rng);
  for_each_index(inst.grid.node_count(), [&](std::size_t p) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      const double x = inst.grid.coord(p, a);
      s += coef[static_cast<std::size_t>(2 * a)] * std::sin(2.0 * M_PI * x) +
           coef[static_cast<std::size_t>(2 * a + 1)] * std::cos(2.0 * M_PI * x);
    }
    u[p] = s;
  });
  double amp = amp0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    ScalarField scaled(inst.grid);
    for_each_index(u.size(), [&](std::size_t p) { scaled[p] = amp * u[p]; });
    if (admissible(inst, scaled).margin > 1e-4) return scaled;
    amp *= 0.5;
  }
  return ScalarField(inst.grid, 0.0);
}

}  // namespace

TEST_CASE("apply_F examples") {
  // theta = g = I, u = 0, S_2^(1/2), n = 2: lambda = (1,1), field == 1
  {
    const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
    const ScalarField f = apply_F(inst, ScalarField(inst.grid, 0.0));
    for (double v : f.values) CHECK(v == doctest::Approx(1.0));
  }
  // theta = diag(1,4): sqrt(S_2(1,4)) = 2
  {
    ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
    HermMat th = HermMat::identity(2);
    th.at(1, 1) = 4.0;
    inst.theta = constant_tensor(inst.grid, th);
    const ScalarField f = apply_F(inst, ScalarField(inst.grid, 0.0));
    for (double v : f.values) CHECK(v == doctest::Approx(2.0));
  }
  // harmonic-mean normalization: 2 S_2/S_1 at (1,1) = 1
  {
    const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::j_normalized(2));
    const ScalarField f = apply_F(inst, ScalarField(inst.grid, 0.0));
    for (double v : f.values) CHECK(v == doctest::Approx(1.0));
  }
}

TEST_CASE("apply_F rejects inadmissible input with the worst node") {
  const ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
  // hessian magnitude 0.05*(2pi)^2 ~ 1.97 pushes an eigenvalue past -0.9
  const ScalarField u = eval_on_grid(ExprAst::parse("0.05*sin(2*pi*x2)"), inst.grid);
  CHECK_THROWS_AS(apply_F(inst, u), AdmissibilityError);
}

TEST_CASE("admissible examples") {
  {
    const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
    const AdmissibilityReport rep = admissible(inst, ScalarField(inst.grid, 0.0));
    CHECK(rep.admissible);
    CHECK(rep.margin == doctest::Approx(1.0));  // min(S_1, S_2) = min(2, 1)
  }
  {
    // u = 0.0380 cos(2 pi x1): min eigenvalue of I + hess u is about -0.5
    ProblemInstance inst = identity_instance(2, 64, SymmetricFunctionSpec::sigma_k(2, 2));
    const ScalarField u = eval_on_grid(ExprAst::parse("0.0380*cos(2*pi*x1)"), inst.grid);
    const AdmissibilityReport rep = admissible(inst, u);
    CHECK_FALSE(rep.admissible);
    // eigen scan confirms the expected depth
    const EigenField lam = generalized_eigs(theta_u(inst, u), inst.metric);
    double min_eig = 1e300;
    for (std::size_t p = 0; p < inst.grid.node_count(); ++p)
      min_eig = std::min(min_eig, lam.node(p)[1]);
    CHECK(min_eig == doctest::Approx(1.0 - 0.0380 * 4.0 * M_PI * M_PI).epsilon(1e-2));
  }
  {
    // Gamma_1 is the half-space: admissible iff trace(theta_u) > 0 everywhere
    ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(1, 2));
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const ScalarField u = random_admissible(inst, rng, 0.2);
      const EigenField lam = generalized_eigs(theta_u(inst, u), inst.metric);
      double min_tr = 1e300;
      for (std::size_t p = 0; p < inst.grid.node_count(); ++p)
        min_tr = std::min(min_tr, lam.node(p)[0] + lam.node(p)[1]);
      CHECK(admissible(inst, u).admissible == (min_tr > 0.0));
    }
  }
}

TEST_CASE("apply_Finfty examples") {
  const ProblemInstance j = identity_instance(2, 16, SymmetricFunctionSpec::j_normalized(2));
  const FinftyField f = apply_Finfty(j, ScalarField(j.grid, 0.0));
  REQUIRE_FALSE(f.all_infinite);
  for (double v : f.field.values) CHECK(v == doctest::Approx(2.0));

  const ProblemInstance s = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  CHECK(apply_Finfty(s, ScalarField(s.grid, 0.0)).all_infinite);

  // F_infty > F pointwise for finite variants
  std::mt19937 rng(5);
  const ScalarField u = random_admissible(j, rng);
  const ScalarField fu = apply_F(j, u);
  const FinftyField fi = apply_Finfty(j, u);
  REQUIRE_FALSE(fi.all_infinite);
  for (std::size_t p = 0; p < j.grid.node_count(); ++p) CHECK(fi.field[p] > fu[p]);
}

TEST_CASE("linearize examples") {
  // SigmaK{k=1}: dF/dA = g^{-1} exactly
  {
    ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(1, 2));
    HermMat g = HermMat::identity(2);
    g.at(0, 0) = 4.0;
    g.at(0, 1) = 1.0;
    g.at(1, 0) = 1.0;
    g.at(1, 1) = 2.0;  // det 7
    inst.metric = constant_tensor(inst.grid, g);
    const SymTensorField df = linearize(inst, ScalarField(inst.grid, 0.0));
    const HermMat m = df.node(3);
    CHECK(m.at(0, 0).real() == doctest::Approx(2.0 / 7.0));
    CHECK(m.at(0, 1).real() == doctest::Approx(-1.0 / 7.0));
    CHECK(m.at(1, 1).real() == doctest::Approx(4.0 / 7.0));
  }
  // theta = g = I, SigmaK{2}, n=2: f'_i = 1/2 at lambda = (1,1)
  {
    const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
    const SymTensorField df = linearize(inst, ScalarField(inst.grid, 0.0));
    const HermMat m = df.node(0);
    CHECK(m.at(0, 0).real() == doctest::Approx(0.5));
    CHECK(m.at(1, 1).real() == doctest::Approx(0.5));
    CHECK(std::abs(m.at(0, 1)) < 1e-12);
  }
}

TEST_CASE("linearize matches the Gateaux derivative at random points") {
  std::mt19937 rng(7);
  for (GridKind kind : {GridKind::RealRiemannian, GridKind::ComplexHermitian}) {
    ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2), kind);
    for (int trial = 0; trial < 10; ++trial) {
      const ScalarField u = random_admissible(inst, rng);
      const ScalarField h = random_admissible(inst, rng, 0.01);
      const RealCoeffField coeff = to_real_coeffs(linearize(inst, u));
      const ScalarField predicted = apply_linearized(coeff, h, inst.fd_order);
      const ScalarField f0 = apply_F(inst, u);
      const double eps = 1e-6;
      ScalarField u_eps = u;
      for_each_index(u.size(), [&](std::size_t p) { u_eps[p] += eps * h[p]; });
      const ScalarField f1 = apply_F(inst, u_eps);
      double worst = 0.0, scale = 0.0;
      for (std::size_t p = 0; p < u.size(); ++p) {
        const double fd = (f1[p] - f0[p]) / eps;
        worst = std::max(worst, std::abs(fd - predicted[p]));
        scale = std::max(scale, std::abs(fd));
      }
      CHECK(worst <= 2e-5 * (1.0 + scale));  // O(eps) agreement
    }
  }
}

TEST_CASE("supslope estimators on the trivial instance") {
  const ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  SlopeOptions opts;
  opts.budget = 120;
  const double upper = supslope_minimax(inst, opts);
  const double lower = supslope_maximin(inst, opts);
  // u = 0 solves the equation with c = 0, so sigma = 1; the optimizer must
  // not report anything above it
  CHECK(upper <= 1.0 + 1e-6);
  CHECK(upper == doctest::Approx(1.0));
  CHECK(lower == doctest::Approx(1.0));
  CHECK(lower <= upper + 1e-12);
}

TEST_CASE("supslope scaling law under constant psi shifts") {
  // exact on the trivial instance (best-so-far keeps the seed value)
  {
    ProblemInstance inst = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
    SlopeOptions opts;
    opts.budget = 60;
    const double base = supslope_minimax(inst, opts);
    for_each_index(inst.grid.node_count(), [&](std::size_t p) { inst.psi[p] += 0.7; });
    const double shifted = supslope_minimax(inst, opts);
    CHECK(shifted == doctest::Approx(std::exp(-0.7) * base).epsilon(1e-10));
  }
  // within optimizer tolerance on a varying-psi instance
  {
    ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
    inst.psi = eval_on_grid(ExprAst::parse("0.2*sin(2*pi*x1)"), inst.grid);
    SlopeOptions opts;
    opts.budget = 200;
    const double base = supslope_minimax(inst, opts);
    for_each_index(inst.grid.node_count(), [&](std::size_t p) { inst.psi[p] += 0.4; });
    const double shifted = supslope_minimax(inst, opts);
    CHECK(shifted == doctest::Approx(std::exp(-0.4) * base).epsilon(1e-3));
  }
}

TEST_CASE("supslope monotone in budget and bounded by the seed") {
  ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
  inst.psi = eval_on_grid(ExprAst::parse("0.25*sin(2*pi*x1)"), inst.grid);
  double prev = 1e300;
  for (int budget : {25, 100, 300}) {
    SlopeOptions opts;
    opts.budget = budget;
    const double upper = supslope_minimax(inst, opts);
    CHECK(upper <= prev + 1e-15);  // best-so-far semantics
    prev = upper;
  }
  // maximin estimate is at least the seed's min (the seed is feasible)
  const ScalarField f0 = apply_F(inst, ScalarField(inst.grid, 0.0));
  double seed_min = 1e300;
  for (std::size_t p = 0; p < inst.grid.node_count(); ++p)
    seed_min = std::min(seed_min, std::exp(-inst.psi[p]) * f0[p]);
  SlopeOptions opts;
  opts.budget = 100;
  CHECK(supslope_maximin(inst, opts) >= seed_min - 1e-15);
}

TEST_CASE("supslope requires an admissible seed") {
  ProblemInstance inst = identity_instance(2, 32, SymmetricFunctionSpec::sigma_k(2, 2));
  const ScalarField bad = eval_on_grid(ExprAst::parse("0.05*sin(2*pi*x1)"), inst.grid);
  SlopeOptions opts;
  opts.budget = 10;
  CHECK_THROWS_AS(supslope_minimax(inst, opts, &bad), AdmissibilityError);
}

TEST_CASE("subsolution_check examples") {
  const ProblemInstance j = identity_instance(2, 16, SymmetricFunctionSpec::j_normalized(2));
  const ScalarField zero(j.grid, 0.0);
  {
    const SubsolutionReport rep = subsolution_check(j, zero, 1.0);
    CHECK(rep.verdict);
    CHECK(rep.margin == doctest::Approx(1.0));  // F_infty[0] = 2, sigma = 1
    CHECK(rep.gap_delta == doctest::Approx(1.0));  // min F_infty / max F - 1
    REQUIRE(rep.c_params.has_value());
    CHECK(rep.c_params->r > 0.0);
    CHECK(std::isfinite(rep.c_params->R));
  }
  {
    const SubsolutionReport rep = subsolution_check(j, zero, 2.5);
    CHECK_FALSE(rep.verdict);
    CHECK(rep.margin == doctest::Approx(-0.5));
    CHECK_FALSE(rep.c_params.has_value());
  }
  // Infinite variant: every admissible u is a sub-solution with margin +inf
  const ProblemInstance s = identity_instance(2, 16, SymmetricFunctionSpec::sigma_k(2, 2));
  const SubsolutionReport rep = subsolution_check(s, ScalarField(s.grid, 0.0), 123.0);
  CHECK(rep.verdict);
  CHECK(std::isinf(rep.margin));
  CHECK(std::isinf(rep.gap_delta));
}

TEST_CASE("c_subsolution_params on the constant J-case") {
  const ProblemInstance j = identity_instance(2, 16, SymmetricFunctionSpec::j_normalized(2));
  const ScalarField zero(j.grid, 0.0);
  const ScalarField h(j.grid, 1.0);
  const CSubResult res = c_subsolution_params(j, zero, h);
  REQUIRE(res.ok);
  // lambda = (1,1); the predicate holds up to r = 0.5 (f_infty(1-r) = 2(1-r) > 1),
  // halved for strict interiority
  CHECK(res.params.r == doctest::Approx(0.25).epsilon(1e-6));
  // root of 2(0.75)(0.75+t)/(1.5+t) = 1 is t = 0.75; R = t + |(0.75, 0.75)|
  CHECK(res.params.R ==
        doctest::Approx(0.75 + std::hypot(0.75, 0.75)).epsilon(1e-6));

  // h above min f_infty fails with a violating node
  const ScalarField big_h(j.grid, 2.5);
  CHECK_FALSE(c_subsolution_params(j, zero, big_h).ok);

  // shrinking h (h * e^{-eps}) can only loosen the constraint: r grows
  double prev_r = 0.0;
  for (double scale : {1.0, 0.8, 0.5}) {
    const ScalarField hs(j.grid, scale);
    const CSubResult r = c_subsolution_params(j, zero, hs);
    REQUIRE(r.ok);
    CHECK(r.params.r >= prev_r - 1e-12);
    prev_r = r.params.r;
  }
}

TEST_CASE("report JSON shapes") {
  SlopeReport sr;
  sr.sigma_minimax_upper = 1.5;
  sr.sigma_maximin_lower = 1.25;
  sr.gap = 0.25;
  sr.modes = 4;
  sr.budget = 100;
  CHECK(to_json_string(sr) ==
        R"({"sigma_minimax_upper":1.5,"sigma_maximin_lower":1.25,"gap":0.25,"modes":4,"budget":100})");
  sr.sigma_from_solution = 1.4;
  CHECK(to_json_string(sr).find("\"sigma_from_solution\":1.4") != std::string::npos);

  SubsolutionReport sub;
  sub.margin = std::numeric_limits<double>::infinity();
  sub.verdict = true;
  sub.gap_delta = std::numeric_limits<double>::infinity();
  CHECK(to_json_string(sub) == R"({"margin":"inf","verdict":true,"gap_delta":"inf"})");
}
