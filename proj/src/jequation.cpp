#include "slope/jequation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slope {

ProblemInstance reduce_to_quotient(const JInstance& j) {
  if (j.grid.kind != GridKind::ComplexHermitian)
    throw ConfigError("J-equation requires a ComplexHermitian grid");
  ProblemInstance inst;
  inst.grid = j.grid;
  inst.metric = j.omega;
  inst.theta = j.chi;
  inst.psi = ScalarField(j.grid);
  for_each_index(j.grid.node_count(), [&](std::size_t p) { inst.psi[p] = -j.psi[p]; });
  inst.fspec = SymmetricFunctionSpec::j_normalized(j.grid.n);
  inst.fd_order = j.fd_order;
  inst.validate();
  return inst;
}

JSolveResult solve_j(const JInstance& j, const ScalarField& u0, const SolveOptions& opts) {
  const ProblemInstance inst = reduce_to_quotient(j);
  ContinuitySolver solver(inst, u0, opts);
  SolveResult r = solver.solve();
  JSolveResult out;
  out.status = r.status;
  out.u = std::move(r.u);
  out.c = -r.c;
  out.trace = std::move(r.trace);
  return out;
}

double j_slope(const JInstance& j, const SlopeOptions& opts) {
  const ProblemInstance inst = reduce_to_quotient(j);
  // xi = 1 / sigma of the reduced problem; an upper sigma estimate maps to a
  // certified lower bound for xi.
  return 1.0 / supslope_minimax(inst, opts);
}

namespace {

/// Permutation-expansion determinant; independent of the Jacobi/esf code
/// paths on purpose (this file's brute-force oracle must stay an oracle).
double hermitian_det(const HermMat& m) {
  const int n = m.n;
  std::array<int, kMaxDim> idx{};
  std::iota(idx.begin(), idx.begin() + n, 0);
  std::complex<double> sum = 0.0;
  do {
    int inversions = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (idx[static_cast<std::size_t>(a)] > idx[static_cast<std::size_t>(b)]) ++inversions;
    std::complex<double> prod = 1.0;
    for (int r = 0; r < n; ++r) prod *= m.at(r, idx[static_cast<std::size_t>(r)]);
    sum += (inversions % 2 == 0 ? 1.0 : -1.0) * prod;
  } while (std::next_permutation(idx.begin(), idx.begin() + n));
  return sum.real();
}

}  // namespace

double wedge_ratio_bruteforce(const HermMat& chi, const HermMat& omega) {
  const int n = chi.n;
  if (n > 3) throw std::domain_error("wedge_ratio_bruteforce supports n <= 3");
  // chi^{n-1} ^ omega / chi^n = D(chi,..,chi,omega) / det(chi), with the
  // mixed discriminant read off as the t-linear coefficient of
  // det(chi + t omega) / n. Sample the degree-n polynomial at t = 0..n and
  // solve the Vandermonde system for its coefficients.
  const int m = n + 1;
  std::array<double, kMaxDim + 1> samples{};
  for (int j = 0; j < m; ++j) {
    HermMat s = chi;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s.at(r, c) += static_cast<double>(j) * omega.at(r, c);
    samples[static_cast<std::size_t>(j)] = hermitian_det(s);
  }
  // Gaussian elimination on the (m x m) Vandermonde in t = 0..n.
  std::array<std::array<double, kMaxDim + 2>, kMaxDim + 1> a{};
  for (int r = 0; r < m; ++r) {
    double tp = 1.0;
    for (int c = 0; c < m; ++c) {
      a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = tp;
      tp *= static_cast<double>(r);
    }
    a[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)] = samples[static_cast<std::size_t>(r)];
  }
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::abs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
    for (int r = col + 1; r < m; ++r) {
      const double factor = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c <= m; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            factor * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
    }
  }
  std::array<double, kMaxDim + 1> coeff{};
  for (int r = m - 1; r >= 0; --r) {
    double s = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
    for (int c = r + 1; c < m; ++c)
      s -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * coeff[static_cast<std::size_t>(c)];
    coeff[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  }
  const double det_chi = samples[0];
  return coeff[1] / (static_cast<double>(n) * det_chi);
}

double kahler_ma_constant_oracle(const TorusGrid& grid, const SymTensorField& omega,
                                 const ScalarField& psi) {
  if (omega.constancy_defect() > 1e-14)
    throw std::invalid_argument(
        "kahler_ma_constant_oracle: omega varies over the grid; the closed-form "
        "constant only holds in the Kaehler (constant-coefficient) case");
  // e^c = int omega^n / int e^psi omega^n; constant det(omega) cancels, but
  // keep the stated form.
  ScalarField det_field(grid, 1.0);  // constant; any positive constant cancels
  ScalarField weighted(grid);
  for_each_index(grid.node_count(),
                 [&](std::size_t p) { weighted[p] = std::exp(psi[p]) * det_field[p]; });
  return std::log(integrate(det_field) / integrate(weighted));
}

double real_ma_constant_oracle(const TorusGrid& grid, const ScalarField& psi) {
  ScalarField e(grid);
  for_each_index(grid.node_count(), [&](std::size_t p) { e[p] = std::exp(psi[p]); });
  return -std::log(integrate(e));
}

ProblemInstance make_det_form_instance(const ProblemInstance& base) {
  if (base.fspec.kind != FKind::SigmaK || base.fspec.k != base.grid.n)
    throw ConfigError("det form requires f = sigma_k(k=n)");
  ProblemInstance inst = base;
  const double inv_n = 1.0 / base.grid.n;
  for_each_index(base.grid.node_count(),
                 [&](std::size_t p) { inst.psi[p] = base.psi[p] * inv_n; });
  return inst;
}

}  // namespace slope
