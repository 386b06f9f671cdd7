#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace slope {

struct GmresOptions {
  int max_iters = 400;
  int restart = 60;
  double rel_tol = 1e-2;
  double abs_tol = 0.0;
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Restarted GMRES with right preconditioning: solves A x = b given matvec
/// A and preconditioner apply M^{-1}. Serial inner products keep the
/// iteration deterministic; the matvec is where the parallelism lives.
template <class MatVec, class Precond>
GmresResult gmres(std::size_t n, MatVec&& apply_a, Precond&& apply_m, const double* b,
                  double* x, const GmresOptions& opts) {
  auto dot = [n](const double* u, const double* v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += u[i] * v[i];
    return s;
  };
  auto norm = [&](const double* u) { return std::sqrt(dot(u, u)); };

  GmresResult result;
  const double bnorm = norm(b);
  const double target = std::max(opts.rel_tol * bnorm, opts.abs_tol);
  if (bnorm == 0.0) {
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
    result.converged = true;
    return result;
  }

  const int m = opts.restart;
  std::vector<std::vector<double>> v(static_cast<std::size_t>(m) + 1,
                                     std::vector<double>(n));
  std::vector<double> h(static_cast<std::size_t>(m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(static_cast<std::size_t>(m) + 1);
  std::vector<double> tmp(n), z(n);

  auto hij = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i) * m + j]; };

  while (result.iterations < opts.max_iters) {
    // r = b - A x
    apply_a(x, tmp.data());
    for (std::size_t i = 0; i < n; ++i) v[0][i] = b[i] - tmp[i];
    double beta = norm(v[0].data());
    result.residual_norm = beta;
    if (beta <= target) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) v[0][i] /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && result.iterations < opts.max_iters; ++k, ++result.iterations) {
      apply_m(v[static_cast<std::size_t>(k)].data(), z.data());
      apply_a(z.data(), v[static_cast<std::size_t>(k) + 1].data());
      double* w = v[static_cast<std::size_t>(k) + 1].data();
      // modified Gram-Schmidt
      for (int i = 0; i <= k; ++i) {
        hij(i, k) = dot(w, v[static_cast<std::size_t>(i)].data());
        for (std::size_t jj = 0; jj < n; ++jj) w[jj] -= hij(i, k) * v[static_cast<std::size_t>(i)][jj];
      }
      hij(k + 1, k) = norm(w);
      if (hij(k + 1, k) > 0.0)
        for (std::size_t jj = 0; jj < n; ++jj) w[jj] /= hij(k + 1, k);

      // apply stored Givens rotations, then form a new one
      for (int i = 0; i < k; ++i) {
        const double t = cs[static_cast<std::size_t>(i)] * hij(i, k) +
                         sn[static_cast<std::size_t>(i)] * hij(i + 1, k);
        hij(i + 1, k) = -sn[static_cast<std::size_t>(i)] * hij(i, k) +
                        cs[static_cast<std::size_t>(i)] * hij(i + 1, k);
        hij(i, k) = t;
      }
      const double denom = std::hypot(hij(k, k), hij(k + 1, k));
      cs[static_cast<std::size_t>(k)] = denom == 0.0 ? 1.0 : hij(k, k) / denom;
      sn[static_cast<std::size_t>(k)] = denom == 0.0 ? 0.0 : hij(k + 1, k) / denom;
      hij(k, k) = denom;
      hij(k + 1, k) = 0.0;
      g[static_cast<std::size_t>(k) + 1] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];

      result.residual_norm = std::abs(g[static_cast<std::size_t>(k) + 1]);
      if (result.residual_norm <= target) {
        ++k;
        ++result.iterations;
        break;
      }
    }

    // back substitution for the Krylov coefficients
    std::vector<double> y(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) s -= hij(i, j) * y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = hij(i, i) == 0.0 ? 0.0 : s / hij(i, i);
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) tmp[i] += y[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)][i];
    apply_m(tmp.data(), z.data());
    for (std::size_t i = 0; i < n; ++i) x[i] += z[i];

    if (result.residual_norm <= target) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

}  // namespace slope
