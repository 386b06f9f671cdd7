#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

#include "slope/grid.hpp"

namespace slope {

struct EigenDecomposition {
  int n = 0;
  std::array<double, kMaxDim> values{};  // descending
  HermMat vectors;                       // columns match values
};

/// Cyclic-by-rows Jacobi for hermitian matrices of dimension <= 8.
/// Branch-light and deterministic, so golden tests reproduce across
/// platforms. Quadratic convergence; sweeps capped defensively at 30.
inline EigenDecomposition herm_jacobi(HermMat a) {
  const int n = a.n;
  EigenDecomposition out;
  out.n = n;
  out.vectors = HermMat::identity(n);

  const double scale = a.frobenius_norm();
  const double stop = 1e-30 * (scale > 0 ? scale * scale : 1.0);

  for (int sweep = 0; sweep < 30; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a.at(p, q));
    if (off <= stop) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const std::complex<double> apq = a.at(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-300) continue;
        const std::complex<double> phase = apq / r;  // apq = r * phase

        // Zero a'_pq: r(c^2 - s^2) = c s (a_qq - a_pp).
        const double tau = (a.at(q, q).real() - a.at(p, p).real()) / (2.0 * r);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        a.at(p, p) = app * c * c + aqq * s * s - 2.0 * s * c * r;
        a.at(q, q) = app * s * s + aqq * c * c + 2.0 * s * c * r;
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;

        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const std::complex<double> akp = a.at(k, p);
          const std::complex<double> akq = a.at(k, q);
          a.at(k, p) = c * akp - s * std::conj(phase) * akq;
          a.at(k, q) = s * phase * akp + c * akq;
          a.at(p, k) = std::conj(a.at(k, p));
          a.at(q, k) = std::conj(a.at(k, q));
        }
        for (int k = 0; k < n; ++k) {
          const std::complex<double> vkp = out.vectors.at(k, p);
          const std::complex<double> vkq = out.vectors.at(k, q);
          out.vectors.at(k, p) = c * vkp - s * std::conj(phase) * vkq;
          out.vectors.at(k, q) = s * phase * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, kMaxDim> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int i, int j) { return a.at(i, i).real() > a.at(j, j).real(); });
  HermMat sorted_vecs = HermMat::zero(n);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = a.at(order[static_cast<std::size_t>(j)],
                                                   order[static_cast<std::size_t>(j)]).real();
    for (int i = 0; i < n; ++i)
      sorted_vecs.at(i, j) = out.vectors.at(i, order[static_cast<std::size_t>(j)]);
  }
  out.vectors = sorted_vecs;
  return out;
}

/// Eigenvalues (descending) and g-orthonormal eigenvectors of `a` relative to
/// SPD `g`: columns v_i with v^H g v = I and v^H a v = diag(values).
/// Throws NotPositiveDefinite tagged with `node` when g is not SPD.
inline EigenDecomposition generalized_herm_eig(const HermMat& a, const HermMat& g,
                                               std::size_t node = 0) {
  const int n = a.n;
  EigenDecomposition gd = herm_jacobi(g);
  for (int i = 0; i < n; ++i)
    if (!(gd.values[static_cast<std::size_t>(i)] > 0.0)) throw NotPositiveDefinite(node);

  // W = Q D^{-1/2}; B = W^H a W is hermitian with the relative eigenvalues.
  HermMat w = HermMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      w.at(i, j) = gd.vectors.at(i, j) / std::sqrt(gd.values[static_cast<std::size_t>(j)]);

  HermMat aw = HermMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> sum = 0.0;
      for (int k = 0; k < n; ++k) sum += a.at(i, k) * w.at(k, j);
      aw.at(i, j) = sum;
    }
  HermMat b = HermMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> sum = 0.0;
      for (int k = 0; k < n; ++k) sum += std::conj(w.at(k, i)) * aw.at(k, j);
      b.at(i, j) = sum;
    }
  // Symmetrize away rounding skew before iterating.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const std::complex<double> m = 0.5 * (b.at(i, j) + std::conj(b.at(j, i)));
      b.at(i, j) = m;
      b.at(j, i) = std::conj(m);
    }

  EigenDecomposition bd = herm_jacobi(b);
  EigenDecomposition out;
  out.n = n;
  out.values = bd.values;
  out.vectors = HermMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> sum = 0.0;
      for (int k = 0; k < n; ++k) sum += w.at(i, k) * bd.vectors.at(k, j);
      out.vectors.at(i, j) = sum;
    }
  return out;
}

}  // namespace slope
