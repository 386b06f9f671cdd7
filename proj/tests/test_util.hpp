#pragma once

#include <array>
#include <random>
#include <span>

#include "slope/operators.hpp"

namespace slope::test {

inline EigenTuple random_cone_point(std::mt19937& rng, const ConeLabel& cone,
                                    double margin_floor = 1e-3) {
  std::uniform_real_distribution<double> box(-1.0, 3.0);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  for (;;) {
    std::array<double, kMaxDim> v{};
    const bool positive = (rng() & 1u) != 0;
    for (int i = 0; i < cone.n; ++i)
      v[static_cast<std::size_t>(i)] = positive ? pos(rng) : box(rng);
    const EigenTuple t =
        EigenTuple::from(std::span<const double>(v.data(), static_cast<std::size_t>(cone.n)));
    const ConeCheck c = in_cone(cone, t);
    if (c.inside && c.margin > margin_floor) return t;
  }
}

inline HermMat random_hermitian_spd(std::mt19937& rng, int n, bool allow_complex,
                                    double off_scale = 0.4, double diag_boost = 1.5) {
  std::uniform_real_distribution<double> c(-off_scale, off_scale);
  HermMat m = HermMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const std::complex<double> v(c(rng), (i == j || !allow_complex) ? 0.0 : c(rng));
      m.at(i, j) = v;
      m.at(j, i) = std::conj(v);
    }
  for (int i = 0; i < n; ++i) m.at(i, i) += diag_boost + static_cast<double>(n) * off_scale;
  return m;
}

inline SymTensorField constant_tensor(const TorusGrid& grid, const HermMat& m) {
  SymTensorField out(grid);
  for_each_index(grid.node_count(), [&](std::size_t p) { out.set_node_unchecked(p, m); });
  return out;
}

/// theta = g = I instance on the real 2-torus.
inline ProblemInstance identity_instance(int n, int N, const SymmetricFunctionSpec& spec,
                                         GridKind kind = GridKind::RealRiemannian) {
  const TorusGrid grid(kind, n, N);
  ProblemInstance inst;
  inst.grid = grid;
  inst.metric = constant_tensor(grid, HermMat::identity(n));
  inst.theta = constant_tensor(grid, HermMat::identity(n));
  inst.psi = ScalarField(grid, 0.0);
  inst.fspec = spec;
  return inst;
}

/// Subset-enumeration oracle for S_k: the O(C(n,k)) definition, kept
/// independent of the production recurrence.
inline double esf_bruteforce(std::span<const double> lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  if (k == 0) return 1.0;
  double total = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    double prod = 1.0;
    for (int i : idx) prod *= lambda[static_cast<std::size_t>(i)];
    total += prod;
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i)
      idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
  return total;
}

}  // namespace slope::test
