#include "slope/geometry.hpp"

#include <cmath>

#include "slope/jacobi.hpp"

namespace slope {

namespace {

/// Second differences at a node. The mixed order-4 stencil composes the
/// order-4 first-derivative stencil along both axes.
struct Stencil {
  const TorusGrid& grid;
  const double* u;
  double h2;
  int order;

  double diag(std::size_t p, int a) const {
    if (order == 2) {
      return (u[grid.shift(p, a, 1)] - 2.0 * u[p] + u[grid.shift(p, a, -1)]) / h2;
    }
    return (-u[grid.shift(p, a, 2)] + 16.0 * u[grid.shift(p, a, 1)] - 30.0 * u[p] +
            16.0 * u[grid.shift(p, a, -1)] - u[grid.shift(p, a, -2)]) /
           (12.0 * h2);
  }

  double first(std::size_t p, int a) const {
    // Order-4 first derivative times h (the 1/h folds into h2 below).
    return (-u[grid.shift(p, a, 2)] + 8.0 * u[grid.shift(p, a, 1)] -
            8.0 * u[grid.shift(p, a, -1)] + u[grid.shift(p, a, -2)]) /
           12.0;
  }

  double mixed(std::size_t p, int a, int b) const {
    if (order == 2) {
      return (u[grid.shift(grid.shift(p, a, 1), b, 1)] +
              u[grid.shift(grid.shift(p, a, -1), b, -1)] -
              u[grid.shift(grid.shift(p, a, 1), b, -1)] -
              u[grid.shift(grid.shift(p, a, -1), b, 1)]) /
             (4.0 * h2);
    }
    double acc = 0.0;
    const double w[4] = {-1.0, 8.0, -8.0, 1.0};
    const int d[4] = {2, 1, -1, -2};
    for (int k = 0; k < 4; ++k) {
      const std::size_t q = grid.shift(p, a, d[k]);
      acc += w[k] * first(q, b);
    }
    return acc / (12.0 * h2);
  }
};

void check_order(int order) {
  if (order != 2 && order != 4)
    throw ConfigError("finite-difference order must be 2 or 4, got " + std::to_string(order));
}

}  // namespace

SymTensorField hessian(const ScalarField& u, int order, Exec exec) {
  if (u.grid.kind != GridKind::RealRiemannian)
    throw std::domain_error("hessian: grid is not RealRiemannian");
  check_order(order);
  const TorusGrid& grid = u.grid;
  const int d = grid.real_dim();
  const double h = grid.spacing();
  SymTensorField out(grid);
  const Stencil st{grid, u.values.data(), h * h, order};
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        HermMat m = HermMat::zero(d);
        for (int a = 0; a < d; ++a) {
          m.at(a, a) = st.diag(p, a);
          for (int b = a + 1; b < d; ++b) {
            const double v = st.mixed(p, a, b);
            m.at(a, b) = v;
            m.at(b, a) = v;
          }
        }
        out.set_node_unchecked(p, m);
      },
      exec);
  return out;
}

SymTensorField complex_hessian(const ScalarField& u, int order, Exec exec) {
  if (u.grid.kind != GridKind::ComplexHermitian)
    throw std::domain_error("complex_hessian: grid is not ComplexHermitian");
  check_order(order);
  const TorusGrid& grid = u.grid;
  const int n = grid.n;  // complex dimension; real axes 2i (x) and 2i+1 (y)
  const double h = grid.spacing();
  SymTensorField out(grid);
  const Stencil st{grid, u.values.data(), h * h, order};
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        HermMat m = HermMat::zero(n);
        for (int i = 0; i < n; ++i) {
          const int xi = 2 * i, yi = 2 * i + 1;
          m.at(i, i) = 0.25 * (st.diag(p, xi) + st.diag(p, yi));
          for (int j = i + 1; j < n; ++j) {
            const int xj = 2 * j, yj = 2 * j + 1;
            const double re = 0.25 * (st.mixed(p, xi, xj) + st.mixed(p, yi, yj));
            const double im = 0.25 * (st.mixed(p, xi, yj) - st.mixed(p, yi, xj));
            m.at(i, j) = {re, im};
            m.at(j, i) = {re, -im};
          }
        }
        out.set_node_unchecked(p, m);
      },
      exec);
  return out;
}

SymTensorField potential_hessian(const ScalarField& u, int order, Exec exec) {
  return u.grid.kind == GridKind::RealRiemannian ? hessian(u, order, exec)
                                                 : complex_hessian(u, order, exec);
}

EigenField generalized_eigs(const SymTensorField& a, const SymTensorField& g, Exec exec) {
  if (!(a.grid() == g.grid())) throw std::invalid_argument("generalized_eigs: grid mismatch");
  const TorusGrid& grid = a.grid();
  EigenField out(grid);
  // NotPositiveDefinite must surface deterministically: remember the first
  // failing node rather than throwing from inside the parallel region.
  std::vector<unsigned char> bad(grid.node_count(), 0);
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        try {
          const EigenDecomposition d = generalized_herm_eig(a.node(p), g.node(p), p);
          double* dst = out.raw(p);
          for (int i = 0; i < grid.n; ++i) dst[i] = d.values[static_cast<std::size_t>(i)];
        } catch (const NotPositiveDefinite&) {
          bad[p] = 1;
        }
      },
      exec);
  for (std::size_t p = 0; p < bad.size(); ++p)
    if (bad[p]) throw NotPositiveDefinite(p);
  return out;
}

double integrate(const ScalarField& s, Exec exec) {
  return reduce_sum(s.values.data(), s.values.size(), exec) /
         static_cast<double>(s.values.size());
}

double field_mean(const ScalarField& s, Exec exec) { return integrate(s, exec); }

double field_max(const ScalarField& s, Exec exec) {
  return reduce_max(s.values.data(), s.values.size(), exec);
}

double field_min(const ScalarField& s, Exec exec) {
  return reduce_min(s.values.data(), s.values.size(), exec);
}

double field_max_abs(const ScalarField& s, Exec exec) {
  return std::max(std::abs(field_max(s, exec)), std::abs(field_min(s, exec)));
}

ScalarField eval_on_grid(const ExprAst& ast, const TorusGrid& grid, Exec exec) {
  const int d = grid.real_dim();
  if (ast.max_variable() > d)
    throw ExprEvalError("variable x" + std::to_string(ast.max_variable()) +
                            " exceeds grid dimension " + std::to_string(d),
                        0, 0);
  ScalarField out(grid);
  std::vector<unsigned char> bad(grid.node_count(), 0);
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        std::array<double, kMaxDim> x{};
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = grid.coord(p, a);
        try {
          out[p] = ast.eval({x.data(), static_cast<std::size_t>(d)}, p);
        } catch (const ExprEvalError&) {
          bad[p] = 1;
        }
      },
      exec);
  // Surface the first failing node deterministically by re-evaluating it.
  for (std::size_t p = 0; p < bad.size(); ++p) {
    if (bad[p]) {
      std::array<double, kMaxDim> x{};
      for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = grid.coord(p, a);
      ast.eval({x.data(), static_cast<std::size_t>(d)}, p);
    }
  }
  return out;
}

ScalarField apply_second_difference(const ScalarField& s, int axis_a, int axis_b, int order,
                                    Exec exec) {
  check_order(order);
  const TorusGrid& grid = s.grid;
  const double h = grid.spacing();
  const Stencil st{grid, s.values.data(), h * h, order};
  ScalarField out(grid);
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        out[p] = axis_a == axis_b ? st.diag(p, axis_a) : st.mixed(p, axis_a, axis_b);
      },
      exec);
  return out;
}

}  // namespace slope
