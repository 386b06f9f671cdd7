#pragma once

#include "slope/expr.hpp"
#include "slope/grid.hpp"
#include "slope/parallel.hpp"

namespace slope {

/// Discrete hessian of u with periodic wrap (RealRiemannian grids only).
/// order 2: diagonal (u_{+1} - 2u + u_{-1})/h^2, mixed 4-point cross /(4h^2).
/// order 4: five-point diagonal and composed first-derivative mixed stencils
/// (a config option for convergence studies). Exactly symmetric by
/// construction.
SymTensorField hessian(const ScalarField& u, int order = 2, Exec exec = Exec::Parallel);

/// Hermitian (d dbar u)_{ij} = ((u_{x_i x_j} + u_{y_i y_j})
///   + sqrt(-1)(u_{x_i y_j} - u_{y_i x_j})) / 4 from real finite differences
/// (ComplexHermitian grids only). Hermitian by construction; diagonal
/// imaginary parts are exactly zero.
SymTensorField complex_hessian(const ScalarField& u, int order = 2, Exec exec = Exec::Parallel);

/// Dispatches on grid kind: hessian or complex_hessian.
SymTensorField potential_hessian(const ScalarField& u, int order = 2,
                                 Exec exec = Exec::Parallel);

/// Pointwise eigenvalues of a relative to SPD g, sorted descending.
/// Throws NotPositiveDefinite with the node index.
EigenField generalized_eigs(const SymTensorField& a, const SymTensorField& g,
                            Exec exec = Exec::Parallel);

/// Trapezoidal rule on the torus: mean(values) * volume with volume 1.
/// Spectrally accurate for smooth periodic integrands; summation order fixed.
double integrate(const ScalarField& s, Exec exec = Exec::Parallel);

double field_mean(const ScalarField& s, Exec exec = Exec::Parallel);
double field_max(const ScalarField& s, Exec exec = Exec::Parallel);
double field_min(const ScalarField& s, Exec exec = Exec::Parallel);
/// max |s| over nodes.
double field_max_abs(const ScalarField& s, Exec exec = Exec::Parallel);

/// Samples an expression at node-centered coordinates x_i = index_i / N.
ScalarField eval_on_grid(const ExprAst& ast, const TorusGrid& grid,
                         Exec exec = Exec::Parallel);

/// Applies one second-derivative stencil D_ab (the same symmetric stencil
/// used by `hessian`) to a scalar field. Central stencils are self-adjoint,
/// so this is also the adjoint used by the slope-estimator gradients.
ScalarField apply_second_difference(const ScalarField& s, int axis_a, int axis_b,
                                    int order = 2, Exec exec = Exec::Parallel);

}  // namespace slope
