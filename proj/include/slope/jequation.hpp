#pragma once

#include "slope/continuity.hpp"
#include "slope/operators.hpp"

namespace slope {

/// The hermitian J-equation chi_u^{n-1} ^ omega / chi_u^n = e^{psi + c} on a
/// complex torus, with both hermitian forms positive at every node.
struct JInstance {
  TorusGrid grid;  // ComplexHermitian
  SymTensorField omega;
  SymTensorField chi;
  ScalarField psi;
  int fd_order = 2;
};

/// The equivalent hessian quotient problem: metric omega, tensor chi,
/// right-hand exponent -psi, f = n S_n / S_{n-1} on Gamma_n. Pointwise,
/// chi_u^{n-1} ^ omega / chi_u^n = S_{n-1}(lambda) / (n S_n(lambda)) with
/// lambda the eigenvalues of chi_u relative to omega.
ProblemInstance reduce_to_quotient(const JInstance& j);

struct JSolveResult {
  SolveStatus status = SolveStatus::ContinuityFailure;
  ScalarField u;
  double c = 0.0;  // the J-equation constant: c_J = -c_quotient
  ContinuityTrace trace;
};

JSolveResult solve_j(const JInstance& j, const ScalarField& u0,
                     const SolveOptions& opts = {});

/// Maximin estimate of the J-slope xi = sup_u min_X e^{-psi} (wedge ratio);
/// a lower bound for xi, computed as 1 / supslope_minimax of the reduced
/// instance. Equals e^{c} when the equation is solvable.
double j_slope(const JInstance& j, const SlopeOptions& opts = {});

/// Kaehler-case normalizing constant: c = log(int omega^n / int e^psi omega^n).
/// Valid only for constant-coefficient omega (refused otherwise): the torus
/// analogue of a Kaehler form.
double kahler_ma_constant_oracle(const TorusGrid& grid, const SymTensorField& omega,
                                 const ScalarField& psi);

/// Real-torus analogue: the gradient map has unit total Jacobian, so
/// e^c = 1 / int e^psi for det(I + hess u) = e^{psi+c} with theta = g = I.
double real_ma_constant_oracle(const TorusGrid& grid, const ScalarField& psi);

/// Monge-Ampere in det form is solved as f = S_n^{1/n} with the right-hand
/// exponent psi/n; the reported constant converts back as c = n * c_inst.
/// Requires fspec SigmaK{k=n}.
ProblemInstance make_det_form_instance(const ProblemInstance& base);
inline double det_form_constant(double c_inst, int n) { return n * c_inst; }

/// Brute-force wedge-product ratio chi^{n-1} ^ omega / chi^n for a single
/// pair of positive hermitian matrices, expanded as mixed determinants over
/// permutations (n <= 3). Test oracle for the quotient reduction.
double wedge_ratio_bruteforce(const HermMat& chi, const HermMat& omega);

}  // namespace slope
