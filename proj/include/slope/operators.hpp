#pragma once

#include <optional>
#include <string>

#include "slope/geometry.hpp"
#include "slope/grid.hpp"
#include "slope/symfunc.hpp"

namespace slope {

/// Everything needed to evaluate F[u] = f(lambda(theta + hess u)) and
/// F_infty[u] on a grid: the metric (g or omega), the background tensor
/// (theta or chi), the right-hand exponent psi and the symmetric function.
struct ProblemInstance {
  TorusGrid grid;
  SymTensorField metric;
  SymTensorField theta;
  ScalarField psi;
  SymmetricFunctionSpec fspec;
  int fd_order = 2;

  /// Checks dimensional consistency, finite psi and SPD metric per node.
  void validate() const;
};

struct AdmissibilityReport {
  bool admissible = false;
  double margin = 0.0;  // min over nodes of the cone margin
  std::size_t worst_node = 0;
};

/// theta + hessian(u) (real) or theta + i d dbar u (hermitian).
SymTensorField theta_u(const ProblemInstance& inst, const ScalarField& u,
                       Exec exec = Exec::Parallel);

/// Fused pointwise pass: relative eigenvalues, cone margins, F[u] and
/// (optionally) the linearization matrices dF/dA = sum_i f'_i v_i v_i^H.
struct PointwiseEval {
  EigenField lambda;
  ScalarField f;       // NaN at nodes outside the cone
  ScalarField margin;  // cone margin per node
  SymTensorField dfda;
  bool has_dfda = false;
};

PointwiseEval evaluate_pointwise(const ProblemInstance& inst, const ScalarField& u,
                                 bool want_dfda, Exec exec = Exec::Parallel);

/// F[u] pointwise; strictly positive. Throws AdmissibilityError carrying the
/// worst node when u is inadmissible (or within kDegenerateMargin of it).
ScalarField apply_F(const ProblemInstance& inst, const ScalarField& u,
                    Exec exec = Exec::Parallel);

/// F_infty[u]: either a finite positive field or the AllInfinite marker,
/// never a mixture (the dichotomy).
struct FinftyField {
  bool all_infinite = false;
  ScalarField field;  // empty when all_infinite
};

FinftyField apply_Finfty(const ProblemInstance& inst, const ScalarField& u,
                         Exec exec = Exec::Parallel);

/// Cone membership of lambda(theta_u) at every node; never throws.
AdmissibilityReport admissible(const ProblemInstance& inst, const ScalarField& u,
                               Exec exec = Exec::Parallel);

/// dF/dA per node in the coordinate frame (an SPD matrix by monotonicity of
/// f): for SigmaK{k=1} this is g^{-1} exactly.
SymTensorField linearize(const ProblemInstance& inst, const ScalarField& u,
                         Exec exec = Exec::Parallel);

/// Symmetric real coefficients over the grid's real axes such that
/// dF[u].h = sum_{ab} coeff_ab * (d_a d_b h). On real grids this is dF/dA
/// itself; on hermitian grids the complex-structure mapping of it (/4).
struct RealCoeffField {
  TorusGrid grid;
  int d = 0;                    // real dimension
  std::vector<double> packed;   // node-major, d(d+1)/2 per node (upper incl diag)

  RealCoeffField() = default;
  explicit RealCoeffField(const TorusGrid& g);
  std::size_t per_node() const { return static_cast<std::size_t>(d) * (d + 1) / 2; }
  double* raw(std::size_t p) { return packed.data() + p * per_node(); }
  const double* raw(std::size_t p) const { return packed.data() + p * per_node(); }
  static std::size_t pack_index(int a, int b, int d);  // a <= b
};

RealCoeffField to_real_coeffs(const SymTensorField& dfda);

/// sum_ab coeff_ab D_ab h with diagonal terms once and off-diagonal twice.
ScalarField apply_linearized(const RealCoeffField& coeff, const ScalarField& h,
                             int fd_order = 2, Exec exec = Exec::Parallel);

struct SlopeOptions {
  int budget = 400;    // optimizer iterations
  int modes = 4;       // Fourier modes per axis
  unsigned seed = 0;   // RNG seed for restarts
  int restarts = 0;
};

/// Upper estimate of the sup-slope: minimizes max_M e^{-psi} F[u] over the
/// span of Fourier modes around the seed by smoothed-max (log-sum-exp)
/// descent with a sharpening schedule. The returned value is the best
/// certified true maximum, an upper bound for sigma by definition, and is
/// monotone non-increasing in budget. Throws AdmissibilityError when the
/// seed (default u = 0) is inadmissible.
double supslope_minimax(const ProblemInstance& inst, const SlopeOptions& opts = {},
                        const ScalarField* seed_u = nullptr);

/// Mirror image: maximizes min_M e^{-psi} F[u]; any iterate is a certified
/// lower bound for sigma.
double supslope_maximin(const ProblemInstance& inst, const SlopeOptions& opts = {},
                        const ScalarField* seed_u = nullptr);

struct SlopeReport {
  std::optional<double> sigma_from_solution;
  double sigma_minimax_upper = 0.0;
  double sigma_maximin_lower = 0.0;
  double gap = 0.0;  // |from_solution - minimax| when present, else upper - lower
  int modes = 0;     // truncation level, reported with every estimate
  int budget = 0;
};

std::string to_json_string(const SlopeReport& report);

struct CSubParams {
  double r = 0.0;
  double R = 0.0;
};

struct SubsolutionReport {
  double margin = 0.0;     // min_M e^{-psi} F_infty[u] - sigma; +inf possible
  bool verdict = false;    // margin > strictness tolerance
  double gap_delta = 0.0;  // min e^{-psi}F_infty[u] / max e^{-psi}F[u] - 1
  std::optional<CSubParams> c_params;
};

std::string to_json_string(const SubsolutionReport& report);

/// Strictness tolerance for the paper's strict inequalities; discretization
/// error dominates well above this.
inline constexpr double kStrictTol = 1e-6;

/// Checks e^{-psi} F_infty[u] > sigma on M. When the verdict holds, also
/// derives C_{h,r,R} parameters at the level h = sigma e^psi.
SubsolutionReport subsolution_check(const ProblemInstance& inst, const ScalarField& u,
                                    double sigma, Exec exec = Exec::Parallel);

struct CSubResult {
  bool ok = false;
  CSubParams params;
  std::size_t violating_node = 0;
};

/// Finds r by bisection such that lambda(theta_u(p)) - r*1 stays in the cone
/// and (Finite variants) f_infty(lambda - r*1) > h(p) at every node, then R
/// as the largest coordinate-direction root of f(lambda - r*1 + t e_i) = h(p)
/// plus |lambda - r*1|. The root search is certified to terminate by
/// f_{infty,i} > h.
CSubResult c_subsolution_params(const ProblemInstance& inst, const ScalarField& u,
                                const ScalarField& h, Exec exec = Exec::Parallel);

}  // namespace slope
