#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "slope/operators.hpp"
#include "slope/poisson.hpp"

namespace slope {

struct SolveOptions {
  double tol = 1e-10;            // Newton convergence: max|e^{-psi_t-c}F - 1|
  int max_newton = 30;
  int lin_iters = 400;           // Krylov iteration cap per Newton step
  double krylov_forcing = 1e-2;  // inexact Newton: eta * current residual
  double dt_init = 0.1;
  double min_dt = 1e-4;
  double margin_floor = 1e-8;    // accepted states keep at least this margin
  double beta_min = 1.0 / 256.0; // smallest damping factor before giving up
};

struct ContinuityState {
  double t = 0.0;
  ScalarField phi;  // mean-zero correction on top of u0
  double c = 0.0;
  double residual = 0.0;      // max|F[u0+phi] - e^{psi_t+c}|
  double rel_residual = 0.0;  // max|e^{-psi_t-c}F - 1|
  double margin = 0.0;        // admissibility margin
};

struct TraceRow {
  double t = 0.0;
  double c = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  double margin = 0.0;
  double damping_min = 1.0;
};

struct ContinuityTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  std::string failure_reason;
};

enum class SolveStatus { Converged, ContinuityFailure };

struct SolveResult {
  SolveStatus status = SolveStatus::ContinuityFailure;
  ScalarField u;  // u0 + phi at the last converged level
  double c = 0.0;
  ContinuityTrace trace;
  ContinuityState last_state;
};

/// Deforms F[u0 + phi_t] = e^{psi_t + c_t}, psi_t = (1-t) psi_bar + t psi,
/// from the trivially solved t = 0 (phi = 0, c = 0 with psi_bar = log F[u0])
/// to the target t = 1, solving each level by damped inexact Newton with a
/// Krylov linear solver on the mean-zero subspace.
class ContinuitySolver {
 public:
  /// Throws AdmissibilityError when u0 is not admissible.
  ContinuitySolver(ProblemInstance inst, ScalarField u0, SolveOptions opts = {});

  SolveResult solve();

  /// One damped Newton step at the state's t level. Exposed for tests.
  ContinuityState newton_step(const ContinuityState& state) const;

  ContinuityState make_state(double t, const ScalarField& phi, double c) const;

  const ScalarField& psi_bar() const { return psi_bar_; }
  const ProblemInstance& instance() const { return inst_; }

  /// log max_M e^{-psi} F[u0]; the super-solution constant of the path.
  double c_bar() const { return c_bar_; }
  /// |psi_bar|_inf + |psi|_inf; the lower-bound constant for c_t.
  double c_lower() const { return c_lower_; }

 private:
  struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double damping_min = 1.0;
    std::string reason;
  };

  ScalarField psi_t(double t) const;
  NewtonOutcome solve_level(double t, ContinuityState& state) const;
  /// Solves the bordered Newton system for (dphi, dm) where m = e^c is the
  /// linearly-entering form of the constant.
  bool linear_step(const ContinuityState& state, const PointwiseEval& ev,
                   const ScalarField& b, ScalarField& dphi, double& dm) const;

  ProblemInstance inst_;
  ScalarField u0_;
  SolveOptions opts_;
  ScalarField psi_bar_;
  double c_bar_ = 0.0;
  double c_lower_ = 0.0;
  std::unique_ptr<PoissonPreconditioner> precond_;
};

/// Every snapshot must satisfy -c_lower - tol <= c_t <= t * c_bar + tol.
bool verify_ct_bounds(const ContinuityTrace& trace, double c_bar, double c_lower,
                      double tol);

struct UniquenessProbe {
  double sup_diff = 0.0;  // |(u_a - u_b) - mean(u_a - u_b)|_inf
  double c_diff = 0.0;    // |c_a - c_b|
};

/// Solves from both seeds and compares the solutions up to constants.
/// Throws LinearSolveError when either run fails to reach t = 1.
UniquenessProbe uniqueness_probe(const ProblemInstance& inst, const ScalarField& u0_a,
                                 const ScalarField& u0_b, const SolveOptions& opts = {});

/// CSV columns: t,c_t,newton_iters,residual,margin,damping_min.
void write_trace_csv(std::ostream& out, const ContinuityTrace& trace);

}  // namespace slope
