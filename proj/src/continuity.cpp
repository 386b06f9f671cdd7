#include "slope/continuity.hpp"

#include <cmath>
#include <ostream>

#include "slope/gmres.hpp"

namespace slope {

namespace {

std::pair<double, std::size_t> min_with_node(const std::vector<double>& v) {
  double best = v[0];
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < best) {
      best = v[i];
      arg = i;
    }
  return {best, arg};
}

void subtract_mean(ScalarField& f) {
  const double m = field_mean(f);
  for_each_index(f.size(), [&](std::size_t p) { f[p] -= m; });
}

}  // namespace

ContinuitySolver::ContinuitySolver(ProblemInstance inst, ScalarField u0, SolveOptions opts)
    : inst_(std::move(inst)), u0_(std::move(u0)), opts_(opts) {
  const ScalarField f0 = apply_F(inst_, u0_);  // throws when u0 is inadmissible
  psi_bar_ = ScalarField(inst_.grid);
  for_each_index(inst_.grid.node_count(),
                 [&](std::size_t p) { psi_bar_[p] = std::log(f0[p]); });
  // c_bar = log max e^{-psi} F[u0] = max(psi_bar - psi).
  ScalarField diff(inst_.grid);
  for_each_index(inst_.grid.node_count(),
                 [&](std::size_t p) { diff[p] = psi_bar_[p] - inst_.psi[p]; });
  c_bar_ = field_max(diff);
  c_lower_ = field_max_abs(psi_bar_) + field_max_abs(inst_.psi);
  precond_ = std::make_unique<PoissonPreconditioner>(inst_.grid, inst_.fd_order);
}

ScalarField ContinuitySolver::psi_t(double t) const {
  ScalarField out(inst_.grid);
  for_each_index(inst_.grid.node_count(), [&](std::size_t p) {
    out[p] = (1.0 - t) * psi_bar_[p] + t * inst_.psi[p];
  });
  return out;
}

ContinuityState ContinuitySolver::make_state(double t, const ScalarField& phi,
                                             double c) const {
  ContinuityState s;
  s.t = t;
  s.phi = phi;
  s.c = c;
  ScalarField u = u0_;
  for_each_index(u.size(), [&](std::size_t p) { u[p] += phi[p]; });
  const PointwiseEval ev = evaluate_pointwise(inst_, u, false);
  s.margin = min_with_node(ev.margin.values).first;
  const ScalarField pt = psi_t(t);
  double res = 0.0, rel = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double b = std::exp(pt[p] + c);
    res = std::max(res, std::abs(ev.f[p] - b));
    rel = std::max(rel, std::abs(ev.f[p] / b - 1.0));
  }
  s.residual = res;
  s.rel_residual = rel;
  return s;
}

bool ContinuitySolver::linear_step(const ContinuityState& state, const PointwiseEval& ev,
                                   const ScalarField& b, ScalarField& dphi,
                                   double& dm) const {
  const std::size_t count = inst_.grid.node_count();
  const RealCoeffField coeff = to_real_coeffs(ev.dfda);
  const int d = coeff.d;

  // alpha for the constant-coefficient preconditioner: mean of tr(C)/d.
  ScalarField trace(inst_.grid);
  for_each_index(count, [&](std::size_t p) {
    double tr = 0.0;
    for (int a = 0; a < d; ++a) tr += coeff.raw(p)[RealCoeffField::pack_index(a, a, d)];
    trace[p] = tr / d;
  });
  const double alpha = field_mean(trace);

  // The constant is carried as m = e^c, which the equation depends on
  // linearly: F[u0 + phi] - m e^{psi_t} = 0. Bordered system on (dphi, dm):
  //   sum_ab C_ab D_ab dphi - dm * e^{psi_t} = -(F - b),  mean(dphi) = 0,
  // where b = m e^{psi_t} is the current right-hand side.
  const double m = std::exp(state.c);
  ScalarField w(inst_.grid);  // e^{psi_t} = b / m
  for_each_index(count, [&](std::size_t p) { w[p] = b[p] / m; });
  const double w_mean = field_mean(w);

  const std::size_t nz = count + 1;
  std::vector<double> rhs(nz), sol(nz, 0.0);
  for (std::size_t p = 0; p < count; ++p) rhs[p] = -(ev.f[p] - b[p]);
  rhs[count] = 0.0;

  ScalarField zfield(inst_.grid), yfield(inst_.grid);
  auto matvec = [&](const double* z, double* y) {
    std::copy(z, z + count, zfield.values.begin());
    yfield = apply_linearized(coeff, zfield, inst_.fd_order);
    const double dm_part = z[count];
    for (std::size_t p = 0; p < count; ++p) y[p] = yfield[p] - dm_part * w[p];
    y[count] = field_mean(zfield);
  };
  // M^{-1} approximates [alpha*Lap, -mean(w); mean, 0]^{-1}.
  std::vector<double> r0(count);
  auto precond = [&](const double* r, double* z) {
    double rm = 0.0;
    for (std::size_t p = 0; p < count; ++p) rm += r[p];
    rm /= static_cast<double>(count);
    for (std::size_t p = 0; p < count; ++p) r0[p] = r[p] - rm;
    precond_->solve(alpha, r0.data(), z);
    const double rho = r[count];
    for (std::size_t p = 0; p < count; ++p) z[p] += rho;
    z[count] = w_mean != 0.0 ? -rm / w_mean : 0.0;
  };

  GmresOptions gopts;
  gopts.max_iters = opts_.lin_iters;
  gopts.rel_tol = opts_.krylov_forcing;
  const GmresResult res = gmres(nz, matvec, precond, rhs.data(), sol.data(), gopts);
  if (!res.converged) return false;

  dphi = ScalarField(inst_.grid);
  std::copy(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(count),
            dphi.values.begin());
  subtract_mean(dphi);  // enforce the constraint exactly
  dm = sol[count];
  return true;
}

ContinuitySolver::NewtonOutcome ContinuitySolver::solve_level(double t,
                                                              ContinuityState& state) const {
  NewtonOutcome out;
  const ScalarField pt = psi_t(t);
  ScalarField u = u0_;
  for_each_index(u.size(), [&](std::size_t p) { u[p] += state.phi[p]; });

  for (int iter = 0; iter < opts_.max_newton; ++iter) {
    const PointwiseEval ev = evaluate_pointwise(inst_, u, true);
    const auto [margin, worst] = min_with_node(ev.margin.values);
    if (margin < opts_.margin_floor) {
      out.reason = "margin collapse at node " + std::to_string(worst);
      return out;
    }
    ScalarField b(inst_.grid);
    for_each_index(u.size(), [&](std::size_t p) { b[p] = std::exp(pt[p] + state.c); });
    double rel = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p)
      rel = std::max(rel, std::abs(ev.f[p] / b[p] - 1.0));
    state.margin = margin;
    state.rel_residual = rel;
    if (rel <= opts_.tol) {
      out.converged = true;
      out.iterations = iter;
      state.t = t;
      double res = 0.0;
      for (std::size_t p = 0; p < u.size(); ++p)
        res = std::max(res, std::abs(ev.f[p] - b[p]));
      state.residual = res;
      return out;
    }

    ScalarField dphi;
    double dm = 0.0;
    if (!linear_step(state, ev, b, dphi, dm)) {
      out.reason = "linear solve stalled";
      return out;
    }

    // Backtracking damping: keep m positive, stay admissible and reduce the
    // residual.
    const double m_cur = std::exp(state.c);
    double beta = 1.0;
    bool accepted = false;
    while (beta >= opts_.beta_min) {
      const double m_try = m_cur + beta * dm;
      if (m_try > 0.0) {
        ScalarField u_try = u;
        for_each_index(u.size(), [&](std::size_t p) { u_try[p] += beta * dphi[p]; });
        const double c_try = std::log(m_try);
        PointwiseEval trial = evaluate_pointwise(inst_, u_try, false);
        const double margin_try = min_with_node(trial.margin.values).first;
        if (margin_try >= opts_.margin_floor) {
          double rel_try = 0.0;
          for (std::size_t p = 0; p < u.size(); ++p)
            rel_try = std::max(rel_try, std::abs(trial.f[p] * std::exp(-pt[p] - c_try) - 1.0));
          if (rel_try < rel * (1.0 - 0.2 * beta) || rel_try <= opts_.tol) {
            u = std::move(u_try);
            for_each_index(u.size(),
                           [&](std::size_t p) { state.phi[p] = u[p] - u0_[p]; });
            state.c = c_try;
            out.damping_min = std::min(out.damping_min, beta);
            accepted = true;
            break;
          }
        }
      }
      beta *= 0.5;
    }
    if (!accepted) {
      out.reason = "damping underflow";
      out.iterations = iter + 1;
      return out;
    }
  }
  out.reason = "newton iteration cap";
  out.iterations = opts_.max_newton;
  return out;
}

ContinuityState ContinuitySolver::newton_step(const ContinuityState& state) const {
  const ScalarField pt = psi_t(state.t);
  ScalarField u = u0_;
  for_each_index(u.size(), [&](std::size_t p) { u[p] += state.phi[p]; });
  const PointwiseEval ev = evaluate_pointwise(inst_, u, true);
  const auto [margin, worst] = min_with_node(ev.margin.values);
  if (margin < opts_.margin_floor) throw AdmissibilityError(worst, margin);

  ScalarField b(inst_.grid);
  for_each_index(u.size(), [&](std::size_t p) { b[p] = std::exp(pt[p] + state.c); });
  double rel = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p)
    rel = std::max(rel, std::abs(ev.f[p] / b[p] - 1.0));
  if (rel <= opts_.tol) return make_state(state.t, state.phi, state.c);

  ScalarField dphi;
  double dm = 0.0;
  if (!linear_step(state, ev, b, dphi, dm))
    throw LinearSolveError("Krylov did not converge within the iteration cap");

  const double m_cur = std::exp(state.c);
  double beta = 1.0;
  while (beta >= opts_.beta_min) {
    const double m_try = m_cur + beta * dm;
    if (m_try > 0.0) {
      ScalarField phi_try = state.phi;
      for_each_index(phi_try.size(), [&](std::size_t p) { phi_try[p] += beta * dphi[p]; });
      ContinuityState next = make_state(state.t, phi_try, std::log(m_try));
      if (next.margin >= opts_.margin_floor &&
          (next.rel_residual < rel * (1.0 - 0.2 * beta) || next.rel_residual <= opts_.tol))
        return next;
    }
    beta *= 0.5;
  }
  throw LinearSolveError("damping underflow in newton_step");
}

SolveResult ContinuitySolver::solve() {
  SolveResult result;
  ContinuityState state;
  state.t = 0.0;
  state.phi = ScalarField(inst_.grid, 0.0);
  state.c = 0.0;
  // t = 0 is solved exactly by construction (psi_0 = psi_bar = log F[u0]).
  state = make_state(0.0, state.phi, 0.0);
  result.trace.rows.push_back(
      TraceRow{0.0, 0.0, 0, state.residual, state.margin, 1.0});

  double dt = opts_.dt_init;
  int clean_successes = 0;
  while (state.t < 1.0) {
    const double t_next = std::min(1.0, state.t + dt);
    ContinuityState attempt = state;
    const NewtonOutcome outcome = solve_level(t_next, attempt);
    if (outcome.converged) {
      state = attempt;
      state.t = t_next;
      result.trace.rows.push_back(TraceRow{t_next, state.c, outcome.iterations,
                                           state.residual, state.margin,
                                           outcome.damping_min});
      if (outcome.damping_min >= 1.0) {
        if (++clean_successes >= 2) {
          dt *= 2.0;
          clean_successes = 0;
        }
      } else {
        clean_successes = 0;
      }
    } else {
      clean_successes = 0;
      dt *= 0.5;
      if (dt < opts_.min_dt) {
        result.status = SolveStatus::ContinuityFailure;
        result.trace.converged = false;
        result.trace.failure_reason =
            "step underflow at t = " + std::to_string(state.t) + ": " + outcome.reason;
        result.u = u0_;
        for_each_index(result.u.size(),
                       [&](std::size_t p) { result.u[p] += state.phi[p]; });
        result.c = state.c;
        result.last_state = state;
        return result;
      }
    }
  }

  result.status = SolveStatus::Converged;
  result.trace.converged = true;
  result.u = u0_;
  for_each_index(result.u.size(), [&](std::size_t p) { result.u[p] += state.phi[p]; });
  result.c = state.c;
  result.last_state = state;
  return result;
}

bool verify_ct_bounds(const ContinuityTrace& trace, double c_bar, double c_lower,
                      double tol) {
  for (const TraceRow& row : trace.rows) {
    if (row.c > row.t * c_bar + tol) return false;
    if (row.c < -c_lower - tol) return false;
  }
  return true;
}

UniquenessProbe uniqueness_probe(const ProblemInstance& inst, const ScalarField& u0_a,
                                 const ScalarField& u0_b, const SolveOptions& opts) {
  ContinuitySolver sa(inst, u0_a, opts);
  const SolveResult ra = sa.solve();
  if (ra.status != SolveStatus::Converged)
    throw LinearSolveError("uniqueness probe: first solve failed (" +
                           ra.trace.failure_reason + ")");
  ContinuitySolver sb(inst, u0_b, opts);
  const SolveResult rb = sb.solve();
  if (rb.status != SolveStatus::Converged)
    throw LinearSolveError("uniqueness probe: second solve failed (" +
                           rb.trace.failure_reason + ")");
  ScalarField diff(inst.grid);
  for_each_index(diff.size(), [&](std::size_t p) { diff[p] = ra.u[p] - rb.u[p]; });
  subtract_mean(diff);
  UniquenessProbe probe;
  probe.sup_diff = field_max_abs(diff);
  probe.c_diff = std::abs(ra.c - rb.c);
  return probe;
}

void write_trace_csv(std::ostream& out, const ContinuityTrace& trace) {
  out << "t,c_t,newton_iters,residual,margin,damping_min\n";
  out.precision(17);
  for (const TraceRow& row : trace.rows)
    out << row.t << ',' << row.c << ',' << row.newton_iters << ',' << row.residual << ','
        << row.margin << ',' << row.damping_min << '\n';
}

}  // namespace slope
