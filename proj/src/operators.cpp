#include "slope/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "slope/jacobi.hpp"

namespace slope {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Deterministic argmin scan over a margin field.
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
}  // namespace

void ProblemInstance::validate() const {
  if (fspec.dim != grid.n)
    throw ConfigError("f spec dimension " + std::to_string(fspec.dim) +
                      " does not match grid eigen dimension " + std::to_string(grid.n));
  if (psi.grid != grid || !(metric.grid() == grid) || !(theta.grid() == grid))
    throw ConfigError("problem instance fields live on different grids");
  for (double v : psi.values)
    if (!std::isfinite(v)) throw ConfigError("psi contains a non-finite value");
  // SPD metric per node; generalized_eigs reports the node index on failure.
  SymTensorField identity_like(grid);
  for_each_index(grid.node_count(), [&](std::size_t p) {
    identity_like.set_node_unchecked(p, HermMat::identity(grid.n));
  });
  (void)generalized_eigs(identity_like, metric);
}

SymTensorField theta_u(const ProblemInstance& inst, const ScalarField& u, Exec exec) {
  SymTensorField h = potential_hessian(u, inst.fd_order, exec);
  SymTensorField out(inst.grid);
  const std::size_t per = out.packed_size();
  for_each_index(
      inst.grid.node_count(),
      [&](std::size_t p) {
        const double* a = inst.theta.raw(p);
        const double* b = h.raw(p);
        double* o = out.raw(p);
        for (std::size_t k = 0; k < per; ++k) o[k] = a[k] + b[k];
      },
      exec);
  return out;
}

PointwiseEval evaluate_pointwise(const ProblemInstance& inst, const ScalarField& u,
                                 bool want_dfda, Exec exec) {
  const TorusGrid& grid = inst.grid;
  const int n = grid.n;
  SymTensorField a = theta_u(inst, u, exec);

  PointwiseEval out;
  out.lambda = EigenField(grid);
  out.f = ScalarField(grid);
  out.margin = ScalarField(grid);
  out.has_dfda = want_dfda;
  if (want_dfda) out.dfda = SymTensorField(grid);

  std::vector<unsigned char> bad_metric(grid.node_count(), 0);
  for_each_index(
      grid.node_count(),
      [&](std::size_t p) {
        EigenDecomposition d;
        try {
          d = generalized_herm_eig(a.node(p), inst.metric.node(p), p);
        } catch (const NotPositiveDefinite&) {
          bad_metric[p] = 1;
          return;
        }
        double* lam = out.lambda.raw(p);
        for (int i = 0; i < n; ++i) lam[i] = d.values[static_cast<std::size_t>(i)];
        const PointSample s = sample_f(inst.fspec, lam);
        out.margin[p] = s.margin;
        out.f[p] = s.f;
        if (want_dfda) {
          double df[kMaxDim];
          sample_grad(inst.fspec, lam, df);
          HermMat g = HermMat::zero(n);
          for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c) {
              std::complex<double> sum = 0.0;
              for (int i = 0; i < n; ++i)
                sum += df[i] * d.vectors.at(r, i) * std::conj(d.vectors.at(c, i));
              g.at(r, c) = sum;
              g.at(c, r) = std::conj(sum);
            }
          out.dfda.set_node_unchecked(p, g);
        }
      },
      exec);
  for (std::size_t p = 0; p < bad_metric.size(); ++p)
    if (bad_metric[p]) throw NotPositiveDefinite(p);
  return out;
}

ScalarField apply_F(const ProblemInstance& inst, const ScalarField& u, Exec exec) {
  PointwiseEval ev = evaluate_pointwise(inst, u, false, exec);
  const auto [margin, node] = min_with_node(ev.margin.values);
  if (margin < kDegenerateMargin) throw AdmissibilityError(node, margin);
  return std::move(ev.f);
}

FinftyField apply_Finfty(const ProblemInstance& inst, const ScalarField& u, Exec exec) {
  PointwiseEval ev = evaluate_pointwise(inst, u, false, exec);
  const auto [margin, node] = min_with_node(ev.margin.values);
  if (margin < kDegenerateMargin) throw AdmissibilityError(node, margin);
  FinftyField out;
  if (dichotomy_classify(inst.fspec) == FinftyClass::Infinite) {
    out.all_infinite = true;
    return out;
  }
  out.field = ScalarField(inst.grid);
  for_each_index(
      inst.grid.node_count(),
      [&](std::size_t p) { out.field[p] = sample_f_infty(inst.fspec, ev.lambda.raw(p)); },
      exec);
  return out;
}

AdmissibilityReport admissible(const ProblemInstance& inst, const ScalarField& u, Exec exec) {
  PointwiseEval ev = evaluate_pointwise(inst, u, false, exec);
  const auto [margin, node] = min_with_node(ev.margin.values);
  return AdmissibilityReport{margin > 0.0, margin, node};
}

SymTensorField linearize(const ProblemInstance& inst, const ScalarField& u, Exec exec) {
  PointwiseEval ev = evaluate_pointwise(inst, u, true, exec);
  const auto [margin, node] = min_with_node(ev.margin.values);
  if (margin < kDegenerateMargin) throw AdmissibilityError(node, margin);
  return std::move(ev.dfda);
}

RealCoeffField::RealCoeffField(const TorusGrid& g)
    : grid(g),
      d(g.real_dim()),
      packed(g.node_count() * (static_cast<std::size_t>(g.real_dim()) *
                               (g.real_dim() + 1) / 2),
             0.0) {}

std::size_t RealCoeffField::pack_index(int a, int b, int d) {
  // upper triangle incl diagonal, row-major: (a,b) with a <= b
  return static_cast<std::size_t>(a * d - a * (a - 1) / 2 + (b - a));
}

RealCoeffField to_real_coeffs(const SymTensorField& dfda) {
  const TorusGrid& grid = dfda.grid();
  RealCoeffField out(grid);
  const int n = grid.n;
  if (grid.kind == GridKind::RealRiemannian) {
    for_each_index(grid.node_count(), [&](std::size_t p) {
      const HermMat g = dfda.node(p);
      double* c = out.raw(p);
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
          c[RealCoeffField::pack_index(a, b, n)] = g.at(a, b).real();
    });
    return out;
  }
  // Hermitian case: dF = Re tr(G d(ddbar u)) expanded over the real axes
  // (x_1, y_1, ..., x_n, y_n); the resulting 2n x 2n form is symmetric and
  // positive definite whenever G is.
  const int d = 2 * n;
  for_each_index(grid.node_count(), [&](std::size_t p) {
    const HermMat g = dfda.node(p);
    double full[2 * kMaxDim][2 * kMaxDim] = {};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double gr = 0.25 * g.at(i, j).real();
        const double gi = 0.25 * g.at(i, j).imag();
        const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
        full[xj][xi] += gr;
        full[yj][yi] += gr;
        full[xj][yi] -= gi;
        full[yj][xi] += gi;
      }
    double* c = out.raw(p);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b)
        c[RealCoeffField::pack_index(a, b, d)] = 0.5 * (full[a][b] + full[b][a]);
  });
  return out;
}

ScalarField apply_linearized(const RealCoeffField& coeff, const ScalarField& h, int fd_order,
                             Exec exec) {
  const TorusGrid& grid = coeff.grid;
  const int d = coeff.d;
  ScalarField out(grid);
  // One stencil field per (a, b); diagonal counted once, off-diagonal twice.
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      const ScalarField dab = apply_second_difference(h, a, b, fd_order, exec);
      const double factor = (a == b) ? 1.0 : 2.0;
      const std::size_t idx = RealCoeffField::pack_index(a, b, d);
      for_each_index(
          grid.node_count(),
          [&](std::size_t p) { out[p] += factor * coeff.raw(p)[idx] * dab[p]; },
          exec);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Sup-slope estimators
// ---------------------------------------------------------------------------

namespace {

/// Real Fourier tensor basis on the grid: per axis {1, cos(2 pi j x),
/// sin(2 pi j x), j = 1..modes}. Coefficient index 0 is the all-constant
/// function and is pinned to zero by the optimizers (constants do not move
/// the objective).
class FourierBasis {
 public:
  FourierBasis(const TorusGrid& grid, int modes)
      : grid_(grid), d_(grid.real_dim()), M_(2 * modes + 1), N_(grid.resolution) {
    fwd_.resize(static_cast<std::size_t>(M_) * N_);
    for (int o = 0; o < M_; ++o)
      for (int i = 0; i < N_; ++i) {
        const double x = static_cast<double>(i) / N_;
        double v = 1.0;
        if (o > 0) {
          const int j = (o + 1) / 2;
          v = (o % 2 == 1) ? std::cos(2.0 * M_PI * j * x) : std::sin(2.0 * M_PI * j * x);
        }
        fwd_[static_cast<std::size_t>(o) * N_ + i] = v;
      }
  }

  std::size_t coeff_count() const {
    std::size_t c = 1;
    for (int a = 0; a < d_; ++a) c *= static_cast<std::size_t>(M_);
    return c;
  }

  /// sum_axes (2 pi j_axis)^2 for basis function m; 0 only for the constant.
  /// Used to precondition coefficient gradients (second derivatives of mode
  /// m scale with this symbol).
  double laplacian_symbol(std::size_t m) const {
    double s = 0.0;
    for (int a = d_ - 1; a >= 0; --a) {
      const int o = static_cast<int>(m % static_cast<std::size_t>(M_));
      m /= static_cast<std::size_t>(M_);
      if (o > 0) {
        const double j = (o + 1) / 2;
        s += (2.0 * M_PI * j) * (2.0 * M_PI * j);
      }
    }
    return s;
  }

  /// u(x) = sum_m coeffs[m] phi_m(x), evaluated by per-axis contraction.
  ScalarField synthesize(std::span<const double> coeffs) const {
    std::vector<double> cur(coeffs.begin(), coeffs.end());
    std::size_t prefix = 1;
    std::size_t suffix = coeff_count() / static_cast<std::size_t>(M_);
    for (int a = 0; a < d_; ++a) {
      cur = contract(cur, prefix, M_, N_, suffix, /*transpose=*/true);
      prefix *= static_cast<std::size_t>(N_);
      suffix = (a + 1 < d_) ? suffix / static_cast<std::size_t>(M_) : 0;
    }
    ScalarField out(grid_);
    out.values = std::move(cur);
    return out;
  }

  /// <rho, phi_m> for every m (plain sums over nodes).
  std::vector<double> analyze_dot(const ScalarField& rho) const {
    std::vector<double> cur = rho.values;
    std::size_t prefix = 1;
    std::size_t suffix = rho.values.size() / static_cast<std::size_t>(N_);
    for (int a = 0; a < d_; ++a) {
      cur = contract(cur, prefix, N_, M_, suffix, /*transpose=*/false);
      prefix *= static_cast<std::size_t>(M_);
      suffix = (a + 1 < d_) ? suffix / static_cast<std::size_t>(N_) : 0;
    }
    return cur;
  }

 private:
  /// out[p, r, s] = sum_c table(r, c) * in[p, c, s];
  /// table(r, c) = fwd_[r*N + c] normally ("analysis", in_len = N) and
  /// fwd_[c*N + r] transposed ("synthesis", in_len = M).
  std::vector<double> contract(const std::vector<double>& in, std::size_t prefix,
                               int in_len, int out_len, std::size_t suffix,
                               bool transpose) const {
    std::vector<double> out(prefix * static_cast<std::size_t>(out_len) * suffix, 0.0);
    for (std::size_t p = 0; p < prefix; ++p)
      for (int r = 0; r < out_len; ++r) {
        double* dst = out.data() + (p * out_len + static_cast<std::size_t>(r)) * suffix;
        for (int c = 0; c < in_len; ++c) {
          const double w = transpose ? fwd_[static_cast<std::size_t>(c) * N_ + r]
                                     : fwd_[static_cast<std::size_t>(r) * N_ + c];
          if (w == 0.0) continue;
          const double* src = in.data() + (p * in_len + static_cast<std::size_t>(c)) * suffix;
          for (std::size_t s = 0; s < suffix; ++s) dst[s] += w * src[s];
        }
      }
    return out;
  }

  TorusGrid grid_;
  int d_, M_, N_;
  std::vector<double> fwd_;  // M x N
};

struct SlopeIterate {
  ScalarField u;
  PointwiseEval ev;
  std::vector<double> v;  // e^{-psi} F per node
  double vmax = 0.0, vmin = 0.0;
};

/// Smoothed objective and softmax weights at sharpness beta. For the
/// minimax direction the objective overestimates max(v); for maximin it
/// underestimates min(v).
double smoothed_objective(const std::vector<double>& v, double vmax, double vmin,
                          double beta, bool minimize_max, std::vector<double>& weights) {
  weights.resize(v.size());
  const double anchor = minimize_max ? vmax : vmin;
  const double sign = minimize_max ? 1.0 : -1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    weights[i] = std::exp(sign * beta * (v[i] - anchor));
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;
  return anchor + sign * std::log(sum) / beta;
}

class SlopeOptimizer {
 public:
  SlopeOptimizer(const ProblemInstance& inst, const SlopeOptions& opts,
                 const ScalarField* seed_u, bool minimize_max)
      : inst_(inst),
        opts_(opts),
        minimize_max_(minimize_max),
        basis_(inst.grid, opts.modes),
        exp_neg_psi_(inst.grid) {
    for_each_index(inst.grid.node_count(),
                   [&](std::size_t p) { exp_neg_psi_[p] = std::exp(-inst.psi[p]); });
    seed_ = seed_u ? *seed_u : ScalarField(inst_.grid, 0.0);
  }

  double run() {
    const int rounds = opts_.restarts + 1;
    const int per_round = std::max(1, opts_.budget / rounds);
    std::mt19937 rng(opts_.seed);

    SlopeIterate start = evaluate(seed_, /*require_admissible=*/true);
    best_ = minimize_max_ ? start.vmax : start.vmin;

    for (int round = 0; round < rounds; ++round) {
      std::vector<double> coeffs(basis_.coeff_count(), 0.0);
      if (round > 0 && !random_init(coeffs, rng)) continue;
      descend(coeffs, per_round);
    }
    return best_;
  }

 private:
  SlopeIterate evaluate(const ScalarField& u, bool require_admissible) {
    SlopeIterate it;
    it.u = u;
    it.ev = evaluate_pointwise(inst_, u, true);
    const auto [margin, node] = min_with_node(it.ev.margin.values);
    if (margin < kDegenerateMargin) {
      if (require_admissible) throw AdmissibilityError(node, margin);
      it.v.clear();  // marks inadmissible
      return it;
    }
    it.v.resize(u.size());
    for (std::size_t p = 0; p < it.v.size(); ++p) it.v[p] = exp_neg_psi_[p] * it.ev.f[p];
    it.vmax = reduce_max(it.v.data(), it.v.size());
    it.vmin = reduce_min(it.v.data(), it.v.size());
    return it;
  }

  bool random_init(std::vector<double>& coeffs, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t m = 1; m < coeffs.size(); ++m) coeffs[m] = 0.01 * dist(rng);
    for (int attempt = 0; attempt < 40; ++attempt) {
      ScalarField u = compose(coeffs);
      if (!evaluate(u, false).v.empty()) return true;
      for (double& c : coeffs) c *= 0.5;
    }
    return false;
  }

  ScalarField compose(std::span<const double> coeffs) const {
    ScalarField u = basis_.synthesize(coeffs);
    for (std::size_t p = 0; p < u.size(); ++p) u[p] += seed_[p];
    return u;
  }

  void descend(std::vector<double>& coeffs, int iterations) {
    SlopeIterate cur = evaluate(compose(coeffs), false);
    if (cur.v.empty()) return;
    update_best(cur);

    // Sharpness is scale-relative so that shifting psi by a constant scales
    // the whole trajectory (the Lemma-3.5 law e^{-C} sigma holds exactly).
    const double scale_ref =
        std::max(cur.vmax - cur.vmin, 1e-8 * std::abs(cur.vmax));
    if (scale_ref == 0.0) return;  // flat objective: the seed is the estimate
    double beta = 8.0 / scale_ref;
    const double beta_cap = beta * 1099511627776.0;  // 2^40 doublings at most
    double step = 0.05;
    std::vector<double> weights;
    double obj = smoothed_objective(cur.v, cur.vmax, cur.vmin, beta, minimize_max_, weights);

    for (int iter = 0; iter < iterations; ++iter) {
      if (iter > 0 && iter % 50 == 0) {
        beta = std::min(beta * 2.0, beta_cap);
        obj = smoothed_objective(cur.v, cur.vmax, cur.vmin, beta, minimize_max_, weights);
      }

      std::vector<double> grad = gradient(cur, weights);
      grad[0] = 0.0;
      // Natural-gradient scaling: divide by the mode's Laplacian symbol so
      // every frequency moves u by a comparable amount.
      for (std::size_t m = 1; m < grad.size(); ++m)
        grad[m] /= basis_.laplacian_symbol(m);
      double gmax = 0.0;
      for (double g : grad) gmax = std::max(gmax, std::abs(g));
      if (gmax == 0.0) break;

      std::vector<double> trial(coeffs.size());
      const double dir = minimize_max_ ? -1.0 : 1.0;
      for (std::size_t m = 0; m < coeffs.size(); ++m)
        trial[m] = coeffs[m] + dir * step * grad[m] / gmax;
      trial[0] = 0.0;

      SlopeIterate cand = evaluate(compose(trial), false);
      bool ok = !cand.v.empty();
      if (ok) {
        const double cobj =
            smoothed_objective(cand.v, cand.vmax, cand.vmin, beta, minimize_max_, weights);
        ok = minimize_max_ ? (cobj < obj) : (cobj > obj);
        if (ok) {
          coeffs = std::move(trial);
          cur = std::move(cand);
          obj = cobj;
          update_best(cur);
          step = std::min(step * 1.25, 0.5);
          // weights were refreshed by the accepted objective evaluation
          continue;
        }
      }
      step *= 0.5;
      if (step < 1e-13) break;
      // restore weights for the retained iterate
      obj = smoothed_objective(cur.v, cur.vmax, cur.vmin, beta, minimize_max_, weights);
    }
  }

  /// d(smoothed obj)/d coeff_m = <rho, phi_m> with
  /// rho = sum_ab D_ab(w e^{-psi} C_ab); central stencils are self-adjoint.
  std::vector<double> gradient(const SlopeIterate& cur, const std::vector<double>& weights) {
    const RealCoeffField coeff = to_real_coeffs(cur.ev.dfda);
    const int d = coeff.d;
    ScalarField rho(inst_.grid);
    ScalarField weighted(inst_.grid);
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        const std::size_t idx = RealCoeffField::pack_index(a, b, d);
        const double factor = (a == b) ? 1.0 : 2.0;
        for_each_index(inst_.grid.node_count(), [&](std::size_t p) {
          weighted[p] = factor * weights[p] * exp_neg_psi_[p] * coeff.raw(p)[idx];
        });
        const ScalarField dab = apply_second_difference(weighted, a, b, inst_.fd_order);
        for (std::size_t p = 0; p < rho.size(); ++p) rho[p] += dab[p];
      }
    return basis_.analyze_dot(rho);
  }

  void update_best(const SlopeIterate& it) {
    if (minimize_max_)
      best_ = std::min(best_, it.vmax);
    else
      best_ = std::max(best_, it.vmin);
  }

  const ProblemInstance& inst_;
  SlopeOptions opts_;
  bool minimize_max_;
  FourierBasis basis_;
  ScalarField exp_neg_psi_;
  ScalarField seed_;
  double best_ = 0.0;
};

}  // namespace

double supslope_minimax(const ProblemInstance& inst, const SlopeOptions& opts,
                        const ScalarField* seed_u) {
  return SlopeOptimizer(inst, opts, seed_u, true).run();
}

double supslope_maximin(const ProblemInstance& inst, const SlopeOptions& opts,
                        const ScalarField* seed_u) {
  return SlopeOptimizer(inst, opts, seed_u, false).run();
}

// ---------------------------------------------------------------------------
// Sub-solution certificates
// ---------------------------------------------------------------------------

namespace {

struct ShiftPredicate {
  bool ok = true;
  std::size_t violator = 0;
};

/// lambda(p) - r*1 in Gamma at every node, and for Finite variants
/// f_infty(lambda(p) - r*1) > h(p).
ShiftPredicate shift_predicate(const SymmetricFunctionSpec& spec, const EigenField& lambda,
                               const ScalarField* h, double r, bool finite, Exec exec) {
  const std::size_t count = lambda.grid.node_count();
  std::vector<unsigned char> bad(count, 0);
  for_each_index(
      count,
      [&](std::size_t p) {
        double mu[kMaxDim];
        for (int i = 0; i < spec.dim; ++i) mu[i] = lambda.raw(p)[i] - r;
        const PointSample s = sample_f(spec, mu);
        if (!(s.margin > 0.0)) {
          bad[p] = 1;
          return;
        }
        if (finite && h != nullptr && !(sample_f_infty(spec, mu) > (*h)[p])) bad[p] = 1;
      },
      exec);
  for (std::size_t p = 0; p < count; ++p)
    if (bad[p]) return {false, p};
  return {true, 0};
}

}  // namespace

CSubResult c_subsolution_params(const ProblemInstance& inst, const ScalarField& u,
                                const ScalarField& h, Exec exec) {
  PointwiseEval ev = evaluate_pointwise(inst, u, false, exec);
  const auto [margin, worst] = min_with_node(ev.margin.values);
  if (margin < kDegenerateMargin) throw AdmissibilityError(worst, margin);

  const SymmetricFunctionSpec& spec = inst.fspec;
  const bool finite = dichotomy_classify(spec) == FinftyClass::Finite;

  CSubResult out;
  const ShiftPredicate at_zero = shift_predicate(spec, ev.lambda, &h, 0.0, finite, exec);
  if (!at_zero.ok) {
    out.violating_node = at_zero.violator;
    return out;
  }

  // Largest r with the predicate intact, by doubling then bisection; the
  // cone condition alone guarantees failure for large r.
  double lo = 0.0, hi = 1.0;
  while (shift_predicate(spec, ev.lambda, &h, hi, finite, exec).ok && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 80 && (hi - lo) > 1e-13 * (1.0 + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (shift_predicate(spec, ev.lambda, &h, mid, finite, exec).ok)
      lo = mid;
    else
      hi = mid;
  }
  const double r = 0.5 * lo;
  if (!(r > 0.0)) {
    out.violating_node = 0;
    return out;
  }

  // R: largest coordinate-direction root of f(mu + t e_i) = h(p) plus |mu|.
  // Directions with f_{infty,i}(mu) > h(p) have a finite root; the shift
  // predicate at r guarantees that for Finite variants, and SigmaK grows
  // unboundedly in every direction.
  const std::size_t count = inst.grid.node_count();
  std::vector<double> node_R(count, 0.0);
  const int n = spec.dim;
  for_each_index(
      count,
      [&](std::size_t p) {
        double mu[kMaxDim];
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
          mu[i] = ev.lambda.raw(p)[i] - r;
          norm2 += mu[i] * mu[i];
        }
        const double target = h[p];
        const double norm_mu = std::sqrt(norm2);
        double worst_t = 0.0;
        double probe[kMaxDim];
        for (int i = 0; i < n; ++i) {
          std::copy(mu, mu + n, probe);
          const double base = sample_f(spec, probe).f;
          if (base >= target) continue;  // level set hit at t <= 0
          double t_hi = 1.0;
          for (int grow = 0; grow < 60; ++grow) {
            probe[i] = mu[i] + t_hi;
            if (sample_f(spec, probe).f > target) break;
            t_hi *= 2.0;
          }
          double t_lo = 0.0;
          for (int iter = 0; iter < 80; ++iter) {
            const double mid = 0.5 * (t_lo + t_hi);
            probe[i] = mu[i] + mid;
            if (sample_f(spec, probe).f > target)
              t_hi = mid;
            else
              t_lo = mid;
          }
          worst_t = std::max(worst_t, t_hi);
        }
        node_R[p] = worst_t + norm_mu;
      },
      exec);

  out.ok = true;
  out.params.r = r;
  out.params.R = reduce_max(node_R.data(), node_R.size(), exec);
  return out;
}

SubsolutionReport subsolution_check(const ProblemInstance& inst, const ScalarField& u,
                                    double sigma, Exec exec) {
  const FinftyField finf = apply_Finfty(inst, u, exec);  // also enforces admissibility
  SubsolutionReport report;

  ScalarField level(inst.grid);
  for_each_index(
      inst.grid.node_count(),
      [&](std::size_t p) { level[p] = sigma * std::exp(inst.psi[p]); },
      exec);

  if (finf.all_infinite) {
    report.margin = kInf;
    report.gap_delta = kInf;
    report.verdict = true;
  } else {
    ScalarField weighted(inst.grid);
    for_each_index(
        inst.grid.node_count(),
        [&](std::size_t p) { weighted[p] = std::exp(-inst.psi[p]) * finf.field[p]; },
        exec);
    const double min_finf = field_min(weighted, exec);
    report.margin = min_finf - sigma;
    report.verdict = report.margin > kStrictTol;

    const ScalarField f = apply_F(inst, u, exec);
    ScalarField wf(inst.grid);
    for_each_index(
        inst.grid.node_count(),
        [&](std::size_t p) { wf[p] = std::exp(-inst.psi[p]) * f[p]; },
        exec);
    report.gap_delta = min_finf / field_max(wf, exec) - 1.0;
  }

  if (report.verdict) {
    const CSubResult cs = c_subsolution_params(inst, u, level, exec);
    if (cs.ok) report.c_params = cs.params;
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON serialization (stable shapes; +inf encoded as the string "inf")
// ---------------------------------------------------------------------------

namespace {
nlohmann::ordered_json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
}  // namespace

std::string to_json_string(const SlopeReport& report) {
  nlohmann::ordered_json j;
  if (report.sigma_from_solution)
    j["sigma_from_solution"] = json_number(*report.sigma_from_solution);
  j["sigma_minimax_upper"] = json_number(report.sigma_minimax_upper);
  j["sigma_maximin_lower"] = json_number(report.sigma_maximin_lower);
  j["gap"] = json_number(report.gap);
  j["modes"] = report.modes;
  j["budget"] = report.budget;
  return j.dump();
}

std::string to_json_string(const SubsolutionReport& report) {
  nlohmann::ordered_json j;
  j["margin"] = json_number(report.margin);
  j["verdict"] = report.verdict;
  j["gap_delta"] = json_number(report.gap_delta);
  if (report.c_params) {
    j["c_params"]["r"] = report.c_params->r;
    j["c_params"]["R"] = report.c_params->R;
  }
  return j.dump();
}

}  // namespace slope
