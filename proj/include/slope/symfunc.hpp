#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slope/errors.hpp"

namespace slope {

/// Hard cap on the eigenvalue-tuple length. Pointwise dense eigenproblems and
/// the S_k recurrences are only sensible for small n; desk-scale grids cap
/// realistic n at 4.
inline constexpr int kMaxDim = 8;

/// Inputs below this cone margin are treated as degenerate and rejected
/// rather than nudged; silent projection would mask modeling errors.
inline constexpr double kDegenerateMargin = 1e-10;

enum class FKind { SigmaK, Quotient };

enum class FinftyClass { Finite, Infinite };

/// Eigenvalue tuple, kept sorted descending by every constructor.
struct EigenTuple {
  int n = 0;
  std::array<double, kMaxDim> v{};

  static EigenTuple from(std::span<const double> values);
  static EigenTuple from(std::initializer_list<double> values);

  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return {v.data(), static_cast<std::size_t>(n)}; }
};

/// Gamma_k = { lambda : S_i(lambda) > 0, i = 1..k }, an open cone.
struct ConeLabel {
  int k = 1;
  int n = 1;
};

struct ConeCheck {
  bool inside = false;
  double margin = 0.0;  // min_{i=1..k} S_i(lambda); may be <= 0 when outside
};

/// A member of the admissible family of symmetric functions:
///   SigmaK:   f(lambda) = S_k(lambda)^(1/k)              on Gamma_k
///   Quotient: f(lambda) = scale * (S_k/S_l)^exponent     on Gamma_k
/// with 0 <= l < k <= n and exponent = 1/(k-l). The variant list is closed;
/// every member satisfies: df/dlambda_i > 0 in Gamma, f concave, f = 0 on the
/// cone boundary, and f unbounded along rays.
struct SymmetricFunctionSpec {
  FKind kind = FKind::SigmaK;
  int dim = 2;  // n, length of the eigenvalue tuple
  int k = 1;
  int l = 0;           // Quotient only
  double exponent = 1.0;  // Quotient only; always 1/(k-l)
  double scale = 1.0;     // Quotient only

  static SymmetricFunctionSpec sigma_k(int k, int n);
  static SymmetricFunctionSpec quotient(int k, int l, double scale, int n);
  /// The J-equation normalization: n * S_n / S_{n-1} on Gamma_n.
  static SymmetricFunctionSpec j_normalized(int n);

  ConeLabel cone() const { return ConeLabel{k, dim}; }
};

/// Parses spec strings like "sigma_k(k=2)" or
/// "quotient(k=2,l=1,exponent=1,scale=2)"; case-insensitive, whitespace
/// ignored. dim is supplied by the surrounding config. Throws ConfigError.
SymmetricFunctionSpec parse_fspec(const std::string& text, int dim);
std::string to_string(const SymmetricFunctionSpec& spec);

/// All elementary symmetric values S_0..S_m of the first m entries,
/// by the stable one-pass recurrence S_k(x_1..x_j) = S_k(..x_{j-1}) + x_j S_{k-1}(..x_{j-1}).
using EsfArray = std::array<double, kMaxDim + 1>;
EsfArray elementary_symmetric_all(std::span<const double> values);

/// S_k(lambda); S_0 = 1. Throws std::domain_error for k outside [0, n].
double elementary_symmetric(const EigenTuple& lambda, int k);

ConeCheck in_cone(const ConeLabel& cone, const EigenTuple& lambda);

/// f(lambda) > 0. Throws ConeViolation (with the first failing index) when
/// lambda is outside the spec's cone.
double eval_f(const SymmetricFunctionSpec& spec, const EigenTuple& lambda);

/// (df/dlambda_1, ..., df/dlambda_n), strictly positive in the cone.
/// Uses dS_k/dlambda_i = S_{k-1}(lambda with entry i removed).
std::array<double, kMaxDim> grad_f(const SymmetricFunctionSpec& spec,
                                   const EigenTuple& lambda);

/// lim_{R->inf} f(lambda with entry i replaced by R). Closed form:
/// SigmaK and l = 0 quotients give +inf; quotients with l >= 1 give
/// scale * (S_{k-1}(lambda\i) / S_{l-1}(lambda\i))^exponent.
/// +inf is a distinguished value, propagated through min/comparison only.
double f_infty_i(const SymmetricFunctionSpec& spec, const EigenTuple& lambda, int i);

/// f_infty(lambda) = min_i f_infty_i(lambda). Debug builds assert this equals
/// the drop-the-max form (replace the largest entry by R -> inf).
double f_infty(const SymmetricFunctionSpec& spec, const EigenTuple& lambda);

/// Either f_infty is identically +inf on the cone or finite everywhere in it.
FinftyClass dichotomy_classify(const SymmetricFunctionSpec& spec);

/// Non-throwing entry points for the field kernels (one call per grid node):
/// cone margin plus f (NaN outside the cone).
struct PointSample {
  double margin = 0.0;
  double f = 0.0;
};
PointSample sample_f(const SymmetricFunctionSpec& spec, const double* lambda) noexcept;
/// df/dlambda into df[0..n); only meaningful inside the cone.
void sample_grad(const SymmetricFunctionSpec& spec, const double* lambda,
                 double* df) noexcept;
/// f_infty; +inf for Infinite variants; only meaningful inside the cone.
double sample_f_infty(const SymmetricFunctionSpec& spec, const double* lambda) noexcept;

}  // namespace slope
