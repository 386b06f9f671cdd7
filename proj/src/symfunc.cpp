#include "slope/symfunc.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace slope {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw std::domain_error("eigenvalue tuple length must be in [1, " +
                            std::to_string(kMaxDim) + "], got " + std::to_string(n));
}
}  // namespace

EigenTuple EigenTuple::from(std::span<const double> values) {
  check_dim(static_cast<int>(values.size()));
  EigenTuple t;
  t.n = static_cast<int>(values.size());
  std::copy(values.begin(), values.end(), t.v.begin());
  std::sort(t.v.begin(), t.v.begin() + t.n, std::greater<double>());
  return t;
}

EigenTuple EigenTuple::from(std::initializer_list<double> values) {
  return from(std::span<const double>(values.begin(), values.size()));
}

SymmetricFunctionSpec SymmetricFunctionSpec::sigma_k(int k, int n) {
  check_dim(n);
  if (k < 1 || k > n)
    throw std::domain_error("sigma_k requires 1 <= k <= n, got k = " + std::to_string(k));
  SymmetricFunctionSpec s;
  s.kind = FKind::SigmaK;
  s.dim = n;
  s.k = k;
  return s;
}

SymmetricFunctionSpec SymmetricFunctionSpec::quotient(int k, int l, double scale, int n) {
  check_dim(n);
  if (!(0 <= l && l < k && k <= n))
    throw std::domain_error("quotient requires 0 <= l < k <= n, got k = " +
                            std::to_string(k) + ", l = " + std::to_string(l));
  if (!(scale > 0.0)) throw std::domain_error("quotient scale must be positive");
  SymmetricFunctionSpec s;
  s.kind = FKind::Quotient;
  s.dim = n;
  s.k = k;
  s.l = l;
  s.exponent = 1.0 / static_cast<double>(k - l);
  s.scale = scale;
  return s;
}

SymmetricFunctionSpec SymmetricFunctionSpec::j_normalized(int n) {
  return quotient(n, n - 1, static_cast<double>(n), n);
}

EsfArray elementary_symmetric_all(std::span<const double> values) {
  const int m = static_cast<int>(values.size());
  assert(m <= kMaxDim);
  EsfArray s{};
  s[0] = 1.0;
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k >= 1; --k) s[k] += values[static_cast<std::size_t>(j)] * s[k - 1];
  return s;
}

double elementary_symmetric(const EigenTuple& lambda, int k) {
  if (k < 0 || k > lambda.n)
    throw std::domain_error("elementary_symmetric: k = " + std::to_string(k) +
                            " outside [0, " + std::to_string(lambda.n) + "]");
  return elementary_symmetric_all(lambda.values())[k];
}

ConeCheck in_cone(const ConeLabel& cone, const EigenTuple& lambda) {
  assert(cone.n == lambda.n && cone.k >= 1 && cone.k <= cone.n);
  const EsfArray s = elementary_symmetric_all(lambda.values());
  ConeCheck out;
  out.margin = s[1];
  for (int i = 2; i <= cone.k; ++i) out.margin = std::min(out.margin, s[i]);
  out.inside = out.margin > 0.0;  // the cone is open: exact zero is outside
  return out;
}

namespace {

/// Requires lambda in the cone; returns the full S array. Throws with the
/// first failing index otherwise.
EsfArray require_cone(const SymmetricFunctionSpec& spec, const EigenTuple& lambda) {
  if (lambda.n != spec.dim)
    throw std::domain_error("eigen tuple length " + std::to_string(lambda.n) +
                            " does not match spec dim " + std::to_string(spec.dim));
  const EsfArray s = elementary_symmetric_all(lambda.values());
  for (int i = 1; i <= spec.k; ++i)
    if (!(s[i] > 0.0)) throw ConeViolation(i, s[i]);
  return s;
}

/// S_0..S_{m-1} of the tuple with one entry removed, via the reverse
/// recurrence S'_k = S_k - x_i * S'_{k-1}.
EsfArray esf_excluding(const EsfArray& full, int m, double x_i) {
  EsfArray out{};
  out[0] = 1.0;
  for (int k = 1; k < m; ++k) out[k] = full[k] - x_i * out[k - 1];
  return out;
}

}  // namespace

double eval_f(const SymmetricFunctionSpec& spec, const EigenTuple& lambda) {
  const EsfArray s = require_cone(spec, lambda);
  switch (spec.kind) {
    case FKind::SigmaK:
      return std::pow(s[spec.k], 1.0 / spec.k);
    case FKind::Quotient: {
      const double ratio = s[spec.k] / s[spec.l];  // S_0 = 1 covers l = 0
      return spec.scale * std::pow(ratio, spec.exponent);
    }
  }
  return 0.0;  // unreachable
}

std::array<double, kMaxDim> grad_f(const SymmetricFunctionSpec& spec,
                                   const EigenTuple& lambda) {
  const EsfArray s = require_cone(spec, lambda);
  const int n = spec.dim;
  std::array<double, kMaxDim> g{};
  if (spec.kind == FKind::SigmaK) {
    const double outer = std::pow(s[spec.k], 1.0 / spec.k - 1.0) / spec.k;
    for (int i = 0; i < n; ++i) {
      const EsfArray sub = esf_excluding(s, n, lambda[i]);
      g[static_cast<std::size_t>(i)] = outer * sub[spec.k - 1];
    }
    return g;
  }
  const double ratio = s[spec.k] / s[spec.l];
  const double outer = spec.scale * spec.exponent * std::pow(ratio, spec.exponent - 1.0);
  for (int i = 0; i < n; ++i) {
    const EsfArray sub = esf_excluding(s, n, lambda[i]);
    const double dk = sub[spec.k - 1];
    const double dl = spec.l >= 1 ? sub[spec.l - 1] : 0.0;
    g[static_cast<std::size_t>(i)] = outer * (dk * s[spec.l] - s[spec.k] * dl) / (s[spec.l] * s[spec.l]);
  }
  return g;
}

double f_infty_i(const SymmetricFunctionSpec& spec, const EigenTuple& lambda, int i) {
  const EsfArray s = require_cone(spec, lambda);
  if (spec.kind == FKind::SigmaK || spec.l == 0) return kInf;
  // S_k(.., R, ..)/S_l(.., R, ..) -> S_{k-1}(lambda\i)/S_{l-1}(lambda\i);
  // l >= 1 and k > l guarantee both indices exist.
  const EsfArray sub = esf_excluding(s, spec.dim, lambda[i]);
  const double ratio = sub[spec.k - 1] / sub[spec.l - 1];
  return spec.scale * std::pow(ratio, spec.exponent);
}

double f_infty(const SymmetricFunctionSpec& spec, const EigenTuple& lambda) {
  if (dichotomy_classify(spec) == FinftyClass::Infinite) {
    require_cone(spec, lambda);
    return kInf;
  }
  double m = f_infty_i(spec, lambda, 0);
  for (int i = 1; i < spec.dim; ++i) m = std::min(m, f_infty_i(spec, lambda, i));
#ifndef NDEBUG
  // Entries are sorted descending, so index 0 is the max entry; the min over
  // directions must agree with the drop-the-max form.
  const double drop_max = f_infty_i(spec, lambda, 0);
  assert(std::abs(m - drop_max) <= 1e-9 * (1.0 + std::abs(m)));
#endif
  return m;
}

FinftyClass dichotomy_classify(const SymmetricFunctionSpec& spec) {
  if (spec.kind == FKind::SigmaK || spec.l == 0) return FinftyClass::Infinite;
  return FinftyClass::Finite;
}

PointSample sample_f(const SymmetricFunctionSpec& spec, const double* lambda) noexcept {
  const int n = spec.dim;
  const EsfArray s = elementary_symmetric_all({lambda, static_cast<std::size_t>(n)});
  PointSample out;
  out.margin = s[1];
  for (int i = 2; i <= spec.k; ++i) out.margin = std::min(out.margin, s[i]);
  if (!(out.margin > 0.0)) {
    out.f = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (spec.kind == FKind::SigmaK)
    out.f = std::pow(s[spec.k], 1.0 / spec.k);
  else
    out.f = spec.scale * std::pow(s[spec.k] / s[spec.l], spec.exponent);
  return out;
}

void sample_grad(const SymmetricFunctionSpec& spec, const double* lambda,
                 double* df) noexcept {
  const int n = spec.dim;
  const EsfArray s = elementary_symmetric_all({lambda, static_cast<std::size_t>(n)});
  if (spec.kind == FKind::SigmaK) {
    const double outer = std::pow(s[spec.k], 1.0 / spec.k - 1.0) / spec.k;
    for (int i = 0; i < n; ++i) {
      const EsfArray sub = esf_excluding(s, n, lambda[i]);
      df[i] = outer * sub[spec.k - 1];
    }
    return;
  }
  const double ratio = s[spec.k] / s[spec.l];
  const double outer = spec.scale * spec.exponent * std::pow(ratio, spec.exponent - 1.0);
  for (int i = 0; i < n; ++i) {
    const EsfArray sub = esf_excluding(s, n, lambda[i]);
    const double dk = sub[spec.k - 1];
    const double dl = spec.l >= 1 ? sub[spec.l - 1] : 0.0;
    df[i] = outer * (dk * s[spec.l] - s[spec.k] * dl) / (s[spec.l] * s[spec.l]);
  }
}

double sample_f_infty(const SymmetricFunctionSpec& spec, const double* lambda) noexcept {
  if (spec.kind == FKind::SigmaK || spec.l == 0) return kInf;
  const int n = spec.dim;
  const EsfArray s = elementary_symmetric_all({lambda, static_cast<std::size_t>(n)});
  double best = kInf;
  for (int i = 0; i < n; ++i) {
    const EsfArray sub = esf_excluding(s, n, lambda[i]);
    const double v = spec.scale * std::pow(sub[spec.k - 1] / sub[spec.l - 1], spec.exponent);
    best = std::min(best, v);
  }
  return best;
}

namespace {

std::string strip_ws_lower(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return out;
}

/// "name(key=value,...)" -> name + key/value list. Values are numeric, with
/// "p/q" accepted for rationals.
struct SpecCall {
  std::string name;
  std::vector<std::pair<std::string, double>> args;
};

SpecCall parse_call(const std::string& text) {
  const std::string s = strip_ws_lower(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw ConfigError("malformed f spec '" + text + "': expected name(key=value,...)");
  SpecCall call;
  call.name = s.substr(0, open);
  std::string body = s.substr(open + 1, s.size() - open - 2);
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("malformed f spec argument '" + item + "' in '" + text + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double num = 0.0;
    const auto slash = val.find('/');
    try {
      if (slash != std::string::npos)
        num = std::stod(val.substr(0, slash)) / std::stod(val.substr(slash + 1));
      else
        num = std::stod(val);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value '" + val + "' in f spec '" + text + "'");
    }
    call.args.emplace_back(key, num);
  }
  return call;
}

double take_arg(SpecCall& call, const std::string& key, bool required, double fallback) {
  for (auto it = call.args.begin(); it != call.args.end(); ++it) {
    if (it->first == key) {
      const double v = it->second;
      call.args.erase(it);
      return v;
    }
  }
  if (required) throw ConfigError("f spec missing argument '" + key + "'");
  return fallback;
}

int as_int(double v, const std::string& key) {
  const int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-12) throw ConfigError("argument '" + key + "' must be an integer");
  return i;
}

}  // namespace

SymmetricFunctionSpec parse_fspec(const std::string& text, int dim) {
  SpecCall call = parse_call(text);
  SymmetricFunctionSpec spec;
  try {
    if (call.name == "sigma_k" || call.name == "sigmak") {
      const int k = as_int(take_arg(call, "k", true, 0), "k");
      spec = SymmetricFunctionSpec::sigma_k(k, dim);
    } else if (call.name == "quotient") {
      const int k = as_int(take_arg(call, "k", true, 0), "k");
      const int l = as_int(take_arg(call, "l", true, 0), "l");
      const double scale = take_arg(call, "scale", false, 1.0);
      const double exponent = take_arg(call, "exponent", false,
                                       k > l ? 1.0 / (k - l) : 0.0);
      spec = SymmetricFunctionSpec::quotient(k, l, scale, dim);
      if (std::abs(exponent - spec.exponent) > 1e-12)
        throw ConfigError("quotient exponent must be 1/(k-l); got " + text);
    } else {
      throw ConfigError("unknown f spec '" + call.name + "'");
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("invalid f spec '") + text + "': " + e.what());
  }
  if (!call.args.empty())
    throw ConfigError("unknown f spec argument '" + call.args.front().first + "' in '" + text + "'");
  return spec;
}

std::string to_string(const SymmetricFunctionSpec& spec) {
  std::ostringstream out;
  if (spec.kind == FKind::SigmaK) {
    out << "sigma_k(k=" << spec.k << ")";
  } else {
    out << "quotient(k=" << spec.k << ",l=" << spec.l << ",exponent=";
    if (spec.k - spec.l == 1)
      out << 1;
    else
      out << "1/" << (spec.k - spec.l);
    out << ",scale=" << spec.scale << ")";
  }
  return out.str();
}

}  // namespace slope
