#include "slope/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace slope {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_bool(const std::string& v, const std::string& key) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  }
}

int parse_int(const std::string& v, const std::string& key) {
  const double d = parse_num(v, key);
  const int i = static_cast<int>(std::lround(d));
  if (std::abs(d - i) > 1e-12) throw ConfigError("key '" + key + "' expects an integer");
  return i;
}

/// Tensor entry keys: <prefix>_<i><j> with 1 <= i <= j <= n, plus _re/_im
/// for hermitian off-diagonal entries. Diagonal entries are real.
struct TensorKey {
  std::string prefix;
  int i = 0, j = 0;
  bool imag = false;
};

bool parse_tensor_key(const std::string& key, TensorKey& out) {
  const auto us = key.find('_');
  if (us == std::string::npos) return false;
  out.prefix = key.substr(0, us);
  std::string rest = key.substr(us + 1);
  bool has_part = false;
  if (rest.size() > 3 && rest.substr(rest.size() - 3) == "_re") {
    rest = rest.substr(0, rest.size() - 3);
    out.imag = false;
    has_part = true;
  } else if (rest.size() > 3 && rest.substr(rest.size() - 3) == "_im") {
    rest = rest.substr(0, rest.size() - 3);
    out.imag = true;
    has_part = true;
  }
  if (rest.size() != 2 || !std::isdigit(static_cast<unsigned char>(rest[0])) ||
      !std::isdigit(static_cast<unsigned char>(rest[1])))
    return false;
  out.i = rest[0] - '0';
  out.j = rest[1] - '0';
  if (!has_part) out.imag = false;
  return true;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section != "grid" && section != "fields" && section != "equation" &&
          section != "solver" && section != "outputs")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    // Keys are case-sensitive ([grid] n and N differ); values that name
    // enums or booleans are matched case-insensitively.
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");

    if (section == "grid") {
      if (key == "kind") {
        const std::string v = lower(value);
        if (v == "real")
          cfg.kind = GridKind::RealRiemannian;
        else if (v == "complex")
          cfg.kind = GridKind::ComplexHermitian;
        else
          throw ConfigError("grid kind must be real or complex, got '" + value + "'");
      } else if (key == "n") {
        cfg.n = parse_int(value, key);
      } else if (key == "N") {
        cfg.N = parse_int(value, key);
      } else {
        throw ConfigError("unknown [grid] key '" + key + "'");
      }
    } else if (section == "fields") {
      if (key == "psi") {
        if (lower(value) == "manufactured")
          cfg.psi_manufactured = true;
        else
          cfg.psi_expr = value;
      } else if (key == "u0") {
        cfg.u0_expr = value;
      } else if (key == "u_ref") {
        cfg.u_ref_expr = value;
      } else {
        TensorKey tk;
        if (!parse_tensor_key(key, tk))
          throw ConfigError("unknown [fields] key '" + key + "'");
        cfg.tensor_entries[key] = value;
      }
    } else if (section == "equation") {
      if (key == "f") {
        if (lower(value) == "j-equation")
          cfg.j_equation = true;
        else
          cfg.f_string = value;
      } else if (key == "det_form") {
        cfg.det_form = parse_bool(value, key);
      } else {
        throw ConfigError("unknown [equation] key '" + key + "'");
      }
    } else if (section == "solver") {
      if (key == "tol")
        cfg.solver.tol = parse_num(value, key);
      else if (key == "max_newton")
        cfg.solver.max_newton = parse_int(value, key);
      else if (key == "lin_iters")
        cfg.solver.lin_iters = parse_int(value, key);
      else if (key == "krylov_forcing")
        cfg.solver.krylov_forcing = parse_num(value, key);
      else if (key == "dt_init")
        cfg.solver.dt_init = parse_num(value, key);
      else if (key == "min_dt")
        cfg.solver.min_dt = parse_num(value, key);
      else if (key == "margin_floor")
        cfg.solver.margin_floor = parse_num(value, key);
      else if (key == "fd_order")
        cfg.fd_order = parse_int(value, key);
      else if (key == "seed")
        cfg.seed = static_cast<unsigned>(parse_int(value, key));
      else if (key == "budget")
        cfg.budget = parse_int(value, key);
      else if (key == "modes")
        cfg.modes = parse_int(value, key);
      else if (key == "restarts")
        cfg.restarts = parse_int(value, key);
      else if (key == "slope_solve")
        cfg.slope_solve = parse_bool(value, key);
      else
        throw ConfigError("unknown [solver] key '" + key + "'");
    } else if (section == "outputs") {
      if (key == "dir")
        cfg.out_dir = value;
      else if (key == "dump_fields")
        cfg.dump_fields = parse_bool(value, key);
      else
        throw ConfigError("unknown [outputs] key '" + key + "'");
    }
  }
  if (cfg.N == 0)
    cfg.N = (cfg.kind == GridKind::ComplexHermitian && cfg.n >= 2) ? 16 : 64;
  // Tensor prefixes depend on the grid kind, so validate after the whole
  // file is read (sections may come in any order).
  const bool complex_grid = cfg.kind == GridKind::ComplexHermitian;
  const std::string pa = complex_grid ? "omega" : "g";
  const std::string pb = complex_grid ? "chi" : "theta";
  for (const auto& [key, value] : cfg.tensor_entries) {
    (void)value;
    TensorKey tk;
    parse_tensor_key(key, tk);
    if (tk.prefix != pa && tk.prefix != pb)
      throw ConfigError("unknown [fields] key '" + key + "' (expected " + pa + "_* or " +
                        pb + "_* for this grid kind)");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

ScalarField field_from_expr(const std::string& expr, const TorusGrid& grid) {
  const ExprAst ast = ExprAst::parse(expr);
  return eval_on_grid(ast, grid);
}

/// Builds a tensor field from config entries with identity defaults.
SymTensorField build_tensor(const RunConfig& cfg, const TorusGrid& grid,
                            const std::string& prefix) {
  const int n = grid.n;
  struct Entry {
    int i, j;
    bool imag;
    ScalarField field;
  };
  std::vector<Entry> entries;
  for (const auto& [key, expr] : cfg.tensor_entries) {
    TensorKey tk;
    if (!parse_tensor_key(key, tk) || tk.prefix != prefix) continue;
    if (tk.i < 1 || tk.j < 1 || tk.i > n || tk.j > n || tk.i > tk.j)
      throw ConfigError("tensor key '" + key + "': indices must satisfy 1 <= i <= j <= " +
                        std::to_string(n));
    if (tk.imag && tk.i == tk.j)
      throw ConfigError("tensor key '" + key + "': diagonal entries are real");
    if (tk.imag && grid.kind == GridKind::RealRiemannian)
      throw ConfigError("tensor key '" + key + "': _im parts require a complex grid");
    entries.push_back(Entry{tk.i, tk.j, tk.imag, field_from_expr(expr, grid)});
  }
  SymTensorField out(grid);
  for_each_index(grid.node_count(), [&](std::size_t p) {
    HermMat m = HermMat::identity(n);
    for (const Entry& e : entries) {
      const double v = e.field[p];
      auto& upper = m.at(e.i - 1, e.j - 1);
      if (e.i == e.j) {
        upper = v;
      } else {
        upper = e.imag ? std::complex<double>(upper.real(), v)
                       : std::complex<double>(v, upper.imag());
        m.at(e.j - 1, e.i - 1) = std::conj(upper);
      }
    }
    // identity default leaves off-diagonal zero unless configured
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (m.at(j, i) != std::conj(m.at(i, j))) m.at(j, i) = std::conj(m.at(i, j));
    out.set_node_unchecked(p, m);
  });
  return out;
}

void check_tensor_prefixes(const RunConfig& cfg, const std::string& a, const std::string& b) {
  for (const auto& [key, expr] : cfg.tensor_entries) {
    (void)expr;
    TensorKey tk;
    if (!parse_tensor_key(key, tk))
      throw ConfigError("unknown [fields] key '" + key + "'");
    if (tk.prefix != a && tk.prefix != b)
      throw ConfigError("tensor prefix '" + tk.prefix + "' not valid for this grid kind (expected " +
                        a + " or " + b + ")");
  }
}

}  // namespace

BuiltProblem build_problem(const RunConfig& cfg) {
  BuiltProblem built;
  built.grid = TorusGrid(cfg.kind, cfg.n, cfg.N);
  const TorusGrid& grid = built.grid;

  const bool complex_grid = cfg.kind == GridKind::ComplexHermitian;
  if (cfg.j_equation && !complex_grid)
    throw ConfigError("f = j-equation requires grid kind = complex");
  check_tensor_prefixes(cfg, complex_grid ? "omega" : "g", complex_grid ? "chi" : "theta");

  const SymTensorField metric = build_tensor(cfg, grid, complex_grid ? "omega" : "g");
  const SymTensorField theta = build_tensor(cfg, grid, complex_grid ? "chi" : "theta");

  built.u0 = cfg.u0_expr.empty() ? ScalarField(grid, 0.0) : field_from_expr(cfg.u0_expr, grid);
  built.has_u_ref = !cfg.u_ref_expr.empty();
  if (built.has_u_ref) built.u_ref = field_from_expr(cfg.u_ref_expr, grid);
  if (cfg.psi_manufactured && !built.has_u_ref)
    throw ConfigError("psi = manufactured requires a u_ref expression");

  ScalarField psi = cfg.psi_manufactured ? ScalarField(grid, 0.0)
                                         : field_from_expr(cfg.psi_expr, grid);

  if (cfg.j_equation) {
    built.is_j = true;
    built.j = JInstance{grid, metric, theta, psi, cfg.fd_order};
    built.instance = reduce_to_quotient(built.j);
    built.c_factor = -1.0;
    if (cfg.psi_manufactured) {
      // wedge ratio of chi_{u_ref} is 1/F_reduced[u_ref]
      const ScalarField f = apply_F(built.instance, built.u_ref);
      for_each_index(grid.node_count(), [&](std::size_t p) {
        built.j.psi[p] = -std::log(f[p]);
        built.instance.psi[p] = std::log(f[p]);
      });
    }
  } else {
    ProblemInstance inst;
    inst.grid = grid;
    inst.metric = metric;
    inst.theta = theta;
    inst.psi = psi;
    inst.fspec = parse_fspec(cfg.f_string, grid.n);
    inst.fd_order = cfg.fd_order;
    inst.validate();
    if (cfg.det_form) {
      built.c_factor = grid.n;
      built.instance = make_det_form_instance(inst);
      if (cfg.psi_manufactured) {
        const ScalarField f = apply_F(built.instance, built.u_ref);
        for_each_index(grid.node_count(),
                       [&](std::size_t p) { built.instance.psi[p] = std::log(f[p]); });
      }
    } else {
      built.instance = inst;
      if (cfg.psi_manufactured) {
        const ScalarField f = apply_F(built.instance, built.u_ref);
        for_each_index(grid.node_count(),
                       [&](std::size_t p) { built.instance.psi[p] = std::log(f[p]); });
      }
    }
  }

  if (grid.kind == GridKind::RealRiemannian &&
      built.instance.metric.constancy_defect() > 1e-14)
    built.warnings.push_back(
        "variable metric on a real grid: the coordinate hessian omits Christoffel "
        "corrections; eigenvalues remain relative to g");

  // Admissibility of the seed is the caller's contract; check early for a
  // clear diagnostic.
  const AdmissibilityReport rep = admissible(built.instance, built.u0);
  if (!rep.admissible)
    throw ConfigError("seed u0 is not admissible (worst node " +
                      std::to_string(rep.worst_node) + ", margin " +
                      std::to_string(rep.margin) + ")");
  return built;
}

}  // namespace slope
