#pragma once

#include <map>
#include <string>

#include "slope/continuity.hpp"
#include "slope/jequation.hpp"

namespace slope {

/// Parsed run configuration: a line-oriented key = value format with
/// [section] headers, strict schema (unknown sections or keys rejected).
/// Sections: [grid], [fields], [equation], [solver], [outputs].
struct RunConfig {
  // [grid]
  GridKind kind = GridKind::RealRiemannian;
  int n = 2;
  int N = 0;  // 0 resolves to 64, or 16 on complex grids of dimension >= 2

  // [fields]
  std::string psi_expr = "0";
  bool psi_manufactured = false;  // psi := log F[u_ref] (config convention)
  std::string u0_expr;            // seed; empty means 0
  std::string u_ref_expr;         // reference/manufactured solution
  std::map<std::string, std::string> tensor_entries;  // g_11 / theta_12 / omega_11 / chi_12_re ...

  // [equation]
  std::string f_string = "sigma_k(k=2)";
  bool j_equation = false;
  bool det_form = false;

  // [solver]
  SolveOptions solver;
  int fd_order = 2;
  unsigned seed = 0;
  int budget = 400;
  int modes = 4;
  int restarts = 0;
  bool slope_solve = true;

  // [outputs]
  std::string out_dir = "out";
  bool dump_fields = false;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Everything run-ready built from a config. For j-equation configs,
/// `instance` is the reduced quotient problem and `j` holds the original
/// forms; `solved_psi_factor` folds the det-form conversion back
/// (c_config = c_instance * factor, with factor -1 for the J-equation).
struct BuiltProblem {
  TorusGrid grid;
  ProblemInstance instance;
  ScalarField u0;
  ScalarField u_ref;  // empty values when absent
  bool has_u_ref = false;
  double c_factor = 1.0;  // c_config = c_factor * c_instance
  bool is_j = false;
  JInstance j;
  std::vector<std::string> warnings;
};

BuiltProblem build_problem(const RunConfig& config);

}  // namespace slope
