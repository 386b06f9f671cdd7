#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "slope/runner.hpp"

using namespace slope;

namespace {

const char* kTrivial = R"(
# trivial identity instance
[grid]
kind = real
n = 2
N = 16

[fields]
psi = 0

[equation]
f = sigma_k(k=2)

[outputs]
dir = OUTDIR
dump_fields = true
)";

std::string with_dir(const std::string& text, const std::string& dir) {
  std::string out = text;
  const auto at = out.find("OUTDIR");
  out.replace(at, 6, dir);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config parsing basics") {
  const RunConfig cfg = parse_config_text(with_dir(kTrivial, "/tmp/slope_cfg_test"));
  CHECK(cfg.kind == GridKind::RealRiemannian);
  CHECK(cfg.n == 2);
  CHECK(cfg.N == 16);
  CHECK(cfg.psi_expr == "0");
  CHECK(cfg.f_string == "sigma_k(k=2)");
  CHECK(cfg.dump_fields);
}

TEST_CASE("strict schema rejects unknown keys and sections") {
  CHECK_THROWS_AS(parse_config_text("[grid]\nkind = real\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonsense]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[fields]\npotato_11 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("key_outside = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nN 16\n"), ConfigError);
  // real grids reject hermitian parts and omega/chi prefixes
  CHECK_THROWS_AS(build_problem(parse_config_text(
                      "[grid]\nkind = real\nn = 2\nN = 8\n[fields]\npsi = 0\nomega_11 = 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(build_problem(parse_config_text(
                      "[grid]\nkind = real\nn = 2\nN = 8\n[fields]\npsi = 0\ng_12_im = 1\n")),
                  ConfigError);
}

TEST_CASE("bad field expression maps to the config exit code") {
  // x9 in a 2-dimensional field expression
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = real\nn = 2\nN = 8\n[fields]\npsi = sin(x9)\n[equation]\nf = "
      "sigma_k(k=2)\n[outputs]\ndir = /tmp/slope_cfg_x9\n");
  std::ostringstream diag;
  CHECK(run_solve(cfg, diag) == kExitConfigError);
  CHECK(diag.str().find("x9") != std::string::npos);
}

TEST_CASE("run_solve writes a schema-1 report with trace and dumps") {
  const std::string dir = "/tmp/slope_cfg_run";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = parse_config_text(with_dir(kTrivial, dir));
  std::ostringstream diag;
  const int code = run_solve(cfg, diag);
  CHECK(code == kExitOk);
  const std::string report = slurp(dir + "/report.json");
  CHECK(report.find("\"schema\": 1") != std::string::npos);
  CHECK(report.find("\"status\": \"converged\"") != std::string::npos);
  CHECK(report.find("\"config\"") != std::string::npos);  // resolved config embedded
  CHECK(std::filesystem::exists(dir + "/trace.csv"));
  CHECK(std::filesystem::exists(dir + "/u.field"));
  CHECK(std::filesystem::exists(dir + "/psi.field"));
  const ScalarField u = read_field_file(dir + "/u.field");
  CHECK(u.grid.resolution == 16);
}

TEST_CASE("identical configs produce bit-identical reports") {
  const std::string dir_a = "/tmp/slope_cfg_det_a";
  const std::string dir_b = "/tmp/slope_cfg_det_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  const std::string text =
      "[grid]\nkind = real\nn = 2\nN = 16\n[fields]\npsi = 0.2*sin(2*pi*x1)\n"
      "[equation]\nf = sigma_k(k=2)\ndet_form = true\n[solver]\nseed = 0\n"
      "[outputs]\ndir = ";
  std::ostringstream diag;
  CHECK(run_solve(parse_config_text(text + dir_a + "\n"), diag) == kExitOk);
  CHECK(run_solve(parse_config_text(text + dir_b + "\n"), diag) == kExitOk);
  std::string ra = slurp(dir_a + "/report.json");
  std::string rb = slurp(dir_b + "/report.json");
  // the embedded output dir is the only allowed difference
  const auto strip = [](std::string s, const std::string& dir) {
    const auto at = s.find(dir);
    s.erase(at, dir.size());
    return s;
  };
  CHECK(strip(ra, dir_a) == strip(rb, dir_b));
}

TEST_CASE("manufactured config reports the recovery error") {
  const std::string dir = "/tmp/slope_cfg_manu";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = real\nn = 2\nN = 16\n"
      "[fields]\npsi = manufactured\nu_ref = 0.004*sin(2*pi*x1)*cos(2*pi*x2)\n"
      "[equation]\nf = sigma_k(k=2)\n[outputs]\ndir = " + dir + "\n");
  std::ostringstream diag;
  CHECK(run_solve(cfg, diag) == kExitOk);
  const std::string report = slurp(dir + "/report.json");
  CHECK(report.find("manufactured_error") != std::string::npos);
  // discrete-psi manufactured solutions are recovered to solver tolerance
  const auto at = report.find("\"manufactured_error\": ");
  const double err = std::stod(report.substr(at + 23));
  CHECK(err < 1e-8);
}

TEST_CASE("psi = manufactured without u_ref is a config error") {
  CHECK_THROWS_AS(build_problem(parse_config_text(
                      "[grid]\nkind = real\nn = 2\nN = 8\n[fields]\npsi = manufactured\n")),
                  ConfigError);
}

TEST_CASE("inadmissible seed is a config error with diagnostics") {
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = real\nn = 2\nN = 32\n"
      "[fields]\npsi = 0\nu0 = 0.05*sin(2*pi*x1)\n"
      "[equation]\nf = sigma_k(k=2)\n[outputs]\ndir = /tmp/slope_cfg_seed\n");
  std::ostringstream diag;
  CHECK(run_solve(cfg, diag) == kExitConfigError);
  CHECK(diag.str().find("admissible") != std::string::npos);
}

TEST_CASE("hermitian tensor entries build correctly") {
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = complex\nn = 2\nN = 8\n"
      "[fields]\npsi = 0\nchi_11 = 2\nchi_22 = 2\nchi_12_re = 0.25\nchi_12_im = 0.1\n"
      "[equation]\nf = j-equation\n[outputs]\ndir = /tmp/slope_cfg_herm\n");
  const BuiltProblem built = build_problem(cfg);
  const HermMat chi = built.j.chi.node(0);
  CHECK(chi.at(0, 0).real() == 2.0);
  CHECK(chi.at(0, 1) == std::complex<double>(0.25, 0.1));
  CHECK(chi.at(1, 0) == std::complex<double>(0.25, -0.1));
  // reduced instance flips the exponent sign and uses the J normalization
  CHECK(built.is_j);
  CHECK(built.c_factor == -1.0);
  CHECK(built.instance.fspec.scale == doctest::Approx(2.0));
}

TEST_CASE("verify battery on a trivial instance") {
  const std::string dir = "/tmp/slope_cfg_verify";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = real\nn = 2\nN = 16\n[fields]\npsi = 0\n"
      "[equation]\nf = sigma_k(k=2)\n[solver]\nbudget = 60\n[outputs]\ndir = " + dir + "\n");
  std::ostringstream diag;
  CHECK(run_verify(cfg, diag) == kExitOk);
  const std::string report = slurp(dir + "/report.json");
  // Infinite variant: condition (3) auto-passes with margin +inf
  CHECK(report.find("\"condition3\"") != std::string::npos);
  CHECK(report.find("\"margin\": \"inf\"") != std::string::npos);
  CHECK(report.find("\"uniqueness\"") != std::string::npos);

  // corrupted-trace injection makes the bound verdict fail
  std::ostringstream diag2;
  CHECK(run_verify(cfg, diag2, /*inject_ct_corruption=*/true) == kExitVerdictFail);
  CHECK(diag2.str().find("FAIL ct_bounds") != std::string::npos);
}

TEST_CASE("verify battery on a solvable J-instance") {
  const std::string dir = "/tmp/slope_cfg_verify_j";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = complex\nn = 2\nN = 8\n[fields]\npsi = 0.2*sin(2*pi*x1)\n"
      "chi_11 = 2\nchi_22 = 2\n[equation]\nf = j-equation\n[solver]\nbudget = 150\n"
      "modes = 2\n[outputs]\ndir = " + dir + "\n");
  std::ostringstream diag;
  CHECK(run_verify(cfg, diag) == kExitOk);
  CHECK(diag.str().find("FAIL") == std::string::npos);
}

TEST_CASE("variable metric on a real grid is flagged") {
  const std::string dir = "/tmp/slope_cfg_warn";
  std::filesystem::remove_all(dir);
  const RunConfig cfg = parse_config_text(
      "[grid]\nkind = real\nn = 2\nN = 16\n"
      "[fields]\npsi = 0\ng_11 = 1 + 0.1*sin(2*pi*x1)\n"
      "[equation]\nf = sigma_k(k=1)\n[outputs]\ndir = " + dir + "\n");
  const BuiltProblem built = build_problem(cfg);
  REQUIRE(built.warnings.size() == 1);
  CHECK(built.warnings[0].find("Christoffel") != std::string::npos);
  std::ostringstream diag;
  CHECK(run_solve(cfg, diag) == kExitOk);
  CHECK(slurp(dir + "/report.json").find("warnings") != std::string::npos);
}

TEST_CASE("reports are bit-identical across data-parallel widths") {
  // SLOPE_THREADS is read once per process, so drive the installed CLI
  const char* cli = std::getenv("SLOPE_CLI");
  if (cli == nullptr) return;  // only meaningful under ctest
  const std::string dir_a = "/tmp/slope_cfg_threads_a";
  const std::string dir_b = "/tmp/slope_cfg_threads_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
  const std::string base =
      "[grid]\nkind = real\nn = 2\nN = 32\n[fields]\npsi = 0.25*sin(2*pi*x1)\n"
      "[equation]\nf = sigma_k(k=2)\ndet_form = true\n[outputs]\ndir = ";
  std::ofstream("/tmp/slope_threads_a.cfg") << base << dir_a << "\n";
  std::ofstream("/tmp/slope_threads_b.cfg") << base << dir_b << "\n";
  REQUIRE(std::system((std::string("SLOPE_THREADS=1 ") + cli +
                       " solve /tmp/slope_threads_a.cfg > /dev/null 2>&1")
                          .c_str()) == 0);
  REQUIRE(std::system((std::string("SLOPE_THREADS=2 ") + cli +
                       " solve /tmp/slope_threads_b.cfg > /dev/null 2>&1")
                          .c_str()) == 0);
  const auto strip = [](std::string s, const std::string& dir) {
    const auto at = s.find(dir);
    s.erase(at, dir.size());
    return s;
  };
  CHECK(strip(slurp(dir_a + "/report.json"), dir_a) ==
        strip(slurp(dir_b + "/report.json"), dir_b));
  CHECK(slurp(dir_a + "/trace.csv") == slurp(dir_b + "/trace.csv"));
}

TEST_CASE("finfty subcommand output") {
  std::ostringstream out;
  CHECK(run_finfty("quotient(k=2,l=1,exponent=1,scale=2)", "1,3", out) == kExitOk);
  const std::string text = out.str();
  CHECK(text.find("in_cone = true") != std::string::npos);
  CHECK(text.find("f = 1.5") != std::string::npos);
  CHECK(text.find("f_infty = 2") != std::string::npos);
  CHECK(text.find("dichotomy = finite") != std::string::npos);

  std::ostringstream out2;
  CHECK(run_finfty("sigma_k(k=2)", "1,1", out2) == kExitOk);
  CHECK(out2.str().find("f_infty = inf") != std::string::npos);

  std::ostringstream out3;
  CHECK(run_finfty("sigma_k(k=9)", "1,1", out3) == kExitConfigError);
}
