#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "slope/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "slope: solves f(lambda(theta + hess u)) = e^{psi+c} on flat periodic tori,\n"
      "estimates the sup-slope invariant and checks sub-solution certificates"};
  app.require_subcommand(1);

  std::string cfg_path;
  bool corrupt_trace = false;

  CLI::App* solve = app.add_subcommand("solve", "run the continuity-method solver");
  solve->add_option("config", cfg_path, "config file")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "solve, then run the equivalence-check battery");
  verify->add_option("config", cfg_path, "config file")->required();
  verify->add_flag("--inject-ct-corruption", corrupt_trace,
                   "test mode: corrupt the c_t trace before the bound check");

  CLI::App* slope_cmd = app.add_subcommand("slope", "sup-slope estimators");
  slope_cmd->add_option("config", cfg_path, "config file")->required();

  std::string spec_string, lambda_csv;
  CLI::App* finfty = app.add_subcommand(
      "finfty", "evaluate f, grad f, f_infty and the cone verdict at a point");
  finfty->add_option("spec", spec_string, "f spec, e.g. quotient(k=2,l=1,exponent=1,scale=2)")
      ->required();
  finfty->add_option("lambda", lambda_csv, "comma-separated eigenvalues")->required();

  app.add_subcommand("selftest", "run the built-in property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      slope::RunConfig cfg = slope::parse_config_file(cfg_path);
      return slope::run_solve(cfg, std::cerr);
    }
    if (verify->parsed()) {
      slope::RunConfig cfg = slope::parse_config_file(cfg_path);
      return slope::run_verify(cfg, std::cerr, corrupt_trace);
    }
    if (slope_cmd->parsed()) {
      slope::RunConfig cfg = slope::parse_config_file(cfg_path);
      return slope::run_slope_cmd(cfg, std::cerr);
    }
    if (finfty->parsed()) return slope::run_finfty(spec_string, lambda_csv, std::cout);
    return slope::run_selftest(std::cout);
  } catch (const slope::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return slope::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
