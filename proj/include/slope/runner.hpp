#pragma once

#include <iosfwd>
#include <string>

#include "slope/config.hpp"

namespace slope {

/// Exit codes shared by the CLI: 0 success, 1 verdict failure, 2 continuity
/// failure, 3 config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitContinuityFailure = 2;
inline constexpr int kExitConfigError = 3;

int run_solve(const RunConfig& config, std::ostream& diag);
int run_verify(const RunConfig& config, std::ostream& diag, bool inject_ct_corruption = false);
int run_slope_cmd(const RunConfig& config, std::ostream& diag);

/// Prints f, grad f, f_infty, cone verdict and the dichotomy class for a
/// spec string and a comma-separated eigenvalue tuple.
int run_finfty(const std::string& spec_string, const std::string& lambda_csv,
               std::ostream& out);

/// Built-in property suites at desk scale; prints one line per suite.
int run_selftest(std::ostream& out);

}  // namespace slope
