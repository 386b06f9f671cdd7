#pragma once

#include <vector>

#include "slope/grid.hpp"

namespace slope {

/// FFT-backed solver for the constant-coefficient discrete Poisson problem
/// on the torus: given rhs, returns the mean-zero z with alpha * L_h z =
/// rhs - mean(rhs), where L_h is the second-difference Laplacian matching
/// the configured stencil order. Used only as a Krylov preconditioner; the
/// variable-coefficient operator itself stays matrix-free.
class PoissonPreconditioner {
 public:
  PoissonPreconditioner(const TorusGrid& grid, int fd_order);
  ~PoissonPreconditioner();

  PoissonPreconditioner(const PoissonPreconditioner&) = delete;
  PoissonPreconditioner& operator=(const PoissonPreconditioner&) = delete;

  void solve(double alpha, const double* rhs, double* out) const;

 private:
  TorusGrid grid_;
  std::vector<double> symbol_;  // eigenvalues of L_h per Fourier index
  void* fwd_plan_ = nullptr;
  void* bwd_plan_ = nullptr;
  void* buffer_ = nullptr;  // fftw_complex scratch
};

}  // namespace slope
