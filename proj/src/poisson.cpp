#include "slope/poisson.hpp"

#include <fftw3.h>

#include <cmath>

namespace slope {

PoissonPreconditioner::PoissonPreconditioner(const TorusGrid& grid, int fd_order)
    : grid_(grid) {
  const int d = grid.real_dim();
  const int N = grid.resolution;
  const std::size_t count = grid.node_count();
  const double h2 = grid.spacing() * grid.spacing();

  // 1D symbol of the second-difference operator at wavenumber k:
  //   order 2: (2 cos(2 pi k / N) - 2) / h^2
  //   order 4: (-2 cos(4 pi k / N) + 32 cos(2 pi k / N) - 30) / (12 h^2)
  std::vector<double> sym1d(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const double c1 = std::cos(2.0 * M_PI * k / N);
    if (fd_order == 2)
      sym1d[static_cast<std::size_t>(k)] = (2.0 * c1 - 2.0) / h2;
    else
      sym1d[static_cast<std::size_t>(k)] =
          (-2.0 * std::cos(4.0 * M_PI * k / N) + 32.0 * c1 - 30.0) / (12.0 * h2);
  }

  symbol_.assign(count, 0.0);
  for (std::size_t p = 0; p < count; ++p) {
    double s = 0.0;
    std::size_t rem = p;
    for (int a = d - 1; a >= 0; --a) {
      const int k = static_cast<int>(rem % static_cast<std::size_t>(N));
      rem /= static_cast<std::size_t>(N);
      s += sym1d[static_cast<std::size_t>(k)];
    }
    symbol_[p] = s;
  }

  buffer_ = fftw_alloc_complex(count);
  std::vector<int> dims(static_cast<std::size_t>(d), N);
  auto* buf = static_cast<fftw_complex*>(buffer_);
  fwd_plan_ = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_plan_ = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

PoissonPreconditioner::~PoissonPreconditioner() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_plan_));
  fftw_free(buffer_);
}

void PoissonPreconditioner::solve(double alpha, const double* rhs, double* out) const {
  const std::size_t count = grid_.node_count();
  auto* buf = static_cast<fftw_complex*>(buffer_);
  for (std::size_t p = 0; p < count; ++p) {
    buf[p][0] = rhs[p];
    buf[p][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(fwd_plan_));
  buf[0][0] = 0.0;  // drop the mean mode; output is mean-zero
  buf[0][1] = 0.0;
  for (std::size_t p = 1; p < count; ++p) {
    const double denom = alpha * symbol_[p];
    if (denom != 0.0) {
      buf[p][0] /= denom;
      buf[p][1] /= denom;
    } else {
      buf[p][0] = 0.0;
      buf[p][1] = 0.0;
    }
  }
  fftw_execute(static_cast<fftw_plan>(bwd_plan_));
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t p = 0; p < count; ++p) out[p] = buf[p][0] * scale;
}

}  // namespace slope
