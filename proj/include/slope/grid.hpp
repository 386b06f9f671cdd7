#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slope/errors.hpp"
#include "slope/symfunc.hpp"

namespace slope {

enum class GridKind : std::uint8_t { RealRiemannian = 0, ComplexHermitian = 1 };

/// Flat periodic uniform grid on the unit torus. For ComplexHermitian the
/// real dimension is 2n, coordinates interleaved (x_1, y_1, ..., x_n, y_n);
/// expression variables x1..x_{2n} bind the real axes in that order.
struct TorusGrid {
  GridKind kind = GridKind::RealRiemannian;
  int n = 2;           // eigenvalue-tuple length (complex dimension when hermitian)
  int resolution = 8;  // N, per axis

  static constexpr std::size_t kNodeCap = std::size_t{1} << 26;

  TorusGrid() = default;
  TorusGrid(GridKind kind, int n, int resolution);

  int real_dim() const { return kind == GridKind::RealRiemannian ? n : 2 * n; }
  double spacing() const { return 1.0 / resolution; }
  std::size_t node_count() const;

  std::size_t stride(int axis) const;  // axis real_dim()-1 is fastest
  int coord_index(std::size_t node, int axis) const;
  double coord(std::size_t node, int axis) const {
    return static_cast<double>(coord_index(node, axis)) / resolution;
  }
  /// Periodic neighbor along an axis; |delta| <= resolution.
  std::size_t shift(std::size_t node, int axis, int delta) const;

  bool operator==(const TorusGrid&) const = default;
};

struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(g.node_count(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Dense hermitian (or real symmetric) matrix of small fixed capacity; the
/// working type for per-node kernels.
struct HermMat {
  int n = 0;
  std::array<std::complex<double>, kMaxDim * kMaxDim> a{};

  static HermMat zero(int n) { return HermMat{n, {}}; }
  static HermMat identity(int n);

  std::complex<double>& at(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  const std::complex<double>& at(int i, int j) const {
    return a[static_cast<std::size_t>(i * n + j)];
  }
  double frobenius_norm() const;
};

/// Pointwise symmetric (RealRiemannian) or hermitian (ComplexHermitian)
/// n x n matrix field. Packed per node as n real diagonal entries followed by
/// the strict upper triangle row-major as (re, im) pairs: n^2 doubles/node.
class SymTensorField {
 public:
  SymTensorField() = default;
  explicit SymTensorField(const TorusGrid& g);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return n_; }
  std::size_t packed_size() const { return static_cast<std::size_t>(n_) * n_; }

  HermMat node(std::size_t p) const;
  /// Stores a matrix, checking hermitian-ness (symmetry) to 1e-12 relative
  /// and, on real grids, that imaginary parts vanish to the same tolerance.
  void set_node(std::size_t p, const HermMat& m);
  /// Stores without the symmetry check; for kernels that construct
  /// exactly-symmetric output.
  void set_node_unchecked(std::size_t p, const HermMat& m);

  double* raw(std::size_t p) { return data_.data() + p * packed_size(); }
  const double* raw(std::size_t p) const { return data_.data() + p * packed_size(); }

  /// Max deviation of any node from node 0's entries; 0 means constant.
  double constancy_defect() const;

 private:
  TorusGrid grid_;
  int n_ = 0;
  std::vector<double> data_;
};

/// Per-node eigenvalue tuples, each sorted descending.
struct EigenField {
  TorusGrid grid;
  int n = 0;
  std::vector<double> values;  // node-major, n per node

  EigenField() = default;
  explicit EigenField(const TorusGrid& g)
      : grid(g), n(g.n), values(g.node_count() * static_cast<std::size_t>(g.n)) {}

  EigenTuple node(std::size_t p) const;
  double* raw(std::size_t p) { return values.data() + p * static_cast<std::size_t>(n); }
  const double* raw(std::size_t p) const {
    return values.data() + p * static_cast<std::size_t>(n);
  }
};

/// Field dump format: magic "SLOPE1", kind (u8), n (u8), N (u32 LE),
/// payload length in bytes (u64 LE), then row-major 64-bit LE floats.
void write_field(std::ostream& out, const ScalarField& f);
ScalarField read_field(std::istream& in);
void write_field_file(const std::string& path, const ScalarField& f);
ScalarField read_field_file(const std::string& path);

}  // namespace slope
