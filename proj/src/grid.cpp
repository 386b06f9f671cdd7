#include "slope/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace slope {

TorusGrid::TorusGrid(GridKind kind_, int n_, int resolution_)
    : kind(kind_), n(n_), resolution(resolution_) {
  if (n < 1 || n > kMaxDim || real_dim() > kMaxDim)
    throw ConfigError("grid eigen dimension out of range: n = " + std::to_string(n));
  if (resolution < 8)
    throw ConfigError("grid resolution must be >= 8, got " + std::to_string(resolution));
  double count = 1.0;
  for (int a = 0; a < real_dim(); ++a) count *= resolution;
  if (count > static_cast<double>(kNodeCap))
    throw ConfigError("grid exceeds node cap 2^26: N = " + std::to_string(resolution) +
                      ", real dim " + std::to_string(real_dim()));
}

std::size_t TorusGrid::node_count() const {
  std::size_t count = 1;
  for (int a = 0; a < real_dim(); ++a) count *= static_cast<std::size_t>(resolution);
  return count;
}

std::size_t TorusGrid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = real_dim() - 1; a > axis; --a) s *= static_cast<std::size_t>(resolution);
  return s;
}

int TorusGrid::coord_index(std::size_t node, int axis) const {
  return static_cast<int>((node / stride(axis)) % static_cast<std::size_t>(resolution));
}

std::size_t TorusGrid::shift(std::size_t node, int axis, int delta) const {
  const std::size_t s = stride(axis);
  const int N = resolution;
  const int i = static_cast<int>((node / s) % static_cast<std::size_t>(N));
  int j = (i + delta) % N;
  if (j < 0) j += N;
  return node + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * s;
}

HermMat HermMat::identity(int n) {
  HermMat m = zero(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

double HermMat::frobenius_norm() const {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += std::norm(at(i, j));
  return std::sqrt(s);
}

SymTensorField::SymTensorField(const TorusGrid& g)
    : grid_(g), n_(g.n), data_(g.node_count() * static_cast<std::size_t>(g.n) * g.n, 0.0) {}

HermMat SymTensorField::node(std::size_t p) const {
  const double* d = raw(p);
  HermMat m = HermMat::zero(n_);
  for (int i = 0; i < n_; ++i) m.at(i, i) = d[i];
  std::size_t off = static_cast<std::size_t>(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      m.at(i, j) = {d[off], d[off + 1]};
      m.at(j, i) = {d[off], -d[off + 1]};
      off += 2;
    }
  return m;
}

void SymTensorField::set_node(std::size_t p, const HermMat& m) {
  const double scale = 1.0 + m.frobenius_norm();
  for (int i = 0; i < n_; ++i) {
    if (std::abs(m.at(i, i).imag()) > 1e-12 * scale)
      throw std::invalid_argument("tensor diagonal not real at node " + std::to_string(p));
    for (int j = i + 1; j < n_; ++j) {
      if (std::abs(m.at(i, j) - std::conj(m.at(j, i))) > 1e-12 * scale)
        throw std::invalid_argument("tensor not hermitian at node " + std::to_string(p));
      if (grid_.kind == GridKind::RealRiemannian && std::abs(m.at(i, j).imag()) > 1e-12 * scale)
        throw std::invalid_argument("real-grid tensor has imaginary part at node " +
                                    std::to_string(p));
    }
  }
  set_node_unchecked(p, m);
}

void SymTensorField::set_node_unchecked(std::size_t p, const HermMat& m) {
  double* d = raw(p);
  for (int i = 0; i < n_; ++i) d[i] = m.at(i, i).real();
  std::size_t off = static_cast<std::size_t>(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      d[off] = m.at(i, j).real();
      d[off + 1] = m.at(i, j).imag();
      off += 2;
    }
}

double SymTensorField::constancy_defect() const {
  const std::size_t per = packed_size();
  double worst = 0.0;
  for (std::size_t p = 1; p < grid_.node_count(); ++p)
    for (std::size_t k = 0; k < per; ++k)
      worst = std::max(worst, std::abs(raw(p)[k] - raw(0)[k]));
  return worst;
}

EigenTuple EigenField::node(std::size_t p) const {
  EigenTuple t;
  t.n = n;
  const double* d = raw(p);
  for (int i = 0; i < n; ++i) t.v[static_cast<std::size_t>(i)] = d[i];
  return t;
}

namespace {
constexpr char kMagic[6] = {'S', 'L', 'O', 'P', 'E', '1'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.grid.kind));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(f.grid.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.resolution));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(f.values.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

ScalarField read_field(std::istream& in) {
  char magic[6];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ConfigError("field file: bad magic");
  const auto kind = static_cast<GridKind>(get<std::uint8_t>(in));
  const int n = get<std::uint8_t>(in);
  const int N = static_cast<int>(get<std::uint32_t>(in));
  const auto payload = get<std::uint64_t>(in);
  TorusGrid grid(kind, n, N);
  ScalarField f(grid);
  if (payload != f.values.size() * sizeof(double))
    throw ConfigError("field file: payload length mismatch");
  in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(payload));
  if (!in) throw ConfigError("field file: truncated payload");
  return f;
}

void write_field_file(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_field(out, f);
}

ScalarField read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_field(in);
}

}  // namespace slope
