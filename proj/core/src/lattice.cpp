#include "rangelab/lattice.hpp"

#include <cmath>
#include <cstdlib>

#include "rangelab/errors.hpp"

namespace rangelab {

LatticePoint::LatticePoint(int dim) : dim_(dim) {
  require(dim >= 1 && dim <= kMaxDim, "lattice dimension out of range");
}

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : dim_(static_cast<int>(coords.size())) {
  require(dim_ >= 1 && dim_ <= kMaxDim, "lattice dimension out of range");
  int j = 0;
  for (auto v : coords) c_[j++] = v;
}

LatticePoint LatticePoint::from_span(std::span<const std::int64_t> coords) {
  LatticePoint p(static_cast<int>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) p.c_[j] = coords[j];
  return p;
}

LatticePoint LatticePoint::unit(int dim, int axis, int sign) {
  LatticePoint p(dim);
  p.c_[axis] = sign;
  return p;
}

LatticePoint& LatticePoint::operator+=(const LatticePoint& o) noexcept {
  for (int j = 0; j < dim_; ++j) c_[j] += o.c_[j];
  return *this;
}

LatticePoint& LatticePoint::operator-=(const LatticePoint& o) noexcept {
  for (int j = 0; j < dim_; ++j) c_[j] -= o.c_[j];
  return *this;
}

LatticePoint LatticePoint::operator-() const noexcept {
  LatticePoint p = *this;
  for (int j = 0; j < dim_; ++j) p.c_[j] = -p.c_[j];
  return p;
}

std::int64_t LatticePoint::l1_norm() const noexcept {
  std::int64_t s = 0;
  for (int j = 0; j < dim_; ++j) s += std::llabs(c_[j]);
  return s;
}

std::int64_t LatticePoint::linf_norm() const noexcept {
  std::int64_t s = 0;
  for (int j = 0; j < dim_; ++j) s = std::max<std::int64_t>(s, std::llabs(c_[j]));
  return s;
}

std::int64_t LatticePoint::norm2() const noexcept {
  std::int64_t s = 0;
  for (int j = 0; j < dim_; ++j) s += c_[j] * c_[j];
  return s;
}

std::string LatticePoint::to_string() const {
  std::string s = "(";
  for (int j = 0; j < dim_; ++j) {
    if (j) s += ",";
    s += std::to_string(c_[j]);
  }
  return s + ")";
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(p.dim());
  for (int j = 0; j < p.dim(); ++j) {
    h ^= static_cast<std::uint64_t>(p[j]) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 31));
}

bool cube_contains(const Cube& q, const LatticePoint& y) {
  require(q.center.dim() == y.dim(), "cube_contains: dimension mismatch");
  for (int j = 0; j < y.dim(); ++j) {
    const double twice = 2.0 * static_cast<double>(y[j] - q.center[j]);
    if (!(twice >= -q.side && twice < q.side)) return false;
  }
  return true;
}

std::int64_t cube_axis_range(double side, std::int64_t center, std::int64_t* lo, std::int64_t* hi) {
  // integer offsets t with -side/2 <= t < side/2
  const auto l = static_cast<std::int64_t>(std::ceil(-side / 2.0));
  auto h = static_cast<std::int64_t>(std::ceil(side / 2.0)) - 1;
  *lo = center + l;
  *hi = center + h;
  return h - l + 1;
}

LatticePoint cube_index(const LatticePoint& y, std::int64_t r) {
  require(r >= 1, "cube_index: side must be a positive integer");
  LatticePoint x(y.dim());
  for (int j = 0; j < y.dim(); ++j) x[j] = r * floor_div(2 * y[j] + r, 2 * r);
  return x;
}

std::int64_t chebyshev_distance(const LatticePoint& a, const LatticePoint& b) {
  require(a.dim() == b.dim(), "chebyshev_distance: dimension mismatch");
  return (a - b).linf_norm();
}

}  // namespace rangelab
