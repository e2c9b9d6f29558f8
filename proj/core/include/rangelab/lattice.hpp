#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

namespace rangelab {

inline constexpr int kMaxDim = 8;

/// A point of Z^d, 1 <= d <= kMaxDim. Unused trailing coordinates stay zero.
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int dim);
  LatticePoint(std::initializer_list<std::int64_t> coords);

  static LatticePoint from_span(std::span<const std::int64_t> coords);
  static LatticePoint unit(int dim, int axis, int sign = 1);

  int dim() const noexcept { return dim_; }
  std::int64_t operator[](int j) const noexcept { return c_[j]; }
  std::int64_t& operator[](int j) noexcept { return c_[j]; }
  std::span<const std::int64_t> coords() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  LatticePoint& operator+=(const LatticePoint& o) noexcept;
  LatticePoint& operator-=(const LatticePoint& o) noexcept;
  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) noexcept { return a += b; }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) noexcept { return a -= b; }
  LatticePoint operator-() const noexcept;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  std::int64_t l1_norm() const noexcept;
  std::int64_t linf_norm() const noexcept;
  std::int64_t norm2() const noexcept;  // squared Euclidean norm
  std::string to_string() const;

 private:
  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept;
};

/// Q(x, r) = {y : -r/2 <= y_j - x_j < r/2 for all j}. Side may be real.
struct Cube {
  LatticePoint center;
  double side = 1.0;
};

bool cube_contains(const Cube& q, const LatticePoint& y);
/// Number of lattice points of Q(x, r) along one axis (independent of x for integer r).
std::int64_t cube_axis_range(double side, std::int64_t center, std::int64_t* lo, std::int64_t* hi);
/// The unique x in rZ^d with y in Q(x, r).
LatticePoint cube_index(const LatticePoint& y, std::int64_t r);
std::int64_t chebyshev_distance(const LatticePoint& a, const LatticePoint& b);

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace rangelab
