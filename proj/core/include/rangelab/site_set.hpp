#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rangelab/lattice.hpp"

namespace rangelab {

/// A finite subset of Z^d, kept sorted (lexicographic) and free of duplicates.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(int dim) : dim_(dim) {}
  SiteSet(int dim, std::vector<LatticePoint> points);

  /// Lattice points of Q(center, r).
  static SiteSet cube(const LatticePoint& center, std::int64_t side);
  /// Union of Q(c, side) over the given centers.
  static SiteSet union_of_cubes(int dim, std::span<const LatticePoint> centers, std::int64_t side);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const std::vector<LatticePoint>& sites() const noexcept { return sites_; }
  const LatticePoint& operator[](std::size_t i) const noexcept { return sites_[i]; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }

  bool contains(const LatticePoint& y) const;
  /// Largest Euclidean distance between two sites.
  double diameter() const;
  /// Sites at sup-distance exactly 1 from the set and not in it.
  SiteSet outer_ring() const;

  friend bool operator==(const SiteSet&, const SiteSet&) = default;

 private:
  int dim_ = 0;
  std::vector<LatticePoint> sites_;
};

}  // namespace rangelab
