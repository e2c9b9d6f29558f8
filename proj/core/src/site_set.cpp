#include "rangelab/site_set.hpp"

#include <algorithm>
#include <cmath>

#include "rangelab/errors.hpp"

namespace rangelab {

SiteSet::SiteSet(int dim, std::vector<LatticePoint> points) : dim_(dim), sites_(std::move(points)) {
  for (const auto& p : sites_) require(p.dim() == dim, "SiteSet: dimension mismatch");
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

SiteSet SiteSet::cube(const LatticePoint& center, std::int64_t side) {
  const LatticePoint c[1] = {center};
  return union_of_cubes(center.dim(), c, side);
}

SiteSet SiteSet::union_of_cubes(int dim, std::span<const LatticePoint> centers, std::int64_t side) {
  require(side >= 1, "union_of_cubes: side must be positive");
  std::vector<LatticePoint> pts;
  std::int64_t lo = 0, hi = 0;
  cube_axis_range(static_cast<double>(side), 0, &lo, &hi);
  for (const auto& c : centers) {
    require(c.dim() == dim, "union_of_cubes: dimension mismatch");
    LatticePoint off(dim);
    for (int j = 0; j < dim; ++j) off[j] = lo;
    while (true) {
      pts.push_back(c + off);
      int j = 0;
      while (j < dim && ++off[j] > hi) off[j++] = lo;
      if (j == dim) break;
    }
  }
  return SiteSet(dim, std::move(pts));
}

bool SiteSet::contains(const LatticePoint& y) const { return std::binary_search(sites_.begin(), sites_.end(), y); }

double SiteSet::diameter() const {
  std::int64_t best = 0;
  for (std::size_t a = 0; a < sites_.size(); ++a)
    for (std::size_t b = a + 1; b < sites_.size(); ++b) best = std::max(best, (sites_[a] - sites_[b]).norm2());
  return std::sqrt(static_cast<double>(best));
}

SiteSet SiteSet::outer_ring() const {
  std::vector<LatticePoint> ring;
  for (const auto& s : sites_) {
    LatticePoint off(dim_);
    for (int j = 0; j < dim_; ++j) off[j] = -1;
    while (true) {
      const LatticePoint y = s + off;
      if (!contains(y)) ring.push_back(y);
      int j = 0;
      while (j < dim_ && ++off[j] > 1) off[j++] = -1;
      if (j == dim_) break;
    }
  }
  return SiteSet(dim_, std::move(ring));
}

}  // namespace rangelab
