#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "rangelab/range_index.hpp"

namespace rangelab {

/// Local times of walker-centred cubes l_n(Q(S_k, r)), evaluated per site. The
/// side may be real. Sites are bucketed in grid cells as wide as the cube's
/// lattice extent, so a centred cube meets at most 2^d cells, whose visit
/// totals bound l_n from above. Exact counting over the sites of those cells
/// only runs when the bound does not settle a threshold. Not thread-safe (the
/// cell grids and results are memoised); use one instance per path.
class OccupancyIndex {
 public:
  explicit OccupancyIndex(const RangeIndex& index);
  ~OccupancyIndex();
  OccupancyIndex(const OccupancyIndex&) = delete;
  OccupancyIndex& operator=(const OccupancyIndex&) = delete;

  const RangeIndex& range() const noexcept { return *index_; }
  int dim() const noexcept { return index_->dim(); }
  std::int64_t steps() const noexcept { return index_->steps(); }

  /// Exact l_n(Q(site, r)).
  std::int64_t cube_time(std::int32_t site, double side) const;
  /// Per site: exact l_n(Q(site, r)) when it is >= floor_value, otherwise some
  /// value below floor_value. Results are memoised per (r, floor_value).
  const std::vector<std::int64_t>& cube_times_above(double side, double floor_value) const;
  std::int64_t exact_evaluations() const noexcept { return exact_evals_; }

 private:
  struct Cells;
  const Cells& cells(std::int64_t width) const;
  std::int64_t exact(std::int32_t site, double side, const Cells& c) const;

  const RangeIndex* index_;
  mutable std::map<std::int64_t, std::unique_ptr<Cells>> cells_;
  mutable std::map<std::pair<double, double>, std::vector<std::int64_t>> memo_;
  mutable std::int64_t exact_evals_ = 0;
};

}  // namespace rangelab
