#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "rangelab/lattice.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/site_table.hpp"

namespace rangelab::detail {

/// Points bucketed in cubic cells of side s (floor division), with the list of
/// cell offsets that can hold a point within l1-distance `reach` of a query.
class NeighbourCells {
 public:
  NeighbourCells(int dim, std::int64_t coord_bound, std::int64_t reach, std::int64_t cell_side = 0)
      : dim_(dim), reach_(reach) {
    side_ = cell_side > 0 ? cell_side : std::max<std::int64_t>(1, (reach + 1) / 2);
    const std::int64_t span = reach / side_ + 2;
    codec_ = KeyCodec(dim, coord_bound / side_ + span + 2);
    // offsets d with sum_j [d_j != 0] ((|d_j| - 1) s + 1) <= reach
    std::vector<std::int64_t> off(static_cast<std::size_t>(dim), -span);
    while (true) {
      std::int64_t need = 0;
      for (auto v : off)
        if (v != 0) need += (std::llabs(v) - 1) * side_ + 1;
      if (need <= reach) {
        u128 delta = 0;
        for (int j = 0; j < dim; ++j) {
          const u128 unit = u128(1) << (codec_.bits() * j);
          const auto v = off[static_cast<std::size_t>(j)];
          delta += v >= 0 ? unit * static_cast<std::uint64_t>(v) : u128(0) - unit * static_cast<std::uint64_t>(-v);
        }
        offsets_.push_back(delta);
      }
      int j = 0;
      while (j < dim && ++off[static_cast<std::size_t>(j)] > span) off[static_cast<std::size_t>(j++)] = -span;
      if (j == dim) break;
    }
  }

  int dim() const noexcept { return dim_; }
  std::int64_t side() const noexcept { return side_; }
  std::size_t offset_count() const noexcept { return offsets_.size(); }

  void insert(std::int32_t id, const LatticePoint& p) {
    const u128 key = cell_key(p);
    auto [slot, inserted] = cells_.insert(key, static_cast<std::int32_t>(entries_.size()));
    if (inserted) entries_.emplace_back();
    auto& e = entries_[static_cast<std::size_t>(cells_.value(slot))];
    e.push_back(id);
    for (int j = 0; j < dim_; ++j) e.push_back(static_cast<std::int32_t>(p[j]));
  }

  /// fn(id, coords) for every stored point in cells that may lie within reach of y.
  template <class Fn>
  void for_each_near(const LatticePoint& y, Fn&& fn) const {
    const u128 base = cell_key(y);
    const std::size_t stride = static_cast<std::size_t>(dim_) + 1;
    for (const u128 d : offsets_) {
      const std::size_t slot = cells_.find(base + d);
      if (slot == SiteTable<u128, std::int32_t>::npos) continue;
      const auto& e = entries_[static_cast<std::size_t>(cells_.value(slot))];
      for (std::size_t q = 0; q < e.size(); q += stride) fn(e[q], &e[q + 1]);
    }
  }

 private:
  u128 cell_key(const LatticePoint& p) const {
    LatticePoint c(dim_);
    for (int j = 0; j < dim_; ++j) c[j] = floor_div(p[j], side_);
    return codec_.encode<u128>(c);
  }

  int dim_;
  std::int64_t reach_;
  std::int64_t side_;
  KeyCodec codec_;
  std::vector<u128> offsets_;
  SiteTable<u128, std::int32_t> cells_{64};
  std::vector<std::vector<std::int32_t>> entries_;
};

/// For every k, calls on_step(k, y, visit) where visit(fn) enumerates the sites
/// x of R_k within l1-distance `reach` of y = S_k as fn(id, abs) with abs = |x - y|
/// per coordinate.
template <class OnStep>
void scan_range_neighbours(const RangeIndex& index, std::int64_t reach, OnStep&& on_step,
                           std::int64_t cell_side = 0) {
  const int dim = index.dim();
  std::int64_t bound = 1;
  for (const auto& s : index.sites()) bound = std::max(bound, s.linf_norm());
  NeighbourCells cells(dim, bound, reach, cell_side);
  std::int32_t inserted = 0;
  for (std::int64_t k = 0; k <= index.steps(); ++k) {
    const std::int32_t id = index.site_at(k);
    if (id == inserted) {
      cells.insert(id, index.site(id));
      ++inserted;
    }
    const LatticePoint& y = index.site(id);
    auto visit = [&](auto&& fn) {
      std::int64_t abs[kMaxDim];
      cells.for_each_near(y, [&](std::int32_t x, const std::int32_t* c) {
        std::int64_t l1 = 0;
        for (int j = 0; j < dim; ++j) {
          const std::int64_t v = c[j] - y[j];
          abs[j] = v < 0 ? -v : v;
          l1 += abs[j];
        }
        if (l1 <= reach) fn(x, abs);
      });
    };
    on_step(k, y, visit);
  }
}

}  // namespace rangelab::detail
