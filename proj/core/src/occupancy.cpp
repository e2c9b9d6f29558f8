#include "rangelab/occupancy.hpp"

#include <algorithm>

#include "rangelab/site_table.hpp"

namespace rangelab {

struct OccupancyIndex::Cells {
  std::int64_t width = 1;
  KeyCodec codec;
  SiteTable<u128, std::int32_t> lookup{64};
  std::vector<std::int64_t> totals;
  std::vector<std::vector<std::int32_t>> members;

  std::int32_t find(const LatticePoint& cell) const {
    const std::size_t slot = lookup.find(codec.encode<u128>(cell));
    return slot == SiteTable<u128, std::int32_t>::npos ? -1 : lookup.value(slot);
  }
};

OccupancyIndex::OccupancyIndex(const RangeIndex& index) : index_(&index) {}
OccupancyIndex::~OccupancyIndex() = default;

const OccupancyIndex::Cells& OccupancyIndex::cells(std::int64_t width) const {
  auto& slot = cells_[width];
  if (slot) return *slot;
  auto c = std::make_unique<Cells>();
  const int d = dim();
  std::int64_t bound = 1;
  for (const auto& s : index_->sites()) bound = std::max(bound, s.linf_norm());
  c->width = width;
  c->codec = KeyCodec(d, bound / width + 2);
  LatticePoint cell(d);
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(index_->num_sites()); ++id) {
    const auto& p = index_->site(id);
    for (int j = 0; j < d; ++j) cell[j] = floor_div(p[j], width);
    auto [s, inserted] = c->lookup.insert(c->codec.encode<u128>(cell), static_cast<std::int32_t>(c->totals.size()));
    if (inserted) {
      c->totals.push_back(0);
      c->members.emplace_back();
    }
    const auto e = static_cast<std::size_t>(c->lookup.value(s));
    c->totals[e] += index_->visit_count(id);
    c->members[e].push_back(id);
  }
  slot = std::move(c);
  return *slot;
}

namespace {

// Visits the cells meeting [lo_j, hi_j] on every axis.
template <class Fn>
void for_each_cell(int d, const std::int64_t* lo, const std::int64_t* hi, std::int64_t width, Fn&& fn) {
  std::int64_t first[kMaxDim], last[kMaxDim];
  LatticePoint cell(d);
  for (int j = 0; j < d; ++j) {
    first[j] = floor_div(lo[j], width);
    last[j] = floor_div(hi[j], width);
    cell[j] = first[j];
  }
  while (true) {
    fn(cell);
    int j = 0;
    while (j < d && ++cell[j] > last[j]) {
      cell[j] = first[j];
      ++j;
    }
    if (j == d) return;
  }
}

}  // namespace

std::int64_t OccupancyIndex::exact(std::int32_t site, double side, const Cells& c) const {
  ++exact_evals_;
  const int d = dim();
  const auto& x = index_->site(site);
  std::int64_t lo[kMaxDim], hi[kMaxDim];
  for (int j = 0; j < d; ++j) cube_axis_range(side, x[j], &lo[j], &hi[j]);
  std::int64_t total = 0;
  for_each_cell(d, lo, hi, c.width, [&](const LatticePoint& cell) {
    const std::int32_t e = c.find(cell);
    if (e < 0) return;
    for (const std::int32_t id : c.members[static_cast<std::size_t>(e)]) {
      const auto& y = index_->site(id);
      bool in = true;
      for (int j = 0; j < d && in; ++j) in = y[j] >= lo[j] && y[j] <= hi[j];
      if (in) total += index_->visit_count(id);
    }
  });
  return total;
}

std::int64_t OccupancyIndex::cube_time(std::int32_t site, double side) const {
  require(side > 0.0, "cube_time: side must be positive");
  std::int64_t lo, hi;
  const std::int64_t width = std::max<std::int64_t>(1, cube_axis_range(side, 0, &lo, &hi));
  return exact(site, side, cells(width));
}

const std::vector<std::int64_t>& OccupancyIndex::cube_times_above(double side, double floor_value) const {
  require(side > 0.0, "cube_times_above: side must be positive");
  auto [it, inserted] = memo_.try_emplace({side, floor_value});
  auto& out = it->second;
  if (!inserted) return out;
  const int d = dim();
  std::int64_t lo0, hi0;
  const std::int64_t width = std::max<std::int64_t>(1, cube_axis_range(side, 0, &lo0, &hi0));
  out.assign(static_cast<std::size_t>(index_->num_sites()), 0);
  if (floor_value > static_cast<double>(steps() + 1)) return out;  // nothing can reach it
  const Cells& c = cells(width);
  std::int64_t lo[kMaxDim], hi[kMaxDim];
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(index_->num_sites()); ++id) {
    const auto& x = index_->site(id);
    for (int j = 0; j < d; ++j) {
      lo[j] = x[j] + lo0;
      hi[j] = x[j] + hi0;
    }
    std::int64_t upper = 0;
    for_each_cell(d, lo, hi, width, [&](const LatticePoint& cell) {
      const std::int32_t e = c.find(cell);
      if (e >= 0) upper += c.totals[static_cast<std::size_t>(e)];
    });
    out[static_cast<std::size_t>(id)] =
        static_cast<double>(upper) < floor_value ? upper : exact(id, side, c);
  }
  return out;
}

}  // namespace rangelab
