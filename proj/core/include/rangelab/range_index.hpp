#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rangelab/lattice.hpp"
#include "rangelab/walk.hpp"

namespace rangelab {

/// Dense site ids for the range of a path. Site ids are assigned in order of
/// first visit, so the sites of R_k are exactly the ids < distinct_upto(k).
class RangeIndex {
 public:
  explicit RangeIndex(const WalkPath& path);
  RangeIndex(const RangeIndex&) = delete;
  RangeIndex& operator=(const RangeIndex&) = delete;
  RangeIndex(RangeIndex&&) noexcept;
  RangeIndex& operator=(RangeIndex&&) noexcept;
  ~RangeIndex();

  int dim() const noexcept { return dim_; }
  std::int64_t steps() const noexcept { return static_cast<std::int64_t>(site_of_step_.size()) - 1; }
  std::int64_t num_sites() const noexcept { return static_cast<std::int64_t>(sites_.size()); }

  std::int32_t site_at(std::int64_t k) const noexcept { return site_of_step_[static_cast<std::size_t>(k)]; }
  const LatticePoint& position(std::int64_t k) const noexcept { return sites_[static_cast<std::size_t>(site_at(k))]; }
  const LatticePoint& site(std::int32_t id) const noexcept { return sites_[static_cast<std::size_t>(id)]; }
  std::int64_t first_visit(std::int32_t id) const noexcept { return first_visit_[static_cast<std::size_t>(id)]; }
  std::int64_t visit_count(std::int32_t id) const noexcept { return visit_count_[static_cast<std::size_t>(id)]; }
  /// |R_k| for 0 <= k <= n.
  std::int64_t range_upto(std::int64_t k) const noexcept { return distinct_upto_[static_cast<std::size_t>(k)]; }
  /// Site id of y, or -1 if y was never visited.
  std::int32_t find(const LatticePoint& y) const;

  const std::vector<std::int32_t>& site_of_step() const noexcept { return site_of_step_; }
  const std::vector<LatticePoint>& sites() const noexcept { return sites_; }

  /// |R[a, b]|, the number of distinct sites among S_a..S_b.
  std::int64_t subrange_size(std::int64_t a, std::int64_t b) const;
  /// |R[a, b] ∩ R[c, e]|.
  std::int64_t subrange_intersection(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t e) const;

 private:
  struct Lookup;
  int dim_ = 0;
  std::vector<std::int32_t> site_of_step_;
  std::vector<LatticePoint> sites_;
  std::vector<std::int64_t> first_visit_;
  std::vector<std::int64_t> visit_count_;
  std::vector<std::int64_t> distinct_upto_;
  std::unique_ptr<Lookup> lookup_;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t epoch_ = 0;
};

}  // namespace rangelab
