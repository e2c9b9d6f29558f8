#include "rangelab/range_index.hpp"

#include <algorithm>
#include <variant>

#include "rangelab/errors.hpp"
#include "rangelab/site_table.hpp"

namespace rangelab {

struct RangeIndex::Lookup {
  KeyCodec codec;
  std::variant<SiteTable<std::uint64_t, std::int32_t>, SiteTable<u128, std::int32_t>> table;
};

RangeIndex::RangeIndex(RangeIndex&&) noexcept = default;
RangeIndex& RangeIndex::operator=(RangeIndex&&) noexcept = default;
RangeIndex::~RangeIndex() = default;

namespace {
template <class Key>
void build_index(const WalkPath& path, const KeyCodec& codec, SiteTable<Key, std::int32_t>& table,
                 std::vector<std::int32_t>& site_of_step, std::vector<LatticePoint>& sites,
                 std::vector<std::int64_t>& first_visit, std::vector<std::int64_t>& visit_count,
                 std::vector<std::int64_t>& distinct_upto) {
  const int dim = path.dim();
  const std::int64_t n = path.steps();
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * dim; ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  Key key = codec.origin<Key>();
  LatticePoint p(dim);
  for (std::int64_t k = 0; k <= n; ++k) {
    if (k > 0) {
      const int c = path.code(k - 1);
      key += delta[c];
      p[code_axis(c)] += code_sign(c);
    }
    auto [slot, inserted] = table.insert(key, static_cast<std::int32_t>(sites.size()));
    if (inserted) {
      sites.push_back(p);
      first_visit.push_back(k);
      visit_count.push_back(0);
    }
    const std::int32_t id = table.value(slot);
    ++visit_count[static_cast<std::size_t>(id)];
    site_of_step.push_back(id);
    distinct_upto.push_back(static_cast<std::int64_t>(sites.size()));
  }
}
}  // namespace

RangeIndex::RangeIndex(const WalkPath& path) : dim_(path.dim()), lookup_(std::make_unique<Lookup>()) {
  require(path.dim() >= 1, "RangeIndex: empty path object");
  require(path.steps() < (std::int64_t(1) << 31), "RangeIndex: path too long for 32-bit site ids");
  const std::int64_t bound = std::max<std::int64_t>(1, path.max_abs_coordinate());
  lookup_->codec = KeyCodec(dim_, bound);
  const auto n = static_cast<std::size_t>(path.steps());
  site_of_step_.reserve(n + 1);
  distinct_upto_.reserve(n + 1);
  if (lookup_->codec.fits64()) {
    lookup_->table.emplace<0>(n + 1);
    build_index(path, lookup_->codec, std::get<0>(lookup_->table), site_of_step_, sites_, first_visit_,
                visit_count_, distinct_upto_);
  } else {
    lookup_->table.emplace<1>(n + 1);
    build_index(path, lookup_->codec, std::get<1>(lookup_->table), site_of_step_, sites_, first_visit_,
                visit_count_, distinct_upto_);
  }
  stamp_.assign(sites_.size(), 0);
}

std::int32_t RangeIndex::find(const LatticePoint& y) const {
  require(y.dim() == dim_, "RangeIndex::find: dimension mismatch");
  if (y.linf_norm() > lookup_->codec.bound()) return -1;
  return std::visit(
      [&](const auto& table) -> std::int32_t {
        using Key = std::decay_t<decltype(table.key(0))>;
        const std::size_t slot = table.find(lookup_->codec.encode<Key>(y));
        return slot == SiteTable<Key, std::int32_t>::npos ? -1 : table.value(slot);
      },
      lookup_->table);
}

std::int64_t RangeIndex::subrange_size(std::int64_t a, std::int64_t b) const {
  require(0 <= a && a <= b && b <= steps(), "subrange_size: bad interval");
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  std::int64_t count = 0;
  for (std::int64_t k = a; k <= b; ++k) {
    auto& s = stamp_[static_cast<std::size_t>(site_at(k))];
    if (s != epoch_) {
      s = epoch_;
      ++count;
    }
  }
  return count;
}

std::int64_t RangeIndex::subrange_intersection(std::int64_t a, std::int64_t b, std::int64_t c,
                                               std::int64_t e) const {
  require(0 <= a && a <= b && b <= steps(), "subrange_intersection: bad first interval");
  require(0 <= c && c <= e && e <= steps(), "subrange_intersection: bad second interval");
  // two epochs: epoch_ marks the first interval, epoch_+1 marks counted sites
  if (epoch_ >= 0xFFFFFFF0u) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 0;
  }
  const std::uint32_t mark = ++epoch_;
  const std::uint32_t done = ++epoch_;
  for (std::int64_t k = a; k <= b; ++k) stamp_[static_cast<std::size_t>(site_at(k))] = mark;
  std::int64_t count = 0;
  for (std::int64_t k = c; k <= e; ++k) {
    auto& s = stamp_[static_cast<std::size_t>(site_at(k))];
    if (s == mark) {
      s = done;
      ++count;
    }
  }
  return count;
}

}  // namespace rangelab
