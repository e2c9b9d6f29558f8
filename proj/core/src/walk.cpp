#include "rangelab/walk.hpp"

#include <cstdlib>

#include "rangelab/errors.hpp"

namespace rangelab {

LatticePoint step_vector(int dim, int code) {
  require(code >= 0 && code < 2 * dim, "step code out of range");
  return LatticePoint::unit(dim, code_axis(code), code_sign(code));
}

WalkPath::WalkPath(int dim, std::uint64_t seed, std::uint64_t stream_id)
    : dim_(dim), seed_(seed), stream_(stream_id) {
  require(dim >= 1 && dim <= kMaxDim, "walk dimension out of range");
}

void WalkPath::push_code(int code) {
  if ((n_ & 1) == 0) {
    packed_.push_back(static_cast<std::uint8_t>(code));
  } else {
    packed_.back() = static_cast<std::uint8_t>(packed_.back() | (code << 4));
  }
  ++n_;
}

WalkPath WalkPath::from_codes(int dim, std::span<const std::uint8_t> codes, std::uint64_t seed,
                              std::uint64_t stream_id) {
  WalkPath w(dim, seed, stream_id);
  w.reserve(static_cast<std::int64_t>(codes.size()));
  for (auto c : codes) {
    require(c < 2 * dim, "step code out of range for dimension");
    w.push_code(c);
  }
  return w;
}

WalkPath WalkPath::from_positions(std::span<const LatticePoint> positions) {
  require(!positions.empty(), "from_positions: empty position list");
  const int dim = positions.front().dim();
  for (int j = 0; j < dim; ++j) require(positions.front()[j] == 0, "from_positions: path must start at the origin");
  WalkPath w(dim, 0, 0);
  for (std::size_t k = 1; k < positions.size(); ++k) {
    const LatticePoint diff = positions[k] - positions[k - 1];
    require(diff.l1_norm() == 1, "from_positions: consecutive positions are not neighbours");
    for (int j = 0; j < dim; ++j) {
      if (diff[j] != 0) w.push_code(2 * j + (diff[j] < 0 ? 1 : 0));
    }
  }
  return w;
}

WalkPath WalkPath::prefix(std::int64_t steps) const {
  require(steps >= 0 && steps <= n_, "prefix length out of range");
  WalkPath w(dim_, seed_, stream_);
  w.packed_.assign(packed_.begin(), packed_.begin() + (steps + 1) / 2);
  w.n_ = steps;
  if (steps & 1) w.packed_.back() &= 0x0F;
  return w;
}

void WalkPath::append(const WalkPath& tail) {
  require(tail.dim_ == dim_, "append: dimension mismatch");
  reserve(n_ + tail.n_);
  for (std::int64_t k = 0; k < tail.n_; ++k) push_code(tail.code(k));
}

std::vector<LatticePoint> WalkPath::positions() const {
  std::vector<LatticePoint> out;
  out.reserve(static_cast<std::size_t>(n_ + 1));
  LatticePoint p(dim_);
  out.push_back(p);
  for (std::int64_t k = 0; k < n_; ++k) {
    const int c = code(k);
    p[code_axis(c)] += code_sign(c);
    out.push_back(p);
  }
  return out;
}

LatticePoint WalkPath::endpoint() const {
  LatticePoint p(dim_);
  for (std::int64_t k = 0; k < n_; ++k) {
    const int c = code(k);
    p[code_axis(c)] += code_sign(c);
  }
  return p;
}

std::vector<std::uint8_t> WalkPath::codes() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n_));
  for (std::int64_t k = 0; k < n_; ++k) out[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(code(k));
  return out;
}

std::int64_t WalkPath::max_abs_coordinate() const {
  LatticePoint p(dim_);
  std::int64_t m = 0;
  for (std::int64_t k = 0; k < n_; ++k) {
    const int c = code(k);
    const int a = code_axis(c);
    p[a] += code_sign(c);
    m = std::max<std::int64_t>(m, std::llabs(p[a]));
  }
  return m;
}

WalkPath simulate_walk(int dim, std::int64_t n, RngStream& rng, const WalkLimits& limits) {
  require(dim >= 3 && dim <= kMaxDim, "simulate_walk: dimension must be in [3, 8] (the walk must be transient)");
  require(n >= 0, "simulate_walk: negative step count");
  if (n > limits.max_steps)
    throw ResourceError("simulate_walk: " + std::to_string(n) + " steps exceeds the storage budget of " +
                        std::to_string(limits.max_steps));
  WalkPath w(dim, rng.seed(), rng.stream_id());
  w.reserve(n);
  const auto two_d = static_cast<std::uint64_t>(2 * dim);
  for (std::int64_t k = 0; k < n; ++k) w.push_code(static_cast<int>(rng.below(two_d)));
  return w;
}

namespace {
template <class Key>
std::int64_t streamed_range_impl(const KeyCodec& codec, std::int64_t n, RngStream& rng) {
  thread_local SiteTable<Key, std::uint8_t> table(1024);
  table.clear();
  table.reserve(static_cast<std::size_t>(n + 1));
  stream_walk_keys<Key>(codec, n, rng, [](Key k) { table.insert(k); });
  return static_cast<std::int64_t>(table.size());
}
}  // namespace

std::int64_t streamed_range(int dim, std::int64_t n, RngStream& rng) {
  const KeyCodec codec(dim, n);
  if (codec.fits64()) return streamed_range_impl<std::uint64_t>(codec, n, rng);
  return streamed_range_impl<u128>(codec, n, rng);
}

}  // namespace rangelab
