#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rangelab/lattice.hpp"
#include "rangelab/rng.hpp"
#include "rangelab/site_table.hpp"

namespace rangelab {

/// Step code c in [0, 2d): axis c/2, positive direction when c is even.
inline int code_axis(int code) noexcept { return code >> 1; }
inline int code_sign(int code) noexcept { return (code & 1) ? -1 : 1; }
LatticePoint step_vector(int dim, int code);

struct WalkLimits {
  std::int64_t max_steps = std::int64_t(1) << 32;
};

/// A nearest-neighbour path S_0 = 0, S_1, ..., S_n stored as 4-bit step codes.
class WalkPath {
 public:
  WalkPath() = default;
  WalkPath(int dim, std::uint64_t seed, std::uint64_t stream_id);

  static WalkPath from_codes(int dim, std::span<const std::uint8_t> codes, std::uint64_t seed = 0,
                             std::uint64_t stream_id = 0);
  static WalkPath from_positions(std::span<const LatticePoint> positions);

  int dim() const noexcept { return dim_; }
  std::int64_t steps() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  int code(std::int64_t k) const noexcept {
    const std::uint8_t b = packed_[static_cast<std::size_t>(k >> 1)];
    return (k & 1) ? (b >> 4) : (b & 0x0F);
  }
  void push_code(int code);
  void reserve(std::int64_t n) { packed_.reserve(static_cast<std::size_t>((n + 1) / 2)); }

  /// First `steps` steps as a new path (same seed metadata).
  WalkPath prefix(std::int64_t steps) const;
  /// This path followed by `tail`'s steps.
  void append(const WalkPath& tail);

  std::vector<LatticePoint> positions() const;
  LatticePoint endpoint() const;
  std::vector<std::uint8_t> codes() const;
  const std::vector<std::uint8_t>& packed() const noexcept { return packed_; }
  std::int64_t max_abs_coordinate() const;

  friend bool operator==(const WalkPath& a, const WalkPath& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.packed_ == b.packed_;
  }

 private:
  int dim_ = 0;
  std::int64_t n_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::vector<std::uint8_t> packed_;
};

/// Draws n steps from rng. Deterministic in (seed, stream_id, dim, n).
WalkPath simulate_walk(int dim, std::int64_t n, RngStream& rng, const WalkLimits& limits = {});

/// Calls on_site(key) for S_0..S_n of a walk drawn from rng without storing it.
/// Keys come from `codec`, whose bound must be >= n.
template <class Key, class Fn>
void stream_walk_keys(const KeyCodec& codec, std::int64_t n, RngStream& rng, Fn&& on_site) {
  const int dim = codec.dim();
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * dim; ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  Key key = codec.origin<Key>();
  on_site(key);
  const auto two_d = static_cast<std::uint64_t>(2 * dim);
  for (std::int64_t k = 0; k < n; ++k) {
    key += delta[rng.below(two_d)];
    on_site(key);
  }
}

/// Range |R_n| of a freshly drawn walk, computed with a reusable table.
std::int64_t streamed_range(int dim, std::int64_t n, RngStream& rng);

}  // namespace rangelab
