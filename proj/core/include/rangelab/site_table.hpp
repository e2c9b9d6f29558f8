#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "rangelab/errors.hpp"
#include "rangelab/lattice.hpp"

namespace rangelab {

using u128 = unsigned __int128;

/// Packs a point with |x_j| <= bound into a single integer: field j holds
/// x_j + 2^(bits-1) in bits [bits*j, bits*(j+1)). Keys are never zero.
class KeyCodec {
 public:
  KeyCodec() = default;
  KeyCodec(int dim, std::int64_t bound);

  int dim() const noexcept { return dim_; }
  int bits() const noexcept { return bits_; }
  int total_bits() const noexcept { return dim_ * bits_; }
  bool fits64() const noexcept { return total_bits() <= 64; }
  std::int64_t bound() const noexcept { return bound_; }

  template <class Key>
  Key origin() const noexcept {
    Key k = 0;
    for (int j = 0; j < dim_; ++j) k |= Key(offset_) << (bits_ * j);
    return k;
  }
  template <class Key>
  Key encode(const LatticePoint& p) const noexcept {
    Key k = 0;
    for (int j = 0; j < dim_; ++j) k |= Key(static_cast<std::uint64_t>(p[j] + offset_)) << (bits_ * j);
    return k;
  }
  template <class Key>
  LatticePoint decode(Key k) const {
    LatticePoint p(dim_);
    const Key mask = (Key(1) << bits_) - 1;
    for (int j = 0; j < dim_; ++j) p[j] = static_cast<std::int64_t>((k >> (bits_ * j)) & mask) - offset_;
    return p;
  }
  /// Key increment for a unit step along `axis` with the given sign (wraps mod 2^N).
  template <class Key>
  Key step_delta(int axis, int sign) const noexcept {
    const Key unit = Key(1) << (bits_ * axis);
    return sign > 0 ? unit : Key(0) - unit;
  }

 private:
  int dim_ = 0;
  int bits_ = 0;
  std::int64_t bound_ = 0;
  std::int64_t offset_ = 0;
};

inline KeyCodec::KeyCodec(int dim, std::int64_t bound) : dim_(dim), bound_(bound) {
  require(dim >= 1 && dim <= kMaxDim, "KeyCodec: dimension out of range");
  require(bound >= 0, "KeyCodec: negative bound");
  bits_ = std::max(2, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(2 * bound + 1))));
  offset_ = std::int64_t(1) << (bits_ - 1);
  if (dim_ * bits_ > 128)
    throw ResourceError("coordinate packing needs " + std::to_string(dim_ * bits_) +
                        " bits, more than the 128-bit key supports");
}

template <class Key>
inline std::size_t hash_key(Key k) noexcept {
  std::uint64_t x;
  if constexpr (sizeof(Key) > 8) {
    x = static_cast<std::uint64_t>(k) ^ (static_cast<std::uint64_t>(k >> 64) * 0xC2B2AE3D27D4EB4FULL);
  } else {
    x = static_cast<std::uint64_t>(k);
  }
  x ^= x >> 32;
  x *= 0x9E3779B97F4A7C15ULL;
  return static_cast<std::size_t>(x ^ (x >> 29));
}

/// Open-addressing map from non-zero packed keys to small values, linear
/// probing, load factor <= 1/2. clear() only touches occupied slots.
template <class Key, class Value = std::uint32_t>
class SiteTable {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit SiteTable(std::size_t expected = 1024) { reserve(expected); }

  void reserve(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 2) cap <<= 1;
    if (cap > keys_.size()) rehash(cap);
  }

  /// Returns (slot, inserted).
  std::pair<std::size_t, bool> insert(Key k, Value v = Value{}) {
    if (2 * (size_ + 1) > keys_.size()) rehash(keys_.size() * 2);
    std::size_t i = hash_key(k) & mask_;
    while (true) {
      if (keys_[i] == k) return {i, false};
      if (keys_[i] == 0) {
        keys_[i] = k;
        values_[i] = v;
        used_.push_back(static_cast<std::uint32_t>(i));
        ++size_;
        return {i, true};
      }
      i = (i + 1) & mask_;
    }
  }

  std::size_t find(Key k) const noexcept {
    std::size_t i = hash_key(k) & mask_;
    while (true) {
      if (keys_[i] == k) return i;
      if (keys_[i] == 0) return npos;
      i = (i + 1) & mask_;
    }
  }

  bool contains(Key k) const noexcept { return find(k) != npos; }
  Value& value(std::size_t slot) noexcept { return values_[slot]; }
  const Value& value(std::size_t slot) const noexcept { return values_[slot]; }
  Key key(std::size_t slot) const noexcept { return keys_[slot]; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::uint32_t>& occupied_slots() const noexcept { return used_; }

  void clear() noexcept {
    if (used_.size() * 8 < keys_.size()) {
      for (auto s : used_) keys_[s] = 0;
    } else {
      std::fill(keys_.begin(), keys_.end(), Key(0));
    }
    used_.clear();
    size_ = 0;
  }

 private:
  void rehash(std::size_t cap) {
    std::vector<Key> old_keys(cap, Key(0));
    std::vector<Value> old_values(cap);
    old_keys.swap(keys_);
    old_values.swap(values_);
    mask_ = cap - 1;
    std::vector<std::uint32_t> old_used;
    old_used.swap(used_);
    size_ = 0;
    for (auto s : old_used) insert(old_keys[s], old_values[s]);
  }

  std::vector<Key> keys_;
  std::vector<Value> values_;
  std::vector<std::uint32_t> used_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

}  // namespace rangelab
