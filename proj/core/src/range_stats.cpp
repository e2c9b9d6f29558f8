#include "rangelab/range_stats.hpp"

#include <algorithm>
#include <cmath>

#include "rangelab/errors.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/site_table.hpp"

namespace rangelab {

namespace {

template <class Key, class Fn>
void for_each_key(const WalkPath& path, const KeyCodec& codec, std::int64_t upto, Fn&& fn) {
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * path.dim(); ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  Key key = codec.origin<Key>();
  fn(key);
  for (std::int64_t k = 0; k < upto; ++k) {
    key += delta[path.code(k)];
    fn(key);
  }
}

template <class Key>
std::int64_t volume_impl(const WalkPath& path, const KeyCodec& codec, std::int64_t upto) {
  SiteTable<Key, std::uint8_t> table(static_cast<std::size_t>(upto + 1));
  for_each_key<Key>(path, codec, upto, [&](Key k) { table.insert(k); });
  return static_cast<std::int64_t>(table.size());
}

template <class Key>
std::int64_t intersect_impl(const WalkPath& a, const WalkPath& b, const KeyCodec& codec) {
  SiteTable<Key, std::uint8_t> table(static_cast<std::size_t>(a.steps() + 1));
  for_each_key<Key>(a, codec, a.steps(), [&](Key k) { table.insert(k, 1); });
  std::int64_t common = 0;
  for_each_key<Key>(b, codec, b.steps(), [&](Key k) {
    const std::size_t slot = table.find(k);
    if (slot != SiteTable<Key, std::uint8_t>::npos && table.value(slot) == 1) {
      table.value(slot) = 2;
      ++common;
    }
  });
  return common;
}

void check_upto(const WalkPath& path, std::int64_t upto) {
  require(upto >= 0 && upto <= path.steps(), "step index out of range for this path");
}

}  // namespace

std::int64_t range_volume(const WalkPath& path, std::int64_t upto) {
  check_upto(path, upto);
  const KeyCodec codec(path.dim(), std::max<std::int64_t>(1, upto));
  if (codec.fits64()) return volume_impl<std::uint64_t>(path, codec, upto);
  return volume_impl<u128>(path, codec, upto);
}

std::int64_t local_time(const WalkPath& path, const Cube& region, std::int64_t upto) {
  check_upto(path, upto);
  require(region.center.dim() == path.dim(), "local_time: dimension mismatch");
  LatticePoint p(path.dim());
  std::int64_t count = cube_contains(region, p) ? 1 : 0;
  for (std::int64_t k = 0; k < upto; ++k) {
    const int c = path.code(k);
    p[code_axis(c)] += code_sign(c);
    if (cube_contains(region, p)) ++count;
  }
  return count;
}

std::int64_t local_time(const WalkPath& path, const SiteSet& region, std::int64_t upto) {
  check_upto(path, upto);
  require(region.empty() || region.dim() == path.dim(), "local_time: dimension mismatch");
  if (region.empty()) return 0;
  LatticePoint p(path.dim());
  std::int64_t count = region.contains(p) ? 1 : 0;
  for (std::int64_t k = 0; k < upto; ++k) {
    const int c = path.code(k);
    p[code_axis(c)] += code_sign(c);
    if (region.contains(p)) ++count;
  }
  return count;
}

std::int64_t LocalTimeField::at(const LatticePoint& grid_point) const {
  const auto it = counts.find(grid_point);
  return it == counts.end() ? 0 : it->second;
}

std::int64_t LocalTimeField::total() const {
  std::int64_t s = 0;
  for (const auto& [x, c] : counts) s += c;
  return s;
}

std::int64_t LocalTimeField::max_count() const {
  std::int64_t m = 0;
  for (const auto& [x, c] : counts) m = std::max(m, c);
  return m;
}

LocalTimeField occupancy_field(const WalkPath& path, std::int64_t side) {
  require(side >= 1, "occupancy_field: side must be positive");
  LocalTimeField field;
  field.dim = path.dim();
  field.side = side;
  LatticePoint p(path.dim());
  ++field.counts[cube_index(p, side)];
  for (std::int64_t k = 0; k < path.steps(); ++k) {
    const int c = path.code(k);
    p[code_axis(c)] += code_sign(c);
    ++field.counts[cube_index(p, side)];
  }
  return field;
}

std::int64_t intersect_ranges(const WalkPath& a, const WalkPath& b) {
  require(a.dim() == b.dim(), "intersect_ranges: dimension mismatch");
  const KeyCodec codec(a.dim(), std::max<std::int64_t>({1, a.steps(), b.steps()}));
  if (codec.fits64()) return intersect_impl<std::uint64_t>(a, b, codec);
  return intersect_impl<u128>(a, b, codec);
}

IdentityCheck verify_inclusion_exclusion(const RangeIndex& index, std::int64_t n, std::int64_t m) {
  require(n >= 0 && m >= 0 && n + m <= index.steps(), "verify_inclusion_exclusion: n + m exceeds the path");
  IdentityCheck out;
  out.lhs = index.subrange_size(0, n + m);
  out.rhs = index.subrange_size(0, n) + index.subrange_size(n, n + m) - index.subrange_intersection(0, n, n, n + m);
  return out;
}

DyadicReport dyadic_decompose(const RangeIndex& index, int levels) {
  const std::int64_t n = index.steps();
  require(levels >= 1 && levels < 62, "dyadic_decompose: levels out of range");
  require((std::int64_t(1) << levels) <= n, "dyadic_decompose: need 2^L <= n");
  DyadicReport rep;
  rep.levels = levels;
  const std::int64_t blocks = std::int64_t(1) << levels;
  rep.boundaries.resize(static_cast<std::size_t>(blocks + 1));
  for (std::int64_t i = 0; i <= blocks; ++i)
    rep.boundaries[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>((static_cast<unsigned __int128>(i) * static_cast<std::uint64_t>(n)) /
                                  static_cast<std::uint64_t>(blocks));
  rep.lhs = index.range_upto(n);
  std::int64_t rhs = 0;
  for (std::int64_t i = 0; i < blocks; ++i) {
    const auto a = rep.boundaries[static_cast<std::size_t>(i)];
    const auto b = rep.boundaries[static_cast<std::size_t>(i + 1)];
    rep.block_sizes.push_back(index.subrange_size(a, b));
    rhs += rep.block_sizes.back();
  }
  // level l has 2^l blocks; sibling pairs (2i-1, 2i) share the boundary of level l-1
  for (int l = 1; l <= levels; ++l) {
    const std::int64_t stride = std::int64_t(1) << (levels - l);
    std::int64_t level_sum = 0;
    for (std::int64_t i = 0; i < (std::int64_t(1) << (l - 1)); ++i) {
      const auto a = rep.boundaries[static_cast<std::size_t>(2 * i * stride)];
      const auto b = rep.boundaries[static_cast<std::size_t>((2 * i + 1) * stride)];
      const auto c = rep.boundaries[static_cast<std::size_t>((2 * i + 2) * stride)];
      level_sum += index.subrange_intersection(a, b, b, c);
    }
    rep.cross.push_back(level_sum);
    rhs -= level_sum;
  }
  rep.rhs = rhs;
  return rep;
}

double GammaEstimate::joint_se() const { return std::sqrt(se_range * se_range + se_return * se_return); }

namespace {

template <class Key>
void range_and_return(const KeyCodec& codec, std::int64_t n, RngStream& rng, std::int64_t* volume,
                      bool* returned) {
  thread_local SiteTable<Key, std::uint8_t> table(1024);
  table.clear();
  table.reserve(static_cast<std::size_t>(n + 1));
  const Key origin = codec.origin<Key>();
  bool ret = false;
  std::int64_t calls = 0;
  stream_walk_keys<Key>(codec, n, rng, [&](Key k) {
    if (calls++ > 0 && k == origin) ret = true;
    table.insert(k);
  });
  *volume = static_cast<std::int64_t>(table.size());
  *returned = ret;
}

}  // namespace

GammaEstimate estimate_gamma(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                             std::uint64_t first_stream) {
  require(dim >= 3, "estimate_gamma: the walk must be transient (d >= 3)");
  require(n >= 1 && samples >= 2, "estimate_gamma: need n >= 1 and at least two samples");
  std::vector<std::int64_t> volumes(static_cast<std::size_t>(samples));
  std::vector<char> escaped(static_cast<std::size_t>(samples));
  const KeyCodec codec(dim, n);
  parallel_for(samples, [&](std::int64_t i) {
    RngStream rng(seed, first_stream + static_cast<std::uint64_t>(i));
    bool returned = false;
    std::int64_t v = 0;
    if (codec.fits64()) range_and_return<std::uint64_t>(codec, n, rng, &v, &returned);
    else range_and_return<u128>(codec, n, rng, &v, &returned);
    volumes[static_cast<std::size_t>(i)] = v;
    escaped[static_cast<std::size_t>(i)] = returned ? 0 : 1;
  });
  std::vector<double> ratio(volumes.size());
  std::int64_t esc = 0;
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    ratio[i] = static_cast<double>(volumes[i]) / static_cast<double>(n + 1);
    esc += escaped[i];
  }
  const SampleMoments m = sample_moments(ratio);
  GammaEstimate g;
  g.samples = samples;
  g.steps = n;
  g.by_range = m.mean;
  g.se_range = m.se_mean;
  g.by_return = static_cast<double>(esc) / static_cast<double>(samples);
  g.se_return = std::sqrt(std::max(g.by_return * (1 - g.by_return), 1.0 / static_cast<double>(samples)) /
                          static_cast<double>(samples));
  return g;
}

std::vector<std::int64_t> sample_range_volumes(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                                               std::uint64_t first_stream) {
  require(samples >= 0 && n >= 0, "sample_range_volumes: negative count");
  std::vector<std::int64_t> out(static_cast<std::size_t>(samples));
  parallel_for(samples, [&](std::int64_t i) {
    RngStream rng(seed, first_stream + static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = streamed_range(dim, n, rng);
  });
  return out;
}

MomentReport moment_report(int dim, std::int64_t n, const std::vector<std::int64_t>& volumes) {
  std::vector<double> xs(volumes.begin(), volumes.end());
  MomentReport r;
  r.dim = dim;
  r.steps = n;
  r.moments = sample_moments(xs);
  return r;
}

MomentReport moment_report(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                           std::uint64_t first_stream) {
  return moment_report(dim, n, sample_range_volumes(dim, n, samples, seed, first_stream));
}

}  // namespace rangelab
