#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rangelab/lattice.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/site_set.hpp"
#include "rangelab/stats.hpp"
#include "rangelab/walk.hpp"

namespace rangelab {

/// |R_k| = |{S_0, ..., S_k}|.
std::int64_t range_volume(const WalkPath& path, std::int64_t upto);

/// l_k(region) = number of j <= k with S_j in the region.
std::int64_t local_time(const WalkPath& path, const Cube& region, std::int64_t upto);
std::int64_t local_time(const WalkPath& path, const SiteSet& region, std::int64_t upto);

/// Occupation counts l_n(Q(x, r)) for the cubes x in rZ^d that the path visits.
struct LocalTimeField {
  int dim = 0;
  std::int64_t side = 1;
  std::unordered_map<LatticePoint, std::int64_t, LatticePointHash> counts;

  std::int64_t at(const LatticePoint& grid_point) const;
  std::int64_t total() const;
  std::int64_t max_count() const;
};

LocalTimeField occupancy_field(const WalkPath& path, std::int64_t side);

/// |R_A ∩ R_B| for two walks started at the origin.
std::int64_t intersect_ranges(const WalkPath& a, const WalkPath& b);

struct IdentityCheck {
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;
  bool exact() const noexcept { return lhs == rhs; }
};

/// |R_{n+m}| against |R_n| + |R[n, n+m]| - |R_n ∩ R[n, n+m]|.
IdentityCheck verify_inclusion_exclusion(const RangeIndex& index, std::int64_t n, std::int64_t m);

struct DyadicReport {
  int levels = 0;
  std::int64_t lhs = 0;                  // |R_n|
  std::int64_t rhs = 0;                  // sum of finest blocks minus all cross terms
  std::vector<std::int64_t> boundaries;  // floor(i n / 2^L), i = 0..2^L
  std::vector<std::int64_t> block_sizes; // |R_i^L|
  std::vector<std::int64_t> cross;       // per level l = 1..L, summed over sibling pairs
  bool exact() const noexcept { return lhs == rhs; }
};

/// Dyadic splitting of [0, n] into 2^L blocks with shared endpoints.
DyadicReport dyadic_decompose(const RangeIndex& index, int levels);

struct GammaEstimate {
  double by_range = 0.0;   // mean |R_n| / (n + 1)
  double se_range = 0.0;
  double by_return = 0.0;  // fraction of walks with no return to 0 in steps 1..n
  double se_return = 0.0;
  std::int64_t samples = 0;
  std::int64_t steps = 0;
  double joint_se() const;
};

GammaEstimate estimate_gamma(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                             std::uint64_t first_stream = 0);

/// |R_n| for walks drawn from streams first_stream .. first_stream + samples - 1.
std::vector<std::int64_t> sample_range_volumes(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                                               std::uint64_t first_stream = 0);

struct MomentReport {
  int dim = 0;
  std::int64_t steps = 0;
  SampleMoments moments;
  double var_over_n() const { return moments.variance / static_cast<double>(steps); }
};

MomentReport moment_report(int dim, std::int64_t n, std::int64_t samples, std::uint64_t seed,
                           std::uint64_t first_stream = 0);
MomentReport moment_report(int dim, std::int64_t n, const std::vector<std::int64_t>& volumes);

}  // namespace rangelab
