#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rangelab/green.hpp"
#include "rangelab/site_set.hpp"
#include "rangelab/stats.hpp"

namespace rangelab {

enum class CapacityMethod { kExact, kMonteCarlo };

struct EquilibriumSolution {
  SiteSet sites;
  std::vector<double> e;  // e(y) = P_y(no return to the set), in site order
  double cap = 0.0;
  CapacityMethod method = CapacityMethod::kExact;
  double error_bar = 0.0;

  // exact solves
  double residual = 0.0;  // max_x |sum_y G(y - x) e(y) - 1|
  double rcond = 0.0;     // reciprocal condition estimate of the Green matrix
  std::string warning;

  // Monte Carlo
  std::int64_t trials_per_site = 0;
  double escape_radius = 0.0;
  double raw_cap = 0.0;              // sum of raw escape frequencies
  double se = 0.0;                   // batch-means standard error of cap
  double bias_bound = 0.0;           // residual bias after the return correction
  double sphere_return_bound = 0.0;  // sup_{|y| = R} sum_x G(x - y)
};

struct CapacityOptions {
  std::size_t max_sites = 5000;
  double rcond_warning = 1e-10;
  int refinement_steps = 2;
};

/// Solves sum_y G(y - x) e(y) = 1 for x in the set (last-exit decomposition).
EquilibriumSolution capacity_exact(const SiteSet& set, const GreenFunction& green, const CapacityOptions& opt = {});

struct CapacityMcOptions {
  std::int64_t trials_per_site = 2000;
  double escape_radius = -1.0;  // default max(4 diam, 64)
  int batches = 40;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
};

/// Escape simulation from every site. A walk counts as escaped when it leaves
/// the ball of radius R around the set's centre before returning to the set.
/// Returns after escape are accounted for with the last-exit identity
/// P_Y(hit the set) = sum_x G(x - Y) e(x), so e solves (I + M) e = e_raw with
/// M_{xx'} = E_x[1{escaped} G(x' - Y)].
EquilibriumSolution capacity_mc(const SiteSet& set, const GreenFunction& green, const CapacityMcOptions& opt = {});

/// cap / |set|^{1 - 2/d}.
double capacity_volume_ratio(const SiteSet& set, double cap);
double capacity_volume_lower(const SiteSet& set, const GreenFunction& green);

struct CapacityTimeReport {
  double cap = 0.0;
  double sup_occupation = 0.0;  // sup_y sum_{x in set} G(x - y), over the set and its outer ring
  double product_ratio = 0.0;   // cap * sup_occupation / |set|
};

CapacityTimeReport capacity_time_inequality(const SiteSet& set, const GreenFunction& green);
CapacityTimeReport capacity_time_inequality(const SiteSet& set, const GreenFunction& green,
                                            const EquilibriumSolution& solved);

/// sup over y in `probe` of sum_{x in set} G(x - y).
double sup_green_potential(const SiteSet& set, const SiteSet& probe, const GreenFunction& green);

/// Centres with pairwise sup-distance > 2r.
class SeparatedSet {
 public:
  SeparatedSet() = default;
  /// Throws ContractError if two centres are within sup-distance 2r.
  SeparatedSet(std::int64_t r, SiteSet centers);

  std::int64_t r() const noexcept { return r_; }
  const SiteSet& centers() const noexcept { return centers_; }
  std::size_t size() const noexcept { return centers_.size(); }
  /// Union of Q(x, r) over the centres.
  SiteSet cube_union() const;

 private:
  std::int64_t r_ = 1;
  SiteSet centers_;
};

/// Smallest pairwise sup-distance (max int64 for fewer than two points).
std::int64_t min_separation(const SiteSet& points);

struct ExtractionResult {
  SeparatedSet subset;
  std::int64_t big_r = 0;        // R = floor(r |C|^{2/d^2})
  std::size_t greedy_count = 0;  // N before truncation
  std::size_t target = 0;        // floor(|C|^{1 - 2/d})
  double sup_occupation = 0.0;   // sup_y E_y[l_inf(union of Q(x, r), x in U)]
  double occupation_ratio = 0.0; // sup_occupation / r^2
  bool covers = false;           // C inside the union of Q(z_i, R)
};

/// Greedy selection in lexicographic order of centres whose cubes Q(z, R/2)
/// are pairwise disjoint, truncated to floor(|C|^{1-2/d}) points.
ExtractionResult extract_high_capacity_subset(const SeparatedSet& c, const GreenFunction* green = nullptr);

struct FillingReport {
  double cap_union = 0.0;
  double rho = 0.0;
  std::int64_t steps = 0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
  double p_hat = 0.0;
  Interval ci;
  bool one_sided = false;  // zero hits: only the upper end is informative
  double log_p() const;
};

/// Monte Carlo estimate of P(l_n(Q(x, r)) >= rho r^d for all x in C).
FillingReport filling_probability_bound_check(const SeparatedSet& c, double rho, std::int64_t n, std::int64_t samples,
                                              const GreenFunction& green, std::uint64_t seed = 1);

}  // namespace rangelab
