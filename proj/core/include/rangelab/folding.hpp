#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rangelab/green.hpp"
#include "rangelab/occupancy.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/site_set.hpp"

namespace rangelab {

/// K_n(r, rho) = {k <= n : l_n(Q(S_k, r)) >= rho r^d}, sorted.
std::vector<std::int64_t> compute_Kn(const OccupancyIndex& occ, std::int64_t r, double rho);
/// K*_n(r, rho) = {k : rho r^d <= l_n(Q(S_k, r)) <= 2 rho r^d}, sorted.
std::vector<std::int64_t> compute_Kn_star(const OccupancyIndex& occ, std::int64_t r, double rho);

struct SeparatedCore {
  std::vector<std::int64_t> chosen;  // k_1 < k_2 < ...
  SiteSet centers;
  std::int64_t min_separation = 0;   // over chosen centres; at least r by construction
  double cardinality_floor = 0.0;    // |K*| / (2 4^d rho r^d)
  bool cardinality_ok = false;
  bool covered = false;              // every S_k, k in K*, lies in some Q(S_{k_i}, 2r)
};

/// Greedy: k_{i+1} = min K* \ {k : S_k in Q(S_{k_j}, 2r) for some j <= i}.
SeparatedCore separated_core(const OccupancyIndex& occ, const std::vector<std::int64_t>& kstar, std::int64_t r,
                             double rho);

struct FoldingSet {
  std::int64_t r = 1;
  double rho = 0.0;
  std::vector<LatticePoint> cells;  // C_n(r, rho), grid points in rZ^d, sorted
  std::int64_t local_time = 0;      // l_n(V_n)
  std::int64_t volume() const;      // |V_n| = r^d |C_n|
  SiteSet sites() const;            // V_n as a site set
};

FoldingSet compute_Cn_Vn(const WalkPath& path, std::int64_t r, double rho);

struct TypicalParams {
  double rho_typ = 0.0;
  double tau_typ = 0.0;
  double chi = 0.0;
  std::int64_t r_n = 0;
};

/// Smallest integer r >= 1 with rho r^{d-2} >= C0 log n.
std::int64_t probe_scale(int d, double rho, double log_n, double c0_density = 1.0);

/// Rejects d = 4.
TypicalParams typical_params(int d, std::int64_t n, double zeta, double c0_density = 1.0);
TypicalParams typical_params_log(int d, double log_n, std::int64_t n, double zeta, double c0_density = 1.0);

struct ScheduleOptions {
  double c0_density = 1.0;  // C0 in rho_i r_i^{d-2} = C0 log n
  double c0_cutoff = 0.125; // c0 in rho_I <= c0 zeta / n (d = 3)
  double horizon_constant = -1.0;  // c_T; <= 0 selects 1 for d >= 4 and 1/8 for d = 3
  double log_n = -1.0;      // override log n (tests)
};

struct ScaleLevel {
  int i = 0;
  double rho = 0.0;
  std::int64_t r = 0;
  double L = 0.0;
  bool reachable = false;  // rho r^d <= n + 1, otherwise K_n(r, rho) is empty
};

struct ScaleSchedule {
  int d = 0;
  std::int64_t n = 0;
  double zeta = 0.0;
  double log_n = 0.0;
  ScheduleOptions options;
  std::vector<ScaleLevel> levels;  // i = 1, 2, ...
  int cutoff = 0;                  // d = 3: I; otherwise 0
  std::int64_t T = 0;
  std::vector<std::string> warnings;

  /// Level holding the indices outside every K_n(r_j, rho_j): I for d = 3,
  /// levels.size() + 1 (standing for infinity) otherwise.
  int residual_level() const noexcept;
  /// Levels whose K_n(r_i, rho_i) define the partition: residual_level() - 1.
  int defining_levels() const noexcept { return residual_level() - 1; }
  const ScaleLevel& level(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
};

ScaleSchedule scale_schedule(int d, std::int64_t n, double zeta, const ScheduleOptions& opt = {});

struct HatPartition {
  int residual = 0;                       // see ScaleSchedule::residual_level
  std::vector<int> site_level;            // per site id
  std::vector<std::int64_t> kn_size;      // |K_n(r_i, rho_i)|, index i (0 unused)
  std::vector<std::int64_t> hat_size;     // |K^_i|, index i = 1..residual
  bool disjoint_cover = false;
  bool shell_property = false;            // k in K^_i, i > 1 => l_n(Q(S_k, r_{i-1})) < rho_{i-1} r_{i-1}^d
  int level_of_step(const RangeIndex& index, std::int64_t k) const {
    return site_level[static_cast<std::size_t>(index.site_at(k))];
  }
};

HatPartition hat_partition(const OccupancyIndex& occ, const ScaleSchedule& schedule);

struct SigmaBudget {
  double sigma[6] = {0, 0, 0, 0, 0, 0};  // sigma[1..5]
  double corrector = 0.0;
  double total() const { return sigma[1] + sigma[2] + sigma[3] + 2 * sigma[4] + sigma[5]; }
  bool inequality_holds = false;  // corrector <= total, up to summation rounding
  bool sigma1_bound = false;      // sigma_1 <= |K^_1| (T + 1) / T
};

SigmaBudget sigma_budget(const OccupancyIndex& occ, const ScaleSchedule& schedule, const HatPartition& hat,
                         const GreenTable& table);

struct EventParams {
  double A = 1.0;
  double delta = 0.125;
  int I = 3;  // d >= 5: levels 1..I need |K^_i| <= delta L_i; d = 3: J
};

struct FoldingEventCheck {
  bool event_holds = false;
  double corrector = 0.0;
  double zeta = 0.0;
  bool counterexample() const { return event_holds && corrector > zeta; }
};

/// Bound on |K^_i| in the event: delta L_i or A L_i, negative for levels the
/// event does not constrain.
double event_threshold(const ScaleSchedule& schedule, const EventParams& p, int i);

FoldingEventCheck folding_event_check(const HatPartition& hat, const ScaleSchedule& schedule, const EventParams& p,
                                      double corrector_value);

struct NestingCheck {
  int checked_levels = 0;
  std::int64_t violations = 0;            // k in K_n(r_i, rho_i) missing from K_n(r_I, 2^{2(i-I)/(d-2)} rho_I)
  std::int64_t continuous_violations = 0; // same with the unrounded scales r = (C0 log n / rho)^{1/(d-2)}
};

/// K_n(r_i, rho_i) inside K_n(r_I, 2^{2(i-I)/(d-2)} rho_I) for i <= I.
NestingCheck nesting_check(const OccupancyIndex& occ, const ScaleSchedule& schedule, int I);

/// K_n(r, rho) against the union of K*_n(r, 2^i rho), i >= 0.
bool dyadic_cover_holds(const OccupancyIndex& occ, std::int64_t r, double rho);

struct FoldingReportOptions {
  EventParams event;
  bool budget = true;
  double beta = 1.0;                      // V_n is taken at (r_n, beta rho_typ)
  const GreenFunction* green = nullptr;   // when set, cap(V_n) is solved exactly
  std::size_t max_capacity_sites = 5000;
};

/// Full per-path report.
struct FoldingReport {
  ScaleSchedule schedule;
  HatPartition hat;
  SigmaBudget budget;
  FoldingEventCheck event;
  bool dyadic_cover_ok = true;  // on every reachable defining level
  FoldingSet vn;
  double cap_vn = -1.0;         // negative when not computed
  double cap_ratio = -1.0;      // cap(V_n) / |V_n|^{1 - 2/d}
};

FoldingReport folding_report(const WalkPath& path, const ScaleSchedule& schedule, const GreenTable& table,
                             const FoldingReportOptions& opt = {});

}  // namespace rangelab
