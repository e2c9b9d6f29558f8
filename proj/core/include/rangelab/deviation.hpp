#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rangelab/lattice.hpp"
#include "rangelab/stats.hpp"
#include "rangelab/walk.hpp"

namespace rangelab {

/// zeta^{1-2/d} for d >= 4, (zeta^2 / n)^{1/3} for d = 3.
double rate_coordinate(int d, std::int64_t n, double zeta);

/// Mean and variance of |R_n| from a sample whose streams are disjoint from
/// every experiment stream.
struct Calibration {
  int dim = 0;
  std::int64_t steps = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t first_stream = 0;
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double sigma2() const { return variance / static_cast<double>(steps); }
};

Calibration calibrate(int d, std::int64_t n, std::int64_t samples, std::uint64_t seed, std::uint64_t first_stream);
Calibration calibrate(int d, std::int64_t n, std::span<const std::int64_t> volumes, std::uint64_t seed,
                      std::uint64_t first_stream);

enum class EstimatorKind { kDirect, kConfinedLowerBound };
const char* estimator_name(EstimatorKind k);

struct DeviationEstimate {
  int dim = 0;
  std::int64_t steps = 0;
  double zeta = 0.0;
  EstimatorKind estimator = EstimatorKind::kDirect;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
  double p_hat = 0.0;       // with zero hits: the one-sided upper bound
  Interval ci;
  bool one_sided = false;
  double rate_coordinate = 0.0;
  double log_p = 0.0;
  double log_ci_low = 0.0;
  double log_ci_high = 0.0;
  // confined lower bound only
  double log_p_event = 0.0;           // log P(E)
  double p_deviation_given_event = 0.0;
  std::int64_t replicates = 0;
  std::int64_t confinement_steps = 0; // m
  std::int64_t box_volume = 0;
  std::vector<std::string> warnings;
};

/// P(|R_n| - E|R_n| <= -zeta) from walks on streams first_stream.., centred
/// with the calibration mean.
DeviationEstimate direct_tail(const Calibration& cal, double zeta, std::int64_t samples, std::uint64_t seed,
                              std::uint64_t first_stream);
/// Same from a precomputed volume sample.
DeviationEstimate direct_tail(const Calibration& cal, double zeta, std::span<const std::int64_t> volumes);

/// Axis-aligned lattice box lo_j <= x_j <= hi_j containing the origin.
struct ConfinementBox {
  int dim = 0;
  std::array<std::int64_t, kMaxDim> lo{};
  std::array<std::int64_t, kMaxDim> hi{};

  /// Lattice points of Q(0, side).
  static ConfinementBox cube(int dim, double side);
  /// Sides in {L, L + 1} whose product is closest to the target volume.
  static ConfinementBox with_volume(int dim, double volume);

  std::int64_t side(int j) const { return hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)] + 1; }
  std::int64_t volume() const;
  bool contains(const LatticePoint& p) const;
  /// Per-step survival rate of the walk killed on leaving the box:
  /// (1/d) sum_j cos(pi / (side_j + 1)).
  double survival_rate() const;
};

enum class ConfinedMode { kAuto, kRejection, kCloning, kGuided };
const char* confined_mode_name(ConfinedMode m);

struct ConfinedOptions {
  ConfinedMode mode = ConfinedMode::kAuto;
  std::int64_t population = 1000;
  double resample_ess = 0.5;             // guided mode resamples when ESS < this * population
  double rejection_threshold = 1e-4;     // kAuto picks rejection above this predicted acceptance
  std::int64_t rejection_budget = 10000000;
};

/// Walks whose first m steps stay in a box. The estimate of P(R_m in box) is
/// unbiased in every mode: rejection counts acceptances, cloning kills walkers
/// that leave and refills the population uniformly, guided moves propose only
/// steps that stay inside and carry the weight (allowed moves) / 2d.
struct ConfinedRun {
  ConfinedMode mode = ConfinedMode::kRejection;
  std::int64_t m = 0;
  std::vector<WalkPath> paths;     // equally weighted draws of the conditioned first m steps
  double log_z = 0.0;              // log of the P(R_m in box) estimate
  double unweighted_survival = 0.0;// cloning: mean survivor fraction per step
  std::int64_t trials = 0;         // rejection: walks drawn
  std::int64_t accepted = 0;
  int resamples = 0;
  double acceptance_rate() const { return trials > 0 ? static_cast<double>(accepted) / trials : 0.0; }
};

ConfinedRun confined_sampler(const ConfinementBox& box, std::int64_t m, const ConfinedOptions& opt,
                             std::uint64_t seed, std::uint64_t stream);

/// P(R_m in box) over independent replicates: mean, standard error and the
/// per-replicate log estimates.
struct ConfinementEstimate {
  double p = 0.0;
  double se = 0.0;
  double log_p = 0.0;
  std::vector<double> log_z;
  ConfinedMode mode = ConfinedMode::kRejection;
};

ConfinementEstimate estimate_confinement(const ConfinementBox& box, std::int64_t m, int replicates,
                                         const ConfinedOptions& opt, std::uint64_t seed,
                                         std::uint64_t first_stream);

struct LowerBoundOptions {
  double gamma = 0.0;           // gamma_d for m = floor(3 zeta / gamma), d >= 4; required
  double d3_box_factor = 0.25;  // d = 3: box volume (b (n^2 / zeta)^{1/3})^3, m = floor(n / 2)
  int replicates = 8;
  ConfinedOptions sampler{ConfinedMode::kGuided};
};

struct LowerBoundPlan {
  ConfinementBox box;
  std::int64_t m = 0;
};

LowerBoundPlan lower_bound_plan(int d, std::int64_t n, double zeta, const LowerBoundOptions& opt);

/// P(E) * P(|R_n| - E|R_n| <= -zeta | E) for the confinement event E, each
/// replicate continuing its conditioned population freely for n - m steps.
DeviationEstimate lower_bound_experiment(const Calibration& cal, double zeta, const LowerBoundOptions& opt,
                                         std::uint64_t seed, std::uint64_t first_stream);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  int points = 0;
};

/// Weighted least squares of log p against the rate coordinate, weights from
/// the widths of the log-scale confidence intervals.
RateFit rate_fit(std::span<const DeviationEstimate> estimates);

struct MgfPoint {
  double theta = 0.0;
  double t = 0.0;           // theta zeta / n
  double scaled = 0.0;      // (n / zeta^2) log E exp(t (|R_n| - E|R_n|))
  double se = 0.0;
  double predicted = 0.0;   // sigma^2 theta^2 / 2
  double rel_gap = 0.0;
  double min_ess_fraction = 1.0;
  bool truncated = false;
};

struct GaussianMgfOptions {
  int levels = 6;                     // 2^levels blocks
  std::int64_t block_samples = 200;   // pool size per block position
  std::int64_t concatenations = 200;  // tilted concatenations per theta
  int replicates = 5;
  std::int64_t cross_calibration = 1000;  // plain walks for E[C]
  double min_ess_fraction = 0.01;
};

struct GaussianMgfReport {
  int dim = 0;
  std::int64_t steps = 0;
  double zeta = 0.0;
  double sigma2 = 0.0;
  double mean_cross = 0.0;  // E[C], C = sum of block ranges - |R_n|
  std::vector<MgfPoint> points;
  double max_rel_gap = 0.0;
  double max_symmetry_z = 0.0;  // largest |value(theta) - value(-theta)| / joint se
  std::vector<std::string> warnings;
};

/// Scaled log-MGF via |R_n| = sum_i |B_i| - C over 2^L blocks: the block
/// factors are sample cumulants per position, and E_Q[exp(-t C)] is averaged
/// over concatenations of blocks resampled with weights exp(t |B|).
GaussianMgfReport gaussian_mgf_check(const Calibration& cal, double zeta, std::span<const double> thetas,
                                     const GaussianMgfOptions& opt, std::uint64_t seed, std::uint64_t first_stream);

struct TailRow {
  std::int64_t t = 0;
  std::int64_t exceed = 0;  // pairs with |R ∩ R~| > t
  double p = 0.0;
  Interval ci;
};

struct IntersectionTail {
  std::int64_t horizon = 0;
  std::int64_t pairs = 0;
  std::vector<TailRow> rows;  // t = 0, 1, ..., largest observed
  LinearFit fit;              // log P against t^{1-2/d}
  std::int64_t fit_t_min = 0;
  std::int64_t fit_t_max = 0;
};

struct IntersectionTailOptions {
  std::int64_t horizon = 100000;
  std::int64_t pairs = 100000;
  std::int64_t min_exceed = 30;  // fit range: t with at least this many exceedances
  std::int64_t fit_t_min = 1;
};

struct IntersectionTailReport {
  int dim = 0;
  IntersectionTail base;     // horizon H
  IntersectionTail doubled;  // horizon 2H, same pairs
  double slope_drift = 0.0;  // |slope_2H - slope_H| / |slope_H|
};

IntersectionTailReport intersection_tail(int d, const IntersectionTailOptions& opt, std::uint64_t seed,
                                         std::uint64_t first_stream);
IntersectionTail tail_table(std::span<const std::int64_t> sizes, int d, std::int64_t horizon,
                            const IntersectionTailOptions& opt);

}  // namespace rangelab
