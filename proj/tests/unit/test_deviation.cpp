#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rangelab/deviation.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/range_stats.hpp"

using namespace rangelab;

namespace {

// P(walk stays in box for m steps) by forward iteration of the killed chain.
double exact_confinement(const ConfinementBox& box, std::int64_t m) {
  const int d = box.dim;
  std::vector<std::int64_t> stride(static_cast<std::size_t>(d));
  std::int64_t total = 1;
  for (int j = 0; j < d; ++j) {
    stride[static_cast<std::size_t>(j)] = total;
    total *= box.side(j);
  }
  std::vector<double> cur(static_cast<std::size_t>(total), 0.0), next(cur.size());
  std::int64_t origin = 0;
  for (int j = 0; j < d; ++j) origin += -box.lo[static_cast<std::size_t>(j)] * stride[static_cast<std::size_t>(j)];
  cur[static_cast<std::size_t>(origin)] = 1.0;
  const double w = 1.0 / (2 * d);
  for (std::int64_t step = 0; step < m; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const double p = cur[static_cast<std::size_t>(idx)];
      if (p == 0.0) continue;
      std::int64_t rest = idx;
      for (int j = 0; j < d; ++j) {
        const std::int64_t c = rest % box.side(j);
        rest /= box.side(j);
        const auto s = stride[static_cast<std::size_t>(j)];
        if (c > 0) next[static_cast<std::size_t>(idx - s)] += w * p;
        if (c + 1 < box.side(j)) next[static_cast<std::size_t>(idx + s)] += w * p;
      }
    }
    cur.swap(next);
  }
  double mass = 0.0;
  for (double p : cur) mass += p;
  return mass;
}

DeviationEstimate synthetic(double x, double log_p, double half_width) {
  DeviationEstimate e;
  e.rate_coordinate = x;
  e.log_p = log_p;
  e.log_ci_low = log_p - 1.96 * half_width;
  e.log_ci_high = log_p + 1.96 * half_width;
  return e;
}

std::vector<std::int64_t> volumes(int d, std::int64_t n, std::int64_t samples, std::uint64_t seed) {
  return sample_range_volumes(d, n, samples, seed, 0);
}

}  // namespace

TEST(RateFitTest, RecoversSyntheticSlope) {
  std::vector<DeviationEstimate> es;
  for (double x : {1.0, 2.0, 3.5, 5.0, 8.0}) es.push_back(synthetic(x, 0.3 - 2.0 * x, 0.1));
  const auto fit = rate_fit(es);
  EXPECT_NEAR(fit.slope, -2.0, 1e-10);
  EXPECT_NEAR(fit.intercept, 0.3, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 5);
}

TEST(RateFitTest, RejectsTooFewOrDegenerate) {
  std::vector<DeviationEstimate> es;
  for (double x : {1.0, 2.0, 3.0}) es.push_back(synthetic(x, -x, 0.1));
  EXPECT_THROW(rate_fit(es), ContractError);
  // one-sided estimates do not count as points
  auto bound = synthetic(4.0, -4.0, 0.1);
  bound.one_sided = true;
  es.push_back(bound);
  EXPECT_THROW(rate_fit(es), ContractError);
  std::vector<DeviationEstimate> flat;
  for (double y : {-1.0, -2.0, -3.0, -4.0}) flat.push_back(synthetic(2.0, y, 0.1));
  EXPECT_THROW(rate_fit(flat), ContractError);
}

TEST(RateCoordinate, Values) {
  EXPECT_NEAR(rate_coordinate(5, 1000, 243.0), std::pow(243.0, 0.6), 1e-9);
  EXPECT_NEAR(rate_coordinate(3, 1000, 100.0), std::cbrt(100.0 * 100.0 / 1000.0), 1e-12);
}

TEST(DirectTail, MedianAndMonotone) {
  const auto vols = volumes(5, 2000, 2000, 21);
  const auto cal = calibrate(5, 2000, volumes(5, 2000, 1000, 22), 22, 0);
  const auto zero = direct_tail(cal, 0.0, vols);
  EXPECT_NEAR(zero.p_hat, 0.5, 0.1);
  double prev = 1.0;
  for (double zeta : {0.0, 10.0, 20.0, 40.0, 80.0}) {
    const auto e = direct_tail(cal, zeta, vols);
    EXPECT_LE(e.p_hat, prev);
    EXPECT_LE(e.ci.low, e.p_hat);
    EXPECT_GE(e.ci.high, e.p_hat);
    prev = e.p_hat;
  }
}

TEST(DirectTail, ZeroHitsGiveOneSidedBound) {
  const auto vols = volumes(3, 500, 200, 23);
  const auto cal = calibrate(3, 500, vols, 23, 0);
  const auto e = direct_tail(cal, 1e6, vols);
  EXPECT_EQ(e.hits, 0);
  EXPECT_TRUE(e.one_sided);
  EXPECT_GT(e.p_hat, 0.0);
  EXPECT_NEAR(e.p_hat, wilson_interval(0, 200, 1.6448536269514722).high, 1e-12);
}

TEST(ConfinementBoxTest, CubeAndVolume) {
  const auto c = ConfinementBox::cube(3, 15.0);
  EXPECT_EQ(c.volume(), 15 * 15 * 15);
  EXPECT_TRUE(c.contains(LatticePoint{7, -7, 0}));
  EXPECT_FALSE(c.contains(LatticePoint{8, 0, 0}));
  for (double v : {32.0, 100.0, 243.0, 1000.0, 5000.0}) {
    const auto b = ConfinementBox::with_volume(5, v);
    EXPECT_TRUE(b.contains(LatticePoint(5)));
    std::int64_t mn = b.side(0), mx = b.side(0);
    for (int j = 1; j < 5; ++j) {
      mn = std::min(mn, b.side(j));
      mx = std::max(mx, b.side(j));
    }
    EXPECT_LE(mx - mn, 1) << v;
    const double L = std::floor(std::pow(v, 0.2));
    EXPECT_GE(static_cast<double>(b.volume()), std::pow(L, 5)) << v;
    EXPECT_LE(static_cast<double>(b.volume()), std::pow(L + 1, 5)) << v;
  }
}

TEST(ConfinedSampler, LargeBoxAcceptsEverything) {
  const std::int64_t m = 20;
  const auto box = ConfinementBox::cube(3, 2.0 * m + 1);
  ConfinedOptions opt;
  opt.mode = ConfinedMode::kRejection;
  opt.population = 100;
  const auto run = confined_sampler(box, m, opt, 1, 0);
  EXPECT_EQ(run.accepted, run.trials);
  EXPECT_DOUBLE_EQ(run.acceptance_rate(), 1.0);
  EXPECT_NEAR(run.log_z, 0.0, 1e-12);
  ASSERT_EQ(run.paths.size(), 100u);
  for (const auto& p : run.paths) EXPECT_EQ(p.steps(), m);
}

TEST(ConfinedSampler, PathsStayInBox) {
  const auto box = ConfinementBox::cube(3, 5.0);
  for (auto mode : {ConfinedMode::kRejection, ConfinedMode::kCloning, ConfinedMode::kGuided}) {
    ConfinedOptions opt;
    opt.mode = mode;
    opt.population = 200;
    const auto run = confined_sampler(box, 30, opt, 2, 0);
    for (const auto& p : run.paths)
      for (const auto& x : p.positions()) ASSERT_TRUE(box.contains(x)) << confined_mode_name(mode);
  }
}

TEST(ConfinedSampler, RejectionBudget) {
  ConfinedOptions opt;
  opt.mode = ConfinedMode::kRejection;
  opt.population = 100;
  opt.rejection_budget = 1000;
  EXPECT_THROW(confined_sampler(ConfinementBox::cube(3, 3.0), 200, opt, 3, 0), ResourceError);
}

TEST(ConfinedSampler, ModesAgreeWithExactSurvival) {
  const auto box = ConfinementBox::cube(3, 7.0);
  const std::int64_t m = 30;
  const double exact = exact_confinement(box, m);
  std::uint64_t stream = 0;
  for (auto mode : {ConfinedMode::kRejection, ConfinedMode::kCloning, ConfinedMode::kGuided}) {
    ConfinedOptions opt;
    opt.mode = mode;
    opt.population = 2000;
    const auto est = estimate_confinement(box, m, 8, opt, 4, stream);
    stream += 100000;
    EXPECT_LT(std::abs(est.p - exact), 4 * est.se) << confined_mode_name(mode) << " p=" << est.p << " exact=" << exact;
  }
}

TEST(ConfinedSampler, RareConfinementTwoSeedSets) {
  // d = 3, m = 1000, side 15: far below rejection range
  const auto box = ConfinementBox::cube(3, 15.0);
  const std::int64_t m = 1000;
  const double exact = exact_confinement(box, m);
  ConfinedOptions opt;
  opt.mode = ConfinedMode::kGuided;
  opt.population = 1000;
  const auto a = estimate_confinement(box, m, 6, opt, 5, 0);
  const auto b = estimate_confinement(box, m, 6, opt, 5, 1000000);
  EXPECT_LT(std::abs(a.p - b.p), 3 * std::hypot(a.se, b.se));
  EXPECT_LT(std::abs(a.p - exact), 4 * a.se) << "exact=" << exact;
  // cloning keeps the unweighted survivor product
  opt.mode = ConfinedMode::kCloning;
  const auto c = estimate_confinement(box, m, 6, opt, 5, 2000000);
  EXPECT_LT(std::abs(c.p - exact), 4 * c.se) << "exact=" << exact;
}

TEST(ConfinedSampler, LogSurvivalLinearInSteps) {
  const auto box = ConfinementBox::cube(3, 9.0);
  std::vector<double> x, y, w;
  ConfinedOptions opt;
  opt.mode = ConfinedMode::kGuided;
  opt.population = 500;
  for (std::int64_t m : {200, 400, 600, 800}) {
    const auto est = estimate_confinement(box, m, 4, opt, 6, static_cast<std::uint64_t>(m) * 10000);
    x.push_back(static_cast<double>(m));
    y.push_back(est.log_p);
    w.push_back(1.0);
  }
  const auto fit = weighted_linear_fit(x, y, w);
  EXPECT_GT(fit.r_squared, 0.99);
  // slope close to log of the killed-chain rate
  EXPECT_NEAR(fit.slope, std::log(box.survival_rate()), 0.1 * std::abs(std::log(box.survival_rate())));
}

TEST(LowerBound, BelowDirectEstimate) {
  const std::int64_t n = 4000;
  const auto cal = calibrate(5, n, 400, 7, 0);
  const double zeta = std::sqrt(cal.variance);
  const auto direct = direct_tail(cal, zeta, 2000, 7, 1000);
  LowerBoundOptions opt;
  opt.gamma = 0.865;
  opt.replicates = 3;
  opt.sampler.population = 200;
  const auto lower = lower_bound_experiment(cal, zeta, opt, 7, 100000);
  EXPECT_EQ(lower.estimator, EstimatorKind::kConfinedLowerBound);
  EXPECT_LT(lower.log_p, 0.0);
  EXPECT_LE(lower.ci.low, direct.ci.high);
}

TEST(LowerBound, PlanRequiresGamma) {
  LowerBoundOptions opt;
  EXPECT_THROW(lower_bound_plan(5, 10000, 300.0, opt), ContractError);
  opt.gamma = 0.865;
  const auto plan = lower_bound_plan(5, 10000, 300.0, opt);
  EXPECT_EQ(plan.m, static_cast<std::int64_t>(std::floor(900.0 / 0.865)));
  const auto p3 = lower_bound_plan(3, 10000, 1000.0, opt);
  EXPECT_EQ(p3.m, 5000);
}

TEST(GaussianMgf, ZeroThetaIsZero) {
  const auto cal = calibrate(5, 1024, 100, 8, 0);
  GaussianMgfOptions opt;
  opt.levels = 2;
  opt.block_samples = 20;
  opt.concatenations = 20;
  opt.replicates = 2;
  opt.cross_calibration = 20;
  const std::vector<double> thetas = {0.0, 0.5};
  const auto rep = gaussian_mgf_check(cal, 100.0, thetas, opt, 8, 1000);
  ASSERT_GE(rep.points.size(), 1u);
  EXPECT_EQ(rep.points[0].theta, 0.0);
  EXPECT_NEAR(rep.points[0].scaled, 0.0, 1e-12);
  EXPECT_NEAR(rep.points[0].predicted, 0.0, 1e-12);
}

TEST(IntersectionTailTest, OriginIsAlwaysShared) {
  IntersectionTailOptions opt;
  opt.horizon = 500;
  opt.pairs = 200;
  opt.min_exceed = 5;
  const auto rep = intersection_tail(5, opt, 9, 0);
  ASSERT_FALSE(rep.base.rows.empty());
  EXPECT_EQ(rep.base.rows[0].t, 0);
  EXPECT_DOUBLE_EQ(rep.base.rows[0].p, 1.0);
  EXPECT_DOUBLE_EQ(rep.doubled.rows[0].p, 1.0);
  for (std::size_t i = 1; i < rep.base.rows.size(); ++i) EXPECT_LE(rep.base.rows[i].p, rep.base.rows[i - 1].p);
}

TEST(IntersectionTailTest, TableCountsExceedances) {
  const std::vector<std::int64_t> sizes = {1, 1, 2, 3, 3, 3, 5, 8};
  IntersectionTailOptions opt;
  opt.min_exceed = 1;
  const auto tab = tail_table(sizes, 5, 100, opt);
  ASSERT_GE(tab.rows.size(), 8u);
  EXPECT_EQ(tab.rows[0].exceed, 8);
  EXPECT_EQ(tab.rows[1].exceed, 6);
  EXPECT_EQ(tab.rows[3].exceed, 2);
  EXPECT_EQ(tab.rows[5].exceed, 1);
  EXPECT_EQ(tab.rows[7].exceed, 1);
  EXPECT_DOUBLE_EQ(tab.rows[1].p, 0.75);
}
