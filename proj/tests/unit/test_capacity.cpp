#include <gtest/gtest.h>

#include <cmath>

#include "rangelab/capacity.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/rng.hpp"

using namespace rangelab;

namespace {

SiteSet random_set(RngStream& rng, int d, std::size_t size, std::int64_t spread) {
  std::vector<LatticePoint> pts;
  while (pts.size() < size) {
    LatticePoint p(d);
    for (int j = 0; j < d; ++j) p[j] = static_cast<std::int64_t>(rng.below(2 * spread + 1)) - spread;
    pts.push_back(p);
    const SiteSet s(d, pts);
    pts = s.sites();
  }
  return SiteSet(d, pts);
}

const GreenFunction& green(int d) { return *GreenFunction::standard(d); }

}  // namespace

TEST(CapacityExact, Singleton) {
  const SiteSet one(3, {LatticePoint{0, 0, 0}});
  const auto sol = capacity_exact(one, green(3));
  EXPECT_NEAR(sol.cap, 1.0 / green(3)(LatticePoint{0, 0, 0}), 1e-12);
  EXPECT_NEAR(sol.cap, 0.659, 0.01 * 0.659);
}

TEST(CapacityExact, PairClosedForm) {
  const auto& g = green(3);
  for (const LatticePoint& z : {LatticePoint{1, 0, 0}, LatticePoint{1, 1, 0}, LatticePoint{3, -2, 1}}) {
    const SiteSet pair(3, {LatticePoint{0, 0, 0}, z});
    const auto sol = capacity_exact(pair, g);
    EXPECT_NEAR(sol.cap, 2.0 / (g(LatticePoint{0, 0, 0}) + g(z)), 1e-8);
  }
}

TEST(CapacityExact, FarPairDoublesSingleton) {
  const auto& g = green(3);
  const double single = capacity_exact(SiteSet(3, {LatticePoint{0, 0, 0}}), g).cap;
  const double far = capacity_exact(SiteSet(3, {LatticePoint{0, 0, 0}, LatticePoint{50, 0, 0}}), g).cap;
  EXPECT_NEAR(far, 2 * single, 0.01 * 2 * single);
}

TEST(CapacityExact, ResidualAndEquilibriumBounds) {
  RngStream rng(1, 0);
  for (int d : {3, 5}) {
    for (int t = 0; t < 10; ++t) {
      const SiteSet s = random_set(rng, d, 1 + rng.below(50), 4);
      const auto sol = capacity_exact(s, green(d));
      EXPECT_LT(sol.residual, 1e-8);
      EXPECT_GT(sol.cap, 0.0);
      EXPECT_LE(sol.cap, static_cast<double>(s.size()));
      for (double e : sol.e) {
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.0);
      }
    }
  }
}

TEST(CapacityExact, SiteLimit) {
  CapacityOptions opt;
  opt.max_sites = 10;
  EXPECT_THROW(capacity_exact(SiteSet::cube(LatticePoint{0, 0, 0}, 3), green(3), opt), ResourceError);
}

TEST(CapacityExact, MonotoneAndSubadditive) {
  RngStream rng(2, 0);
  const auto& g = green(3);
  for (int t = 0; t < 20; ++t) {
    const SiteSet big = random_set(rng, 3, 30, 4);
    std::vector<LatticePoint> part(big.begin(), big.begin() + 12), rest(big.begin() + 12, big.end());
    const SiteSet a(3, part), b(3, rest);
    const double ca = capacity_exact(a, g).cap, cb = capacity_exact(b, g).cap, cab = capacity_exact(big, g).cap;
    EXPECT_LE(ca, cab + 1e-10);
    EXPECT_LE(cb, cab + 1e-10);
    EXPECT_LE(cab, ca + cb + 1e-10);
  }
}

TEST(CapacityMc, SingletonFiveDimensions) {
  CapacityMcOptions opt;
  opt.trials_per_site = 20000;
  const auto sol = capacity_mc(SiteSet(5, {LatticePoint(5)}), green(5), opt);
  EXPECT_NEAR(sol.cap, 0.865, 3 * sol.error_bar + 0.005);
  EXPECT_GT(sol.error_bar, 0.0);
}

TEST(CapacityMc, AgreesWithExactOnSmallSets) {
  RngStream rng(3, 0);
  CapacityMcOptions opt;
  opt.trials_per_site = 2000;
  for (int d : {3, 5}) {
    for (int t = 0; t < 3; ++t) {
      const SiteSet s = random_set(rng, d, 5 + rng.below(10), 3);
      opt.first_stream += 1000;
      const auto mc = capacity_mc(s, green(d), opt);
      const auto ex = capacity_exact(s, green(d));
      EXPECT_LT(std::abs(mc.cap - ex.cap), 3 * mc.error_bar + 1e-3 * ex.cap) << "d=" << d << " t=" << t;
    }
  }
}

TEST(CapacityMc, RejectsBadParameters) {
  CapacityMcOptions opt;
  opt.trials_per_site = 0;
  EXPECT_THROW(capacity_mc(SiteSet(3, {LatticePoint{0, 0, 0}}), green(3), opt), ContractError);
  opt.trials_per_site = 10;
  opt.batches = 2;
  opt.escape_radius = 1.0;
  EXPECT_THROW(capacity_mc(SiteSet(3, {LatticePoint{0, 0, 0}, LatticePoint{4, 0, 0}}), green(3), opt),
               ContractError);
}

TEST(CapacityVolume, SingletonRatioIsCapacity) {
  const SiteSet one(5, {LatticePoint(5)});
  EXPECT_NEAR(capacity_volume_lower(one, green(5)), capacity_exact(one, green(5)).cap, 1e-12);
}

TEST(CapacityTime, SingletonAndPairEquality) {
  const auto one = capacity_time_inequality(SiteSet(3, {LatticePoint{0, 0, 0}}), green(3));
  EXPECT_NEAR(one.product_ratio, 1.0, 1e-9);
  const auto two = capacity_time_inequality(SiteSet(3, {LatticePoint{0, 0, 0}, LatticePoint{2, 1, 0}}), green(3));
  EXPECT_NEAR(two.product_ratio, 1.0, 1e-9);
}

TEST(CapacityTime, ProductAtLeastVolume) {
  RngStream rng(4, 0);
  for (int t = 0; t < 50; ++t) {
    const SiteSet s = random_set(rng, 3, 1 + rng.below(50), 5);
    const auto rep = capacity_time_inequality(s, green(3));
    ASSERT_GE(rep.product_ratio, 1.0 - 1e-6) << t;
  }
}

TEST(SeparatedSetTest, RejectsCloseCentres) {
  EXPECT_THROW(SeparatedSet(2, SiteSet(3, {LatticePoint{0, 0, 0}, LatticePoint{4, 0, 0}})), ContractError);
  EXPECT_NO_THROW(SeparatedSet(2, SiteSet(3, {LatticePoint{0, 0, 0}, LatticePoint{5, 0, 0}})));
}

TEST(Extraction, SingletonIsKept) {
  const SeparatedSet c(3, SiteSet(3, {LatticePoint{1, 2, 3}}));
  const auto res = extract_high_capacity_subset(c);
  EXPECT_EQ(res.subset.centers(), c.centers());
}

TEST(Extraction, GridBracketAndDeterminism) {
  for (int d : {3, 4}) {
    const std::int64_t r = 2, step = 2 * r + 1;
    std::vector<LatticePoint> pts;
    const int side = 4;
    std::int64_t total = 1;
    for (int j = 0; j < d; ++j) total *= side;
    for (std::int64_t idx = 0; idx < total; ++idx) {
      LatticePoint p(d);
      std::int64_t rest = idx;
      for (int j = 0; j < d; ++j) {
        p[j] = step * (rest % side);
        rest /= side;
      }
      pts.push_back(p);
    }
    const SeparatedSet c(r, SiteSet(d, pts));
    const auto res = extract_high_capacity_subset(c);
    const double power = std::pow(static_cast<double>(pts.size()), 1.0 - 2.0 / d);
    EXPECT_GE(static_cast<double>(res.subset.size()), std::pow(2.0, -d) * power);
    EXPECT_LE(static_cast<double>(res.subset.size()), power);
    EXPECT_TRUE(res.covers);
    const auto again = extract_high_capacity_subset(c);
    EXPECT_EQ(again.subset.centers(), res.subset.centers());
  }
}

TEST(Filling, ZeroDensityIsCertain) {
  const SeparatedSet c(3, SiteSet(3, {LatticePoint{0, 0, 0}}));
  const auto rep = filling_probability_bound_check(c, 0.0, 100, 200, green(3));
  EXPECT_EQ(rep.hits, 200);
  EXPECT_DOUBLE_EQ(rep.p_hat, 1.0);
}

TEST(Filling, DecreasingInDensity) {
  const SeparatedSet c(3, SiteSet(3, {LatticePoint{0, 0, 0}}));
  double prev = 1.0;
  for (double rho : {0.5, 1.0, 2.0}) {
    const auto rep = filling_probability_bound_check(c, rho, 2000, 20000, green(3), 5);
    EXPECT_LE(rep.p_hat, prev);
    prev = rep.p_hat;
  }
}
