#include <gtest/gtest.h>

#include <cmath>

#include "rangelab/errors.hpp"
#include "rangelab/lattice.hpp"
#include "rangelab/rng.hpp"

using namespace rangelab;

namespace {

LatticePoint random_point(RngStream& rng, int d, std::int64_t spread) {
  LatticePoint p(d);
  for (int j = 0; j < d; ++j) p[j] = static_cast<std::int64_t>(rng.below(2 * spread + 1)) - spread;
  return p;
}

}  // namespace

TEST(Cube, HalfOpenMembershipOneDimension) {
  const Cube q{LatticePoint{0}, 2.0};
  EXPECT_TRUE(cube_contains(q, LatticePoint{-1}));
  EXPECT_FALSE(cube_contains(q, LatticePoint{1}));
  EXPECT_TRUE(cube_contains(q, LatticePoint{0}));
}

TEST(Cube, OddSideContainsCorner) {
  EXPECT_TRUE(cube_contains(Cube{LatticePoint{0, 0, 0}, 3.0}, LatticePoint{1, 1, 1}));
  EXPECT_FALSE(cube_contains(Cube{LatticePoint{0, 0, 0}, 3.0}, LatticePoint{2, 1, 1}));
  EXPECT_TRUE(cube_contains(Cube{LatticePoint{0, 0, 0}, 3.0}, LatticePoint{-1, -1, -1}));
}

TEST(Cube, LatticeCountIsSidePowerD) {
  for (int d = 1; d <= 5; ++d) {
    for (std::int64_t r = 1; r <= 5; ++r) {
      LatticePoint x(d);
      for (int j = 0; j < d; ++j) x[j] = 3 * j - 2;
      // enumerate a box that surely contains the cube
      std::int64_t count = 0;
      LatticePoint y(d);
      const std::int64_t span = r + 2;
      std::int64_t total = 1;
      for (int j = 0; j < d; ++j) total *= 2 * span + 1;
      for (std::int64_t idx = 0; idx < total; ++idx) {
        std::int64_t rest = idx;
        for (int j = 0; j < d; ++j) {
          y[j] = x[j] - span + rest % (2 * span + 1);
          rest /= 2 * span + 1;
        }
        if (cube_contains(Cube{x, static_cast<double>(r)}, y)) ++count;
      }
      EXPECT_EQ(count, static_cast<std::int64_t>(std::llround(std::pow(r, d)))) << "d=" << d << " r=" << r;
    }
  }
}

TEST(Cube, AxisRangeMatchesMembership) {
  for (double side : {1.0, 2.0, 3.0, 4.5, 5.0, 7.25}) {
    for (std::int64_t c : {-3, 0, 4}) {
      std::int64_t lo = 0, hi = 0;
      const std::int64_t count = cube_axis_range(side, c, &lo, &hi);
      EXPECT_EQ(count, hi - lo + 1);
      for (std::int64_t y = c - 10; y <= c + 10; ++y) {
        const bool inside = cube_contains(Cube{LatticePoint{c}, side}, LatticePoint{y});
        EXPECT_EQ(inside, y >= lo && y <= hi) << side << " " << c << " " << y;
      }
    }
  }
}

TEST(CubeIndex, Examples) {
  EXPECT_EQ(cube_index(LatticePoint{0, 0, 0}, 5), (LatticePoint{0, 0, 0}));
  EXPECT_EQ(cube_index(LatticePoint{7, 0, 0}, 5)[0], 5);
  EXPECT_EQ(cube_index(LatticePoint{8, 0, 0}, 5)[0], 10);
  EXPECT_EQ(cube_index(LatticePoint{-3, 0, 0}, 5)[0], -5);
  EXPECT_EQ(cube_index(LatticePoint{1, 0, 0}, 2)[0], 2);
  EXPECT_EQ(cube_index(LatticePoint{-1, 0, 0}, 2)[0], 0);
  EXPECT_THROW(cube_index(LatticePoint{1, 2, 3}, 0), ContractError);
}

TEST(CubeIndex, RoundTripAndUniqueness) {
  RngStream rng(11, 0);
  for (int t = 0; t < 10000; ++t) {
    const int d = 3 + static_cast<int>(rng.below(3));
    const auto r = static_cast<std::int64_t>(1 + rng.below(9));
    const LatticePoint y = random_point(rng, d, 50);
    const LatticePoint x = cube_index(y, r);
    ASSERT_TRUE(cube_contains(Cube{x, static_cast<double>(r)}, y));
    for (int j = 0; j < d; ++j) {
      ASSERT_EQ(floor_div(x[j], r) * r, x[j]);
      // neighbouring grid points along j do not contain y
      LatticePoint other = x;
      other[j] += r;
      ASSERT_FALSE(cube_contains(Cube{other, static_cast<double>(r)}, y));
      other[j] -= 2 * r;
      ASSERT_FALSE(cube_contains(Cube{other, static_cast<double>(r)}, y));
    }
  }
}

TEST(Chebyshev, Examples) {
  EXPECT_EQ(chebyshev_distance(LatticePoint{0, 0, 0}, LatticePoint{0, 0, 0}), 0);
  EXPECT_EQ(chebyshev_distance(LatticePoint{1, 2, 3}, LatticePoint{4, 2, 1}), 3);
}

TEST(Chebyshev, SymmetryAndTriangle) {
  RngStream rng(12, 0);
  for (int t = 0; t < 10000; ++t) {
    const LatticePoint a = random_point(rng, 4, 100), b = random_point(rng, 4, 100), c = random_point(rng, 4, 100);
    ASSERT_EQ(chebyshev_distance(a, b), chebyshev_distance(b, a));
    ASSERT_LE(chebyshev_distance(a, c), chebyshev_distance(a, b) + chebyshev_distance(b, c));
  }
}

TEST(LatticePoint, Norms) {
  const LatticePoint p{3, -4, 1};
  EXPECT_EQ(p.l1_norm(), 8);
  EXPECT_EQ(p.linf_norm(), 4);
  EXPECT_EQ(p.norm2(), 26);
  EXPECT_EQ((p - p), LatticePoint(3));
  EXPECT_EQ(-p, (LatticePoint{-3, 4, -1}));
}
