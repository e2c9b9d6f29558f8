#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rangelab/corrector.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/green.hpp"
#include "rangelab/occupancy.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/walk.hpp"

using namespace rangelab;

namespace {

constexpr double kG3 = 1.5163860591519780;  // G(0) in d = 3 (Watson's integral)

double brute_corrector(const WalkPath& path, const GreenTable& table) {
  const auto pos = path.positions();
  const RangeIndex index(path);
  double total = 0.0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const auto sites = index.range_upto(static_cast<std::int64_t>(k));
    for (std::int32_t id = 0; id < sites; ++id) total += table(index.site(id) - pos[k]);
  }
  return total / table.horizon();
}

}  // namespace

TEST(GreenTable, TwoStepOrigin) {
  const auto t = GreenTable::build(3, 2);
  EXPECT_DOUBLE_EQ(t(LatticePoint{0, 0, 0}), 7.0 / 6.0);
  EXPECT_DOUBLE_EQ(t(LatticePoint{1, 0, 0}), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(t(LatticePoint{1, 1, 0}), 2.0 / 36.0);
  EXPECT_DOUBLE_EQ(t(LatticePoint{2, 0, 0}), 1.0 / 36.0);
  EXPECT_EQ(t(LatticePoint{2, 1, 0}), 0.0);
}

TEST(GreenTable, MassConservation) {
  for (int T : {1, 2, 7, 50, 150}) {
    const auto t = GreenTable::build(3, T);
    EXPECT_NEAR(t.total_mass(), T + 1.0, 1e-9 * T) << "d=3 T=" << T;
  }
  for (int T : {1, 5, 14}) {
    const auto t = GreenTable::build(5, T);
    EXPECT_NEAR(t.total_mass(), T + 1.0, 1e-9 * T) << "d=5 T=" << T;
  }
}

TEST(GreenTable, SymmetryParityAndSupport) {
  const int T = 12;
  const auto t = GreenTable::build(4, T);
  RngStream rng(3, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    LatticePoint z(4);
    for (int j = 0; j < 4; ++j) z[j] = static_cast<std::int64_t>(rng.below(15)) - 7;
    // random signed permutation
    int perm[4] = {0, 1, 2, 3};
    for (int j = 3; j > 0; --j) std::swap(perm[j], perm[rng.below(static_cast<std::uint64_t>(j + 1))]);
    LatticePoint g(4);
    for (int j = 0; j < 4; ++j) g[j] = (rng.below(2) ? -1 : 1) * z[perm[j]];
    ASSERT_DOUBLE_EQ(t(z), t(g));
    ASSERT_DOUBLE_EQ(t(z), t(-z));
    if (z.l1_norm() > T) ASSERT_EQ(t(z), 0.0);
    ASSERT_GE(t(z), 0.0);
  }
  // p_k(z) = 0 unless |z|_1 = k mod 2: G_1(z) vanishes off the unit sphere and origin
  const auto t1 = GreenTable::build(3, 1);
  EXPECT_EQ(t1(LatticePoint{1, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(t1(LatticePoint{0, 0, 1}), 1.0 / 6.0);
}

TEST(GreenTable, MonotoneInHorizon) {
  const auto a = GreenTable::build(3, 20), b = GreenTable::build(3, 21);
  for (std::int64_t x = 0; x <= 6; ++x)
    for (std::int64_t y = 0; y <= x; ++y)
      for (std::int64_t z = 0; z <= y; ++z) {
        const LatticePoint p{x, y, z};
        ASSERT_GE(b(p), a(p));
      }
}

TEST(GreenTable, TruncatedOriginApproachesInfiniteFromBelow) {
  const double g100 = GreenTable::build(3, 100)(LatticePoint{0, 0, 0});
  const double g50 = GreenTable::build(3, 50)(LatticePoint{0, 0, 0});
  EXPECT_LT(g50, g100);
  EXPECT_LT(g100, kG3);
  EXPECT_NEAR(g100, 1.450892, 1e-6);
  // G(0) - G_T(0) ~ c / sqrt(T): Richardson on (50, 100) recovers G(0)
  const double s = std::sqrt(2.0);
  EXPECT_NEAR((s * g100 - g50) / (s - 1.0), kG3, 0.02 * kG3);
}

TEST(GreenTable, ResourceBudget) {
  GreenBudget tiny;
  tiny.max_bytes = 1000;
  EXPECT_THROW(GreenTable::build(5, 14, -1, tiny), ResourceError);
}

TEST(GreenTable, SaveLoadRoundTrip) {
  const auto t = GreenTable::build(3, 9);
  const auto file = (std::filesystem::temp_directory_path() / "rangelab_green_roundtrip.bin").string();
  t.save(file);
  const auto back = GreenTable::load(file);
  std::remove(file.c_str());
  EXPECT_EQ(back.checksum(), t.checksum());
  EXPECT_EQ(back.octant_values(), t.octant_values());
}

TEST(GreenFunction, OriginValues) {
  const auto g3 = GreenFunction::standard(3);
  EXPECT_NEAR((*g3)(LatticePoint{0, 0, 0}), kG3, 0.01 * kG3);
  const auto g5 = GreenFunction::standard(5);
  EXPECT_NEAR((*g5)(LatticePoint(5)), 1.156, 0.01 * 1.156);
  EXPECT_NEAR(green_bessel(LatticePoint{0, 0, 0}), kG3, 1e-6);
}

TEST(GreenFunction, DecaysAlongAxis) {
  for (int d : {3, 5}) {
    const auto g = GreenFunction::standard(d);
    double prev = HUGE_VAL;
    for (std::int64_t k = 0; k <= 20; ++k) {
      LatticePoint p(d);
      p[0] = k;
      const double v = (*g)(p);
      ASSERT_LT(v, prev) << "d=" << d << " k=" << k;
      prev = v;
    }
  }
}

TEST(GreenFunction, AsymptoteMismatchAtCrossover) {
  for (int d : {3, 5}) {
    const auto g = GreenFunction::standard(d);
    EXPECT_LT(g->asymptote().mismatch, 0.02) << "d=" << d;
    EXPECT_GT(g->asymptote().constant, 0.0);
  }
}

TEST(GreenFunction, CompletedTableMatchesBessel) {
  const auto table = GreenTable::build(3, 150, 12);
  const auto asym = fit_green_asymptote(table, 12.0);
  for (const LatticePoint z : {LatticePoint{0, 0, 0}, LatticePoint{1, 0, 0}, LatticePoint{2, 1, 1},
                               LatticePoint{5, 3, 0}, LatticePoint{20, 4, 1}}) {
    const double exact = green_bessel(z);
    EXPECT_NEAR(green_infinite(z, table, asym), exact, 2e-3 * exact) << z.to_string();
  }
}

TEST(Corrector, EmptyPath) {
  const auto table = GreenTable::build(3, 10);
  const RangeIndex index(WalkPath(3, 0, 0));
  EXPECT_DOUBLE_EQ(corrector(index, table), table(LatticePoint{0, 0, 0}) / 10.0);
}

TEST(Corrector, MatchesBruteForce) {
  const auto table = GreenTable::build(3, 15);
  // straight run along an axis, then random steps
  std::vector<std::uint8_t> codes(300, 0);
  RngStream rng(8, 0);
  for (int k = 0; k < 700; ++k) codes.push_back(static_cast<std::uint8_t>(rng.below(6)));
  const WalkPath path = WalkPath::from_codes(3, codes);
  const RangeIndex index(path);
  const double fast = corrector(index, table);
  const double slow = brute_corrector(path, table);
  EXPECT_NEAR(fast, slow, 1e-12 * slow);

  const auto t5 = GreenTable::build(5, 6);
  RngStream r5(9, 0);
  const WalkPath p5 = simulate_walk(5, 1000, r5);
  const RangeIndex i5(p5);
  EXPECT_NEAR(corrector(i5, t5), brute_corrector(p5, t5), 1e-12 * brute_corrector(p5, t5));
}

TEST(Corrector, OrderNOverSqrtT) {
  const int T = 50;
  const std::int64_t n = 10000;
  const auto table = GreenTable::build(3, T);
  double sum = 0.0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    RngStream rng(10, static_cast<std::uint64_t>(s));
    const RangeIndex index(simulate_walk(3, n, rng));
    sum += corrector(index, table);
  }
  const double ratio = sum / seeds / (n / std::sqrt(static_cast<double>(T)));
  EXPECT_GT(ratio, 1.0 / 3.0);
  EXPECT_LT(ratio, 3.0);
}

TEST(DensityGreenBound, EmptyAndExcluded) {
  const auto table = GreenTable::build(3, 8);
  RngStream rng(1, 0);
  const RangeIndex index(simulate_walk(3, 200, rng));
  const OccupancyIndex occ(index);
  const auto empty = check_density_green_bound(occ, {}, 3, 1.0, table, LatticePoint{0, 0, 0});
  EXPECT_EQ(empty.lhs, 0.0);
  // single k whose position lies in Q(z, r)
  const LatticePoint z = index.position(17);
  const double rho = (occ.cube_time(index.site_at(17), 3.0) + 1.0) / 27.0;
  const auto one = check_density_green_bound(occ, {17}, 3, rho, table, z);
  EXPECT_EQ(one.lhs, 0.0);
}

TEST(DensityGreenBound, ContractViolationNamesIndex) {
  const auto table = GreenTable::build(3, 8);
  std::vector<std::uint8_t> codes;
  for (int k = 0; k < 40; ++k) codes.push_back(static_cast<std::uint8_t>(k % 2));  // 0 <-> e1
  const RangeIndex index(WalkPath::from_codes(3, codes));
  const OccupancyIndex occ(index);
  try {
    check_density_green_bound(occ, {0, 5}, 2, 0.5, table, LatticePoint{10, 0, 0});
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("k = 0"), std::string::npos) << e.what();
  }
  const auto ok = check_density_green_bound(occ, {0, 5}, 2, 41.0 / 8.0, table, LatticePoint{10, 0, 0});
  EXPECT_GE(ok.lhs, 0.0);
}

TEST(DensityGreenBound, ValueMatchesDirectSum) {
  const int T = 10;
  const auto table = GreenTable::build(3, T);
  RngStream rng(2, 0);
  const RangeIndex index(simulate_walk(3, 2000, rng));
  const OccupancyIndex occ(index);
  const std::int64_t r = 3;
  const double rho = 2.0;  // 54 visits to a 3-cube are far above typical
  std::vector<std::int64_t> K;
  for (std::int64_t k = 0; k <= index.steps(); k += 3)
    if (occ.cube_time(index.site_at(k), 3.0) <= rho * 27) K.push_back(k);
  const LatticePoint z = index.position(1000);
  double direct = 0.0;
  for (auto k : K)
    if (!cube_contains(Cube{z, 3.0}, index.position(k))) direct += table(index.position(k) - z);
  const auto out = check_density_green_bound(occ, K, r, rho, table, z);
  EXPECT_NEAR(out.lhs, direct, 1e-12 * (1 + direct));
  EXPECT_NEAR(out.bound_ratio, direct / (rho * T), 1e-12 * (1 + direct));
}
