#include <gtest/gtest.h>

#include <cmath>

#include "rangelab/errors.hpp"
#include "rangelab/green.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/transfer.hpp"
#include "rangelab/walk.hpp"

using namespace rangelab;

namespace {

const KernelCheck& row(const TransferAudit& audit, const std::string& name) {
  for (const auto& r : audit.rows)
    if (r.generator == name) return r;
  throw std::runtime_error("no row " + name);
}

}  // namespace

TEST(TransferKernel, ConstantClosedForms) {
  KernelCheckOptions opt;
  opt.trials = 1000;
  const auto audit = transfer_kernel_checks(default_generator_battery(), opt, 1, 0);
  EXPECT_NEAR(row(audit, "constant(1.00)").single_mean, std::exp(2.0 - std::exp(1.0)), 1e-12);
  EXPECT_NEAR(std::exp(2.0 - std::exp(1.0)), 0.4875, 1e-4);
  EXPECT_NEAR(row(audit, "constant(0.00)").single_mean, 1.0, 1e-12);
  EXPECT_NEAR(row(audit, "constant(0.00)").chain_mean, 1.0, 1e-12);
}

TEST(TransferKernel, BatteryHoldsAndBernoulliMatchesClosedForm) {
  KernelCheckOptions opt;
  opt.trials = 100000;
  const auto audit = transfer_kernel_checks(default_generator_battery(), opt, 2, 0);
  EXPECT_TRUE(audit.passed());
  for (const auto& c : audit.counterexamples) ADD_FAILURE() << c;
  for (const auto& r : audit.rows) {
    EXPECT_LE(r.single_mean, 1.0 + 3 * r.single_se) << r.generator;
    EXPECT_LE(r.chain_mean, 1.0 + 3 * r.chain_se) << r.generator;
  }
  int bernoulli_rows = 0;
  for (const auto& r : audit.rows) {
    if (r.oracle < 0) continue;
    ++bernoulli_rows;
    // (1 - p) e^{-kappa p} + p e^{1 - kappa p}, recomputed here
    const double p = std::stod(r.generator.substr(10));
    const double k = std::exp(1.0) - 1.0;
    const double oracle = (1.0 - p) * std::exp(-k * p) + p * std::exp(1.0 - k * p);
    EXPECT_NEAR(r.oracle, oracle, 1e-12) << r.generator;
    if (r.single_se > 0) {
      EXPECT_LT(std::abs(r.single_mean - oracle), 4 * r.single_se) << r.generator;
    }
  }
  EXPECT_EQ(bernoulli_rows, 7);
}

TEST(TransferKernel, RejectsValuesOutsideUnitInterval) {
  AdaptedGenerator bad;
  bad.name = "bad";
  bad.draw = [](RngStream&, int len, double* z, double* m) {
    for (int i = 0; i < len; ++i) {
      z[i] = 1.5;
      m[i] = 0.5;
    }
  };
  KernelCheckOptions opt;
  opt.trials = 10;
  EXPECT_THROW(transfer_kernel_checks({bad}, opt, 3, 0), ContractError);
}

TEST(TransferInequality, IidAndDeterministicRows) {
  const auto rep = transfer_iid_audit(1000, 10, {0.0, 0.05, 0.3, 0.9}, {0.5, 2.0, 10.0, 50.0});
  EXPECT_TRUE(rep.passed());
  for (const auto& r : rep.rows) {
    EXPECT_TRUE(r.ok) << r.process << " zeta=" << r.zeta;
    EXPECT_EQ(r.se, 0.0);
  }
  // X_i = 1: (1/T) sum = (n - T + 1) / T = 99.1
  for (const auto& r : rep.rows) {
    if (r.process != "deterministic-one") continue;
    EXPECT_EQ(r.lhs, r.zeta < 99.1 ? 1.0 : 0.0);
  }
  EXPECT_THROW(transfer_iid_audit(5, 10, {0.5}, {1.0}), ContractError);
}

TEST(RangeProcess, ConditionalMeanMatchesContinuations) {
  // E[X_i | F_{i-T}] against fresh continuations of one fixed prefix
  const int d = 3;
  const std::int64_t T = 20, k = 300;
  RngStream rng(4, 0);
  const WalkPath prefix = simulate_walk(d, k, rng);
  const RangeIndex index(prefix);
  const auto hit = HittingTable::build(d, static_cast<int>(T));
  const LatticePoint here = index.position(k);
  double cond = 0.0;
  for (std::int32_t id = 0; id < index.num_sites(); ++id) cond += hit(index.site(id) - here);
  cond /= static_cast<double>(T);

  const int trials = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream cont(4, 1000 + static_cast<std::uint64_t>(t));
    const WalkPath tail = simulate_walk(d, T, cont);
    const auto pos = tail.positions();
    // distinct sites of S_{k+1..k+T} already in R_k
    std::vector<LatticePoint> seen;
    std::int64_t inter = 0;
    for (std::size_t s = 1; s < pos.size(); ++s) {
      const LatticePoint x = here + pos[s];
      if (std::find(seen.begin(), seen.end(), x) != seen.end()) continue;
      seen.push_back(x);
      if (index.find(x) >= 0) ++inter;
    }
    const double X = static_cast<double>(inter) / static_cast<double>(T);
    sum += X;
    sum2 += X * X;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
  EXPECT_LT(std::abs(mean - cond), 4 * se) << "mc=" << mean << " table=" << cond;
}

TEST(RangeProcess, SumsAreConsistent) {
  const int d = 5;
  const std::int64_t n = 3000, T = 10;
  const auto hit = HittingTable::build(d, static_cast<int>(T));
  RngStream rng(5, 0);
  const WalkPath path = simulate_walk(d, n, rng);
  const RangeIndex index(path);
  const auto [lhs, rhs] = range_process_sums(index, T, hit);
  // brute force of the left sum
  std::int64_t inter = 0;
  for (std::int64_t i = T; i <= n; ++i) {
    std::vector<std::int32_t> window;
    for (std::int64_t s = i - T + 1; s <= i; ++s) {
      const auto id = index.site_at(s);
      if (std::find(window.begin(), window.end(), id) != window.end()) continue;
      window.push_back(id);
      if (index.first_visit(id) <= i - T) ++inter;
    }
  }
  EXPECT_NEAR(lhs, static_cast<double>(inter) / (T * T), 1e-12);
  double cond = 0.0;
  for (std::int64_t k = 0; k <= n - T; ++k) {
    const LatticePoint here = index.position(k);
    const auto sites = index.range_upto(k);
    for (std::int32_t id = 0; id < sites; ++id) cond += hit(index.site(id) - here);
  }
  EXPECT_NEAR(rhs, cond / (T * T), 1e-9 * (1 + rhs));
  EXPECT_THROW(range_process_sums(index, 11, hit), ContractError);
}

TEST(Decomposition, WholePathBlock) {
  RngStream rng(6, 0);
  const RangeIndex index(simulate_walk(3, 500, rng));
  const auto out = corollary_decomposition_check(index, 500);
  EXPECT_TRUE(out.identity_exact);
  EXPECT_TRUE(out.bounded);
  EXPECT_EQ(out.eps.size(), 500u);
}

TEST(Decomposition, RandomPathsAndHorizons) {
  RngStream pick(7, 0);
  for (int t = 0; t < 60; ++t) {
    const int d = 3 + static_cast<int>(pick.below(3));
    const auto n = static_cast<std::int64_t>(50 + pick.below(600));
    const auto T = static_cast<std::int64_t>(1 + pick.below(static_cast<std::uint64_t>(n)));
    RngStream rng(7, 1 + static_cast<std::uint64_t>(t));
    const RangeIndex index(simulate_walk(d, n, rng));
    const auto out = corollary_decomposition_check(index, T);
    ASSERT_TRUE(out.identity_exact) << "d=" << d << " n=" << n << " T=" << T;
    ASSERT_TRUE(out.bounded) << "d=" << d << " n=" << n << " T=" << T;
    ASSERT_EQ(static_cast<std::int64_t>(out.eps.size()), T);
  }
}
