// Acceptance driver: one line per criterion, "PASS <id> ..." or "FAIL <id> ...".
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rangelab/capacity.hpp"
#include "rangelab/deviation.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/folding.hpp"
#include "rangelab/green.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/range_index.hpp"
#include "rangelab/range_stats.hpp"
#include "rangelab/transfer.hpp"
#include "rangelab/walk.hpp"

using namespace rangelab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  std::string id;
  double budget_seconds;
  std::function<void(Outcome&, std::uint64_t seed)> run;
};

constexpr double kG3 = 1.5163860591519780;

std::string fmt_double(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------

void identities(Outcome& out, std::uint64_t seed) {
  const std::int64_t n = 10000, paths = 1000;
  std::int64_t bad_ie = 0, bad_dyadic = 0;
  for (int d : {3, 5}) {
    std::vector<char> ie(static_cast<std::size_t>(paths)), dy(ie.size());
    parallel_for(paths, [&](std::int64_t p) {
      RngStream rng(seed, static_cast<std::uint64_t>(d) * 1000000 + static_cast<std::uint64_t>(p));
      const RangeIndex index(simulate_walk(d, n, rng));
      const auto split = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n + 1)));
      ie[static_cast<std::size_t>(p)] = verify_inclusion_exclusion(index, split, n - split).exact();
      const int levels = 1 + static_cast<int>(rng.below(8));
      dy[static_cast<std::size_t>(p)] = dyadic_decompose(index, levels).exact();
    });
    bad_ie += std::count(ie.begin(), ie.end(), 0);
    bad_dyadic += std::count(dy.begin(), dy.end(), 0);
  }
  std::int64_t bad_dec = 0;
  RngStream pick(seed, 5000000);
  for (int t = 0; t < 100; ++t) {
    const int d = t % 2 == 0 ? 3 : 5;
    const std::int64_t len = 2000;
    const auto T = static_cast<std::int64_t>(1 + pick.below(static_cast<std::uint64_t>(len)));
    RngStream rng(seed, 6000000 + static_cast<std::uint64_t>(t));
    const auto chk = corollary_decomposition_check(RangeIndex(simulate_walk(d, len, rng)), T);
    if (!chk.identity_exact || !chk.bounded) ++bad_dec;
  }
  out.detail << "inclusion-exclusion failures " << bad_ie << "/2000, dyadic failures " << bad_dyadic
             << "/2000, decomposition failures " << bad_dec << "/100";
  out.check(bad_ie == 0, "inclusion-exclusion");
  out.check(bad_dyadic == 0, "dyadic identity");
  out.check(bad_dec == 0, "decomposition with |eps| <= T");
}

void green(Outcome& out, std::uint64_t seed) {
  double worst_mass = 0.0;
  for (int T : {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 100, 120, 150}) {
    const auto t = GreenTable::build(3, T);
    worst_mass = std::max(worst_mass, std::abs(t.total_mass() - (T + 1.0)) / T);
  }
  for (int T = 1; T <= 14; ++T) {
    const auto t = GreenTable::build(5, T);
    worst_mass = std::max(worst_mass, std::abs(t.total_mass() - (T + 1.0)) / T);
  }
  const double g2 = GreenTable::build(3, 2)(LatticePoint{0, 0, 0});

  // G_30 against visit counts of 10^6 walks, |z|_2 <= 5
  const int T = 30, R = 5, W = 2 * R + 1;
  const std::int64_t walks = 1000000;
  const auto table = GreenTable::build(3, T);
  std::vector<double> sum(static_cast<std::size_t>(W * W * W), 0.0), sum2(sum.size(), 0.0);
  std::vector<int> local(sum.size(), 0);
  std::vector<int> touched;
  RngStream rng(seed, 0);
  for (std::int64_t w = 0; w < walks; ++w) {
    int x[3] = {0, 0, 0};
    touched.clear();
    for (int k = 0; k <= T; ++k) {
      if (k > 0) {
        const int c = static_cast<int>(rng.below(6));
        x[code_axis(c)] += code_sign(c);
      }
      if (std::abs(x[0]) <= R && std::abs(x[1]) <= R && std::abs(x[2]) <= R) {
        const int idx = ((x[0] + R) * W + (x[1] + R)) * W + (x[2] + R);
        if (local[static_cast<std::size_t>(idx)]++ == 0) touched.push_back(idx);
      }
    }
    for (int idx : touched) {
      const double v = local[static_cast<std::size_t>(idx)];
      sum[static_cast<std::size_t>(idx)] += v;
      sum2[static_cast<std::size_t>(idx)] += v * v;
      local[static_cast<std::size_t>(idx)] = 0;
    }
  }
  double worst_z = 0.0;
  int compared = 0;
  for (int a = -R; a <= R; ++a)
    for (int b = -R; b <= R; ++b)
      for (int c = -R; c <= R; ++c) {
        if (a * a + b * b + c * c > R * R) continue;
        const auto idx = static_cast<std::size_t>(((a + R) * W + (b + R)) * W + (c + R));
        const double mean = sum[idx] / walks;
        const double var = std::max(0.0, sum2[idx] / walks - mean * mean);
        const double exact = table(LatticePoint{a, b, c});
        ++compared;
        if (var == 0.0) {
          if (exact != mean) worst_z = HUGE_VAL;
          continue;
        }
        worst_z = std::max(worst_z, std::abs(mean - exact) / std::sqrt(var / walks));
      }
  out.detail << "max |mass - (T+1)|/T " << fmt_double(worst_mass) << ", G_2(0) = " << fmt_double(g2, 17)
             << ", DP vs MC max z " << fmt_double(worst_z) << " over " << compared << " sites";
  out.check(worst_mass <= 1e-9, "mass conservation");
  out.check(g2 == 7.0 / 6.0, "G_2(0) = 7/6");
  out.check(worst_z <= 4.0, "DP vs Monte Carlo within 4 se");
}

SiteSet random_set(RngStream& rng, int d, std::size_t size, std::int64_t spread) {
  std::vector<LatticePoint> pts;
  while (pts.size() < size) {
    LatticePoint p(d);
    for (int j = 0; j < d; ++j) p[j] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * spread + 1))) - spread;
    pts.push_back(p);
    pts = SiteSet(d, pts).sites();
  }
  return SiteSet(d, pts);
}

void capacity(Outcome& out, std::uint64_t seed) {
  const auto g3 = GreenFunction::standard(3), g5 = GreenFunction::standard(5);
  RngStream rng(seed, 0);
  double worst_z = 0.0, worst_product = HUGE_VAL;
  for (int t = 0; t < 50; ++t) {
    const int d = t < 25 ? 3 : 5;
    const auto& g = d == 3 ? *g3 : *g5;
    const SiteSet s = random_set(rng, d, 1 + rng.below(50), d == 3 ? 4 : 2);
    const auto ex = capacity_exact(s, g);
    CapacityMcOptions opt;
    opt.seed = seed;
    opt.first_stream = 1000000 * static_cast<std::uint64_t>(t + 1);
    const auto mc = capacity_mc(s, g, opt);
    const double bar = std::hypot(mc.error_bar, ex.residual * static_cast<double>(s.size()));
    worst_z = std::max(worst_z, std::abs(mc.cap - ex.cap) / bar);
    worst_product = std::min(worst_product, capacity_time_inequality(s, g, ex).product_ratio);
  }
  const double single = capacity_exact(SiteSet(3, {LatticePoint{0, 0, 0}}), *g3).cap;
  double pair_err = 0.0;
  for (const LatticePoint& z : {LatticePoint{1, 0, 0}, LatticePoint{2, 1, 0}, LatticePoint{4, -3, 2}}) {
    const double c = capacity_exact(SiteSet(3, {LatticePoint{0, 0, 0}, z}), *g3).cap;
    pair_err = std::max(pair_err, std::abs(c - 2.0 / ((*g3)(LatticePoint{0, 0, 0}) + (*g3)(z))));
  }
  std::vector<double> lx, ly, w;
  for (std::int64_t r = 2; r <= 12; ++r) {
    const auto c = capacity_exact(SiteSet::cube(LatticePoint{0, 0, 0}, r), *g3).cap;
    lx.push_back(std::log(static_cast<double>(r)));
    ly.push_back(std::log(c));
    w.push_back(1.0);
  }
  const auto fit = weighted_linear_fit(lx, ly, w);
  out.detail << "exact vs MC max z " << fmt_double(worst_z) << " on 50 sets, singleton " << fmt_double(single, 6)
             << " vs 1/G(0) " << fmt_double(1.0 / kG3, 6) << ", pair error " << fmt_double(pair_err)
             << ", min cap*sup/|set| " << fmt_double(worst_product) << ", cube slope " << fmt_double(fit.slope);
  out.check(worst_z <= 3.0, "exact vs MC within 3 error bars");
  out.check(std::abs(single * kG3 - 1.0) <= 0.01, "singleton");
  out.check(pair_err <= 1e-8, "pair formula");
  out.check(worst_product >= 1.0 - 1e-9, "capacity-time product");
  out.check(std::abs(fit.slope - 1.0) <= 0.2, "cube capacity slope");
}

void extraction(Outcome& out, std::uint64_t seed) {
  const auto g3 = GreenFunction::standard(3);
  const int d = 3;
  const std::int64_t r = 2, spacing = 2 * r + 3;
  RngStream rng(seed, 0);
  bool bracket = true;
  double kmin = HUGE_VAL, kmax = 0.0;
  for (int t = 0; t < 30; ++t) {
    const auto size = static_cast<std::size_t>(std::llround(16.0 * std::pow(256.0, t / 29.0)));
    const auto grid = static_cast<std::int64_t>(std::ceil(std::cbrt(2.0 * static_cast<double>(size))));
    std::vector<LatticePoint> pts;
    std::vector<char> used(static_cast<std::size_t>(grid * grid * grid), 0);
    while (pts.size() < size) {
      const auto cell = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(grid * grid * grid)));
      if (used[static_cast<std::size_t>(cell)]) continue;
      used[static_cast<std::size_t>(cell)] = 1;
      LatticePoint p(d);
      std::int64_t rest = cell;
      for (int j = 0; j < d; ++j) {
        p[j] = spacing * (rest % grid) + static_cast<std::int64_t>(rng.below(3)) - 1;
        rest /= grid;
      }
      pts.push_back(p);
    }
    const SeparatedSet c(r, SiteSet(d, pts));
    const auto res = extract_high_capacity_subset(c);
    const double power = std::pow(static_cast<double>(size), 1.0 - 2.0 / d);
    const auto u = static_cast<double>(res.subset.size());
    if (u < std::pow(2.0, -d) * power || u > power) bracket = false;
    const double cap = capacity_exact(res.subset.cube_union(), *g3).cap;
    const double kappa = cap / (std::pow(static_cast<double>(r), d - 2) * u);
    kmin = std::min(kmin, kappa);
    kmax = std::max(kmax, kappa);
  }
  out.detail << "bracket " << (bracket ? "held" : "violated") << " on 30 sets, kappa in [" << fmt_double(kmin) << ", "
             << fmt_double(kmax) << "]";
  out.check(bracket, "|U| bracket");
  out.check(kmin > 0.0 && kmax < 3.0 * kmin, "kappa stable within factor 3");
}

void folding(Outcome& out, std::uint64_t seed) {
  const std::int64_t n = 10000, paths = 1000, budget_paths = 100;
  bool cover = true, dyadic = true;
  std::int64_t budget_violations = 0, counterexamples = 0, event_paths = 0;
  for (int d : {3, 5}) {
    const double zeta = std::pow(static_cast<double>(n), 0.85);
    const auto sched = scale_schedule(d, n, zeta);
    const auto table = GreenTable::build(d, static_cast<int>(sched.T));
    std::vector<FoldingReport> reps(static_cast<std::size_t>(paths));
    parallel_for(paths, [&](std::int64_t p) {
      RngStream rng(seed, static_cast<std::uint64_t>(d) * 1000000 + static_cast<std::uint64_t>(p));
      FoldingReportOptions opt;
      opt.budget = p < budget_paths;
      reps[static_cast<std::size_t>(p)] = folding_report(simulate_walk(d, n, rng), sched, table, opt);
    });
    for (std::int64_t p = 0; p < paths; ++p) {
      const auto& rep = reps[static_cast<std::size_t>(p)];
      cover = cover && rep.hat.disjoint_cover;
      dyadic = dyadic && rep.dyadic_cover_ok;
      if (p < budget_paths && !rep.budget.inequality_holds) ++budget_violations;
      if (rep.event.event_holds) ++event_paths;
      if (rep.event.counterexample()) ++counterexamples;
    }
  }
  out.detail << "hat cover " << (cover ? "ok" : "broken") << ", dyadic cover " << (dyadic ? "ok" : "broken")
             << ", budget violations " << budget_violations << "/200, event held on " << event_paths
             << "/2000 paths with " << counterexamples << " counterexamples";
  out.check(cover, "hat partition disjoint cover");
  out.check(dyadic, "K* dyadic cover");
  out.check(budget_violations == 0, "budget inequality");
  out.check(counterexamples == 0, "implication audit");
}

void transfer(Outcome& out, std::uint64_t seed) {
  KernelCheckOptions kopt;
  kopt.trials = 100000;
  const auto audit = transfer_kernel_checks(default_generator_battery(), kopt, seed, 0);
  double worst_excess = -HUGE_VAL, worst_oracle = 0.0;
  for (const auto& row : audit.rows) {
    const double se1 = std::max(row.single_se, 1e-300), se2 = std::max(row.chain_se, 1e-300);
    worst_excess = std::max({worst_excess, (row.single_mean - 1.0) / se1, (row.chain_mean - 1.0) / se2});
    if (row.oracle >= 0.0) worst_oracle = std::max(worst_oracle, std::abs(row.oracle_z));
  }
  const auto iid = transfer_iid_audit(2000, 20, {0.0, 0.01, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0},
                                      {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0});
  const auto range = transfer_range_audit(3, 4000, 20, 1000, {}, seed, 1000000);
  std::int64_t range_bad = 0;
  for (const auto& row : range.rows) range_bad += row.ok ? 0 : 1;
  out.detail << "battery max (mean - 1)/se " << fmt_double(worst_excess) << ", Bernoulli oracle max |z| "
             << fmt_double(worst_oracle) << ", i.i.d. rows " << iid.rows.size() << (iid.passed() ? " ok" : " broken")
             << ", range-process rows failing " << range_bad << "/" << range.rows.size();
  out.check(worst_excess <= 3.0, "kernel mean <= 1 + 3 se");
  out.check(worst_oracle <= 4.0, "Bernoulli closed form within 4 se");
  out.check(audit.passed(), "split inequality");
  out.check(iid.passed(), "i.i.d. exact grid");
  out.check(range.passed(), "range process");
}

struct ShapeRun {
  RateFit fit;
  std::vector<DeviationEstimate> points;
};

ShapeRun shape_run(int d, std::int64_t n, const std::vector<double>& zetas, double gamma, std::uint64_t seed,
                   std::uint64_t stream) {
  const auto cal = calibrate(d, n, 400, seed, stream);
  LowerBoundOptions opt;
  opt.gamma = gamma;
  opt.replicates = 8;
  opt.sampler.population = 1000;
  ShapeRun run;
  std::uint64_t next = stream + 10000;
  for (double zeta : zetas) {
    run.points.push_back(lower_bound_experiment(cal, zeta, opt, seed, next));
    next += 100000;
  }
  run.fit = rate_fit(run.points);
  return run;
}

void deviation_shape(Outcome& out, std::uint64_t seed) {
  const auto gamma5 = estimate_gamma(5, 40000, 200, seed, 90000000);
  const double gamma = gamma5.by_range;
  out.detail << "gamma_5 " << fmt_double(gamma) << ";";
  std::uint64_t stream = 0;
  for (int d : {5, 3}) {
    std::vector<double> slopes;
    for (std::int64_t n : {10000, 40000}) {
      std::vector<double> zetas;
      const double base = d == 5 ? 300.0 : 0.2 * std::pow(static_cast<double>(n), 0.8);
      for (int k = 0; k <= 6; ++k) zetas.push_back(base * std::pow(2.0, k / 2.0));
      const auto run = shape_run(d, n, zetas, gamma, seed, stream);
      stream += 10000000;
      slopes.push_back(run.fit.slope);
      out.detail << " d=" << d << " n=" << n << " slope " << fmt_double(run.fit.slope) << " R2 "
                 << fmt_double(run.fit.r_squared);
      out.check(run.fit.r_squared >= 0.9, "R^2 >= 0.9 at d=" + std::to_string(d) + " n=" + std::to_string(n));
    }
    const double drift = std::abs(slopes[1] / slopes[0] - 1.0);
    out.detail << " drift " << fmt_double(drift) << ";";
    out.check(drift <= 0.25, "slope stable within 25% at d=" + std::to_string(d));
  }
}

void gaussian(Outcome& out, std::uint64_t seed) {
  const int d = 5;
  const std::int64_t n = 100000;
  const auto cal = calibrate(d, n, 2000, seed, 0);
  const double zeta = std::pow(static_cast<double>(n), 0.6);
  const std::vector<double> thetas = {-1.0, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.0};
  GaussianMgfOptions mopt;
  const auto mgf = gaussian_mgf_check(cal, zeta, thetas, mopt, seed, 100000);
  double worst = 0.0;
  std::size_t evaluated = 0;
  for (const auto& p : mgf.points) {
    if (p.truncated || p.theta == 0.0) continue;
    ++evaluated;
    worst = std::max(worst, p.rel_gap);
  }
  out.detail << "sigma^2 " << fmt_double(cal.sigma2()) << ", MGF max rel gap " << fmt_double(worst) << " on "
             << evaluated << "/" << thetas.size() << " thetas;";
  out.check(evaluated == thetas.size(), "every theta evaluated without truncation");
  out.check(worst <= 0.3, "scaled log-MGF within 30%");

  const auto vols = sample_range_volumes(d, n, 20000, seed, 10000000);
  const double sd = std::sqrt(cal.variance);
  for (int k : {1, 2, 3}) {
    const auto e = direct_tail(cal, k * sd, vols);
    const double pred = std::log(normal_tail(k));
    const double gap = std::abs(e.log_p - pred) / std::abs(pred);
    out.detail << " k=" << k << " p " << fmt_double(e.p_hat) << " vs " << fmt_double(normal_tail(k)) << " (log gap "
               << fmt_double(gap) << ")";
    out.check(!e.one_sided && gap <= 0.3, "direct tail at k=" + std::to_string(k));
  }
}

void folding_picture(Outcome& out, std::uint64_t seed) {
  const int d = 5;
  const double beta = 1.0;
  const auto g5 = GreenFunction::standard(5);
  std::map<std::vector<LatticePoint>, double> cap_cache;
  std::vector<double> alphas, caps;
  std::uint64_t stream = 0;
  for (std::int64_t n : {10000, 40000}) {
    const double zeta = static_cast<double>(n) / 10.0;
    LowerBoundOptions lopt;
    lopt.gamma = 0.865;
    const auto plan = lower_bound_plan(d, n, zeta, lopt);
    ConfinedOptions copt;
    copt.mode = ConfinedMode::kGuided;
    copt.population = 240;
    const auto run = confined_sampler(plan.box, plan.m, copt, seed, stream);
    const auto tp = typical_params(d, n, zeta);
    std::vector<double> a, c;
    for (std::size_t s = 0; s < run.paths.size(); s += 10) {
      WalkPath path = run.paths[s];
      RngStream rng(seed, stream + 1000 + s);
      path.append(simulate_walk(d, n - plan.m, rng));
      const auto vn = compute_Cn_Vn(path, tp.r_n, beta * tp.rho_typ);
      a.push_back(static_cast<double>(vn.local_time) / zeta);
      if (vn.cells.empty()) continue;
      auto it = cap_cache.find(vn.cells);
      if (it == cap_cache.end()) {
        const SiteSet v = vn.sites();
        CapacityOptions copt2;
        copt2.max_sites = 10000;
        const double cap = capacity_exact(v, *g5, copt2).cap;
        it = cap_cache.emplace(vn.cells, capacity_volume_ratio(v, cap)).first;
      }
      c.push_back(it->second);
    }
    stream += 10000000;
    std::sort(a.begin(), a.end());
    std::sort(c.begin(), c.end());
    const double alpha = a[a.size() / 2];
    const double cap_hi = c.empty() ? 0.0 : c.back();
    alphas.push_back(alpha);
    caps.push_back(cap_hi);
    out.detail << " n=" << n << " r_n " << tp.r_n << " alpha " << fmt_double(alpha) << " (min " << fmt_double(a.front())
               << ") cap ratio max " << fmt_double(cap_hi) << " over " << c.size() << " samples;";
  }
  out.detail << " beta " << beta;
  out.check(alphas[0] > 0.0 && alphas[1] > 0.0, "positive alpha");
  out.check(std::max(alphas[0], alphas[1]) <= 2.0 * std::min(alphas[0], alphas[1]), "alpha stable within factor 2");
  out.check(caps[0] > 0.0 && std::max(caps[0], caps[1]) <= 2.0 * std::min(caps[0], caps[1]),
            "capacity ratio bound stable within factor 2");
}

void intersection(Outcome& out, std::uint64_t seed) {
  IntersectionTailOptions opt;
  opt.horizon = 100000;
  opt.pairs = 100000;
  const auto rep = intersection_tail(5, opt, seed, 0);
  out.detail << "slope " << fmt_double(rep.base.fit.slope) << " R2 " << fmt_double(rep.base.fit.r_squared) << " on t in ["
             << rep.base.fit_t_min << ", " << rep.base.fit_t_max << "], doubled slope "
             << fmt_double(rep.doubled.fit.slope) << ", drift " << fmt_double(rep.slope_drift);
  out.check(rep.base.fit.r_squared >= 0.9, "R^2 >= 0.9");
  out.check(rep.slope_drift < 0.15, "horizon-doubling drift < 15%");
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"identities", 120, identities},
      {"green", 600, green},
      {"capacity", 900, capacity},
      {"extraction", 600, extraction},
      {"folding", 1200, folding},
      {"transfer", 600, transfer},
      {"deviation-shape", 3600, deviation_shape},
      {"gaussian", 1800, gaussian},
      {"folding-picture", 1800, folding_picture},
      {"intersection-tail", 1200, intersection},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rangelab acceptance checks"};
  std::vector<std::string> only;
  std::uint64_t seed = 20240601;
  bool list = false;
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--seed", seed, "master seed");
  app.add_flag("--list", list, "list criterion ids");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria()) std::printf("%s\n", c.id.c_str());
    return 0;
  }
  for (const auto& id : only) {
    const bool known = std::any_of(criteria().begin(), criteria().end(), [&](const Criterion& c) { return c.id == id; });
    if (!known) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
  }
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out, seed);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [error: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.check(secs <= c.budget_seconds, "runtime over " + fmt_double(c.budget_seconds) + " s");
    std::printf("%s %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.id.c_str(), secs, out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
