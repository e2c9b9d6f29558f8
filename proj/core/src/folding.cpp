#include "rangelab/folding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "neighbour_cells.hpp"
#include "rangelab/capacity.hpp"
#include "rangelab/corrector.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/range_stats.hpp"

namespace rangelab {

namespace {

double cube_mass(double rho, double r, int d) { return rho * std::pow(r, d); }

std::vector<std::int64_t> times_where(const RangeIndex& index, const std::vector<std::int64_t>& per_site,
                                      double lo, double hi) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k <= index.steps(); ++k) {
    const auto v = static_cast<double>(per_site[static_cast<std::size_t>(index.site_at(k))]);
    if (v >= lo && v <= hi) out.push_back(k);
  }
  return out;
}

bool in_site_cube(const LatticePoint& y, const LatticePoint& center, double side) {
  return cube_contains(Cube{center, side}, y);
}

}  // namespace

std::vector<std::int64_t> compute_Kn(const OccupancyIndex& occ, std::int64_t r, double rho) {
  require(r >= 1 && rho > 0.0, "compute_Kn: need r >= 1 and rho > 0");
  const double t = cube_mass(rho, static_cast<double>(r), occ.dim());
  const auto& times = occ.cube_times_above(static_cast<double>(r), t);
  return times_where(occ.range(), times, t, HUGE_VAL);
}

std::vector<std::int64_t> compute_Kn_star(const OccupancyIndex& occ, std::int64_t r, double rho) {
  require(r >= 1 && rho > 0.0, "compute_Kn_star: need r >= 1 and rho > 0");
  const double t = cube_mass(rho, static_cast<double>(r), occ.dim());
  const auto& times = occ.cube_times_above(static_cast<double>(r), t);
  return times_where(occ.range(), times, t, 2.0 * t);
}

bool dyadic_cover_holds(const OccupancyIndex& occ, std::int64_t r, double rho) {
  const auto kn = compute_Kn(occ, r, rho);
  std::vector<std::int64_t> cover;
  const double limit = static_cast<double>(occ.steps() + 1);
  for (double level = rho; cube_mass(level, static_cast<double>(r), occ.dim()) <= limit; level *= 2.0) {
    const auto part = compute_Kn_star(occ, r, level);
    cover.insert(cover.end(), part.begin(), part.end());
  }
  std::sort(cover.begin(), cover.end());
  cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
  return cover == kn;
}

SeparatedCore separated_core(const OccupancyIndex& occ, const std::vector<std::int64_t>& kstar, std::int64_t r,
                             double rho) {
  require(r >= 1 && rho > 0.0, "separated_core: need r >= 1 and rho > 0");
  const RangeIndex& index = occ.range();
  const int d = index.dim();
  require(std::is_sorted(kstar.begin(), kstar.end()), "separated_core: index set must be sorted");
  SeparatedCore out;
  const double wide = 2.0 * static_cast<double>(r);
  std::vector<LatticePoint> centers;
  for (const std::int64_t k : kstar) {
    const auto& y = index.position(k);
    bool removed = false;
    for (const auto& c : centers)
      if (in_site_cube(y, c, wide)) {
        removed = true;
        break;
      }
    if (removed) continue;
    out.chosen.push_back(k);
    centers.push_back(y);
  }
  out.min_separation = centers.size() >= 2 ? INT64_MAX : 0;
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      out.min_separation = std::min(out.min_separation, chebyshev_distance(centers[a], centers[b]));
  out.cardinality_floor =
      static_cast<double>(kstar.size()) / (2.0 * std::pow(4.0, d) * cube_mass(rho, static_cast<double>(r), d));
  out.cardinality_ok = static_cast<double>(centers.size()) >= out.cardinality_floor;
  out.covered = true;
  for (const std::int64_t k : kstar) {
    const auto& y = index.position(k);
    bool hit = false;
    for (const auto& c : centers)
      if (in_site_cube(y, c, wide)) {
        hit = true;
        break;
      }
    if (!hit) {
      out.covered = false;
      break;
    }
  }
  out.centers = SiteSet(d, std::move(centers));
  return out;
}

std::int64_t FoldingSet::volume() const {
  std::int64_t v = 1;
  const int d = cells.empty() ? 0 : cells.front().dim();
  for (int j = 0; j < d; ++j) v *= r;
  return v * static_cast<std::int64_t>(cells.size());
}

SiteSet FoldingSet::sites() const {
  if (cells.empty()) return SiteSet();
  return SiteSet::union_of_cubes(cells.front().dim(), cells, r);
}

FoldingSet compute_Cn_Vn(const WalkPath& path, std::int64_t r, double rho) {
  require(r >= 1 && rho >= 0.0, "compute_Cn_Vn: need r >= 1 and rho >= 0");
  const auto field = occupancy_field(path, r);
  const double t = cube_mass(rho, static_cast<double>(r), path.dim());
  FoldingSet out;
  out.r = r;
  out.rho = rho;
  for (const auto& [x, count] : field.counts) {
    if (static_cast<double>(count) >= t) {
      out.cells.push_back(x);
      out.local_time += count;
    }
  }
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

std::int64_t probe_scale(int d, double rho, double log_n, double c0_density) {
  require(d >= 3, "probe_scale: dimension must be at least 3");
  require(rho > 0.0 && log_n > 0.0 && c0_density > 0.0, "probe_scale: rho, log n and C0 must be positive");
  const double target = c0_density * log_n * (1.0 - 1e-12);
  const double e = d - 2;
  auto ok = [&](std::int64_t r) { return rho * std::pow(static_cast<double>(r), e) >= target; };
  auto r = static_cast<std::int64_t>(std::ceil(std::pow(c0_density * log_n / rho, 1.0 / e)));
  r = std::max<std::int64_t>(r, 1);
  while (r > 1 && ok(r - 1)) --r;
  while (!ok(r)) ++r;
  return r;
}

TypicalParams typical_params_log(int d, double log_n, std::int64_t n, double zeta, double c0_density) {
  require(d >= 3, "typical_params: dimension must be at least 3");
  require(d != 4, "typical_params: d = 4 has no entry in the typical-parameter table");
  require(n >= 2 && zeta > 0.0, "typical_params: need n >= 2 and zeta > 0");
  TypicalParams p;
  if (d == 3) {
    p.rho_typ = zeta / static_cast<double>(n);
    p.tau_typ = static_cast<double>(n);
    p.chi = 5.0 / 7.0;
  } else {
    p.rho_typ = 1.0;
    p.tau_typ = zeta;
    p.chi = static_cast<double>(d) / (d + 2);
  }
  p.r_n = probe_scale(d, p.rho_typ, log_n, c0_density);
  return p;
}

TypicalParams typical_params(int d, std::int64_t n, double zeta, double c0_density) {
  return typical_params_log(d, std::log(static_cast<double>(n)), n, zeta, c0_density);
}

int ScaleSchedule::residual_level() const noexcept {
  return d == 3 ? cutoff : static_cast<int>(levels.size()) + 1;
}

ScaleSchedule scale_schedule(int d, std::int64_t n, double zeta, const ScheduleOptions& opt) {
  require(d >= 3, "scale_schedule: dimension must be at least 3");
  require(n >= 2, "scale_schedule: need n >= 2");
  require(zeta > 0.0, "scale_schedule: zeta must be positive");
  require(opt.c0_density > 0.0 && opt.c0_cutoff > 0.0, "scale_schedule: constants must be positive");
  ScaleSchedule s;
  s.d = d;
  s.n = n;
  s.zeta = zeta;
  s.options = opt;
  s.log_n = opt.log_n > 0.0 ? opt.log_n : std::log(static_cast<double>(n));
  const double nd = static_cast<double>(n);
  double c_t = opt.horizon_constant;
  if (c_t <= 0.0) c_t = d == 3 ? 0.125 : 1.0;
  s.options.horizon_constant = c_t;
  const double horizon = d == 3 ? c_t * std::cbrt(zeta * nd) : c_t * std::pow(zeta, 2.0 / d);
  s.T = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(horizon - 1e-9)));

  if (d == 3) {
    int I = 1;
    while (std::ldexp(1.0, 1 - I) > opt.c0_cutoff * zeta / nd) ++I;
    s.cutoff = I;
  }
  for (int i = 1;; ++i) {
    ScaleLevel lv;
    lv.i = i;
    lv.rho = std::ldexp(1.0, 1 - i);
    lv.r = probe_scale(d, lv.rho, s.log_n, opt.c0_density);
    if (d == 3) {
      if (i > s.cutoff) break;
    } else if (lv.r > n) {
      break;
    }
    lv.L = d == 3 ? zeta * zeta / (nd * lv.rho * lv.rho) : zeta / std::pow(lv.rho, 2.0 / (d - 2));
    lv.reachable = cube_mass(lv.rho, static_cast<double>(lv.r), d) <= nd + 1.0;
    s.levels.push_back(lv);
  }

  if (d != 4) {
    const double chi = d == 3 ? 5.0 / 7.0 : static_cast<double>(d) / (d + 2);
    const double low = std::pow(nd, chi) * s.log_n;
    if (zeta < low)
      s.warnings.push_back("zeta = " + std::to_string(zeta) + " is below the window n^chi log n = " +
                           std::to_string(low));
  }
  if (zeta > nd) s.warnings.push_back("zeta = " + std::to_string(zeta) + " exceeds n");
  return s;
}

HatPartition hat_partition(const OccupancyIndex& occ, const ScaleSchedule& schedule) {
  const RangeIndex& index = occ.range();
  require(index.dim() == schedule.d, "hat_partition: schedule dimension differs from the path");
  const int d = schedule.d;
  const int defining = schedule.defining_levels();
  HatPartition h;
  h.residual = schedule.residual_level();
  const auto sites = static_cast<std::size_t>(index.num_sites());
  h.site_level.assign(sites, h.residual);
  h.kn_size.assign(schedule.levels.size() + 1, 0);
  h.hat_size.assign(static_cast<std::size_t>(h.residual) + 1, 0);

  // level of each site: first defining level whose K_n contains it
  for (int i = 1; i <= defining; ++i) {
    const auto& lv = schedule.level(i);
    if (!lv.reachable) continue;
    const double t = cube_mass(lv.rho, static_cast<double>(lv.r), d);
    const auto& times = occ.cube_times_above(static_cast<double>(lv.r), t);
    for (std::size_t id = 0; id < sites; ++id)
      if (static_cast<double>(times[id]) >= t && h.site_level[id] == h.residual) h.site_level[id] = i;
  }
  for (int i = 1; i <= static_cast<int>(schedule.levels.size()); ++i) {
    const auto& lv = schedule.level(i);
    if (lv.reachable) h.kn_size[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(compute_Kn(occ, lv.r, lv.rho).size());
  }

  // the time-indexed set differences, built independently of site_level
  std::vector<int> owner(static_cast<std::size_t>(index.steps() + 1), 0);
  bool disjoint = true;
  std::vector<char> earlier(owner.size(), 0);
  for (int i = 1; i <= defining; ++i) {
    const auto& lv = schedule.level(i);
    if (!lv.reachable) continue;
    const auto kn = compute_Kn(occ, lv.r, lv.rho);
    for (const auto k : kn) {
      auto& o = owner[static_cast<std::size_t>(k)];
      if (earlier[static_cast<std::size_t>(k)]) continue;  // k belongs to an earlier K_j
      if (o != 0) disjoint = false;
      o = i;
    }
    for (const auto k : kn) earlier[static_cast<std::size_t>(k)] = 1;
  }
  std::int64_t covered = 0;
  bool consistent = true;
  for (std::int64_t k = 0; k <= index.steps(); ++k) {
    int& o = owner[static_cast<std::size_t>(k)];
    if (o == 0) o = h.residual;
    ++h.hat_size[static_cast<std::size_t>(o)];
    ++covered;
    if (h.level_of_step(index, k) != o) consistent = false;
  }
  std::int64_t total = 0;
  for (const auto v : h.hat_size) total += v;
  h.disjoint_cover = disjoint && consistent && covered == index.steps() + 1 && total == index.steps() + 1;

  h.shell_property = true;
  for (int i = 2; i <= h.residual && h.shell_property; ++i) {
    if (i - 1 > defining) break;
    const auto& prev = schedule.level(i - 1);
    if (!prev.reachable) continue;
    const double t = cube_mass(prev.rho, static_cast<double>(prev.r), d);
    const auto& times = occ.cube_times_above(static_cast<double>(prev.r), t);
    for (std::size_t id = 0; id < sites; ++id)
      if (h.site_level[id] == i && static_cast<double>(times[id]) >= t) {
        h.shell_property = false;
        break;
      }
  }
  return h;
}

SigmaBudget sigma_budget(const OccupancyIndex& occ, const ScaleSchedule& schedule, const HatPartition& hat,
                         const GreenTable& table) {
  const RangeIndex& index = occ.range();
  const int d = index.dim();
  require(table.dim() == d, "sigma_budget: table dimension differs from the path");
  require(table.horizon() == schedule.T, "sigma_budget: table horizon must equal the schedule's T");
  const std::int64_t T = schedule.T;
  const double inv_t = 1.0 / static_cast<double>(T);
  const int residual = hat.residual;
  // Levels that act as "i >= 2" in the outer sums: finite levels, plus the
  // residual level I when d = 3.
  const int last_outer = d == 3 ? residual : residual - 1;
  auto level_r = [&](int i) { return static_cast<double>(schedule.level(i).r); };

  SigmaBudget b;
  std::vector<double> terms(static_cast<std::size_t>(index.steps() + 1), 0.0);
  std::vector<double> s1(terms.size(), 0.0), s3(terms.size(), 0.0), s5(terms.size(), 0.0);
  detail::scan_range_neighbours(index, T, [&](std::int64_t k, const LatticePoint& y, auto&& visit) {
    const int i = hat.level_of_step(index, k);
    const bool inner = i >= 2 && i <= last_outer;
    const double side = inner ? level_r(i - 1) : 0.0;
    double all = 0.0, shell = 0.0;
    visit([&](std::int32_t x, const std::int64_t* abs) {
      const double g = table.at_abs(abs);
      all += g;
      if (inner && in_site_cube(index.site(x), y, side)) shell += g;
    });
    const auto kk = static_cast<std::size_t>(k);
    terms[kk] = all * inv_t;
    if (i == 1) s1[kk] = terms[kk];
    else if (inner) s3[kk] = shell * inv_t;
    else s5[kk] = terms[kk];
  });
  b.corrector = tree_sum(terms);
  b.sigma[1] = tree_sum(s1);
  b.sigma[3] = tree_sum(s3);
  b.sigma[5] = tree_sum(s5);

  // Site pairs for sigma_2 and sigma_4. Time multiplicities are visit counts
  // because levels depend only on the site. The indicator 2 |S_k - S_k'|_inf >=
  // r_{i-1} contains both half-open non-membership events.
  bool any_outer = false;
  for (std::size_t id = 0; id < hat.site_level.size(); ++id)
    if (hat.site_level[id] >= 2 && hat.site_level[id] <= last_outer) any_outer = true;
  if (any_outer) {
    std::int64_t bound = 1;
    for (const auto& s : index.sites()) bound = std::max(bound, s.linf_norm());
    detail::NeighbourCells cells(d, bound, T);
    for (std::int32_t id = 0; id < static_cast<std::int32_t>(index.num_sites()); ++id) cells.insert(id, index.site(id));
    std::vector<double> s2(static_cast<std::size_t>(index.num_sites()), 0.0), s4(s2.size(), 0.0);
    std::int64_t abs[kMaxDim];
    for (std::int32_t a = 0; a < static_cast<std::int32_t>(index.num_sites()); ++a) {
      const int i = hat.site_level[static_cast<std::size_t>(a)];
      if (i < 2 || i > last_outer) continue;
      const auto& y = index.site(a);
      const double r_prev = level_r(i - 1);
      double two = 0.0, four = 0.0;
      cells.for_each_near(y, [&](std::int32_t bsite, const std::int32_t* c) {
        std::int64_t l1 = 0, linf = 0;
        for (int j = 0; j < d; ++j) {
          abs[j] = std::llabs(c[j] - y[j]);
          l1 += abs[j];
          linf = std::max(linf, abs[j]);
        }
        if (l1 > T || 2.0 * static_cast<double>(linf) < r_prev) return;
        const int j = hat.site_level[static_cast<std::size_t>(bsite)];
        const double w = static_cast<double>(index.visit_count(bsite)) * table.at_abs(abs);
        if (j == 1) two += w;
        else if (j >= i) four += w;
      });
      const double va = static_cast<double>(index.visit_count(a)) * inv_t;
      s2[static_cast<std::size_t>(a)] = two * va;
      s4[static_cast<std::size_t>(a)] = four * va;
    }
    b.sigma[2] = tree_sum(s2);
    b.sigma[4] = tree_sum(s4);
  }

  const double total = b.total();
  b.inequality_holds = b.corrector <= total * (1.0 + 1e-9) + 1e-12;
  const double k1 = hat.hat_size.size() > 1 ? static_cast<double>(hat.hat_size[1]) : 0.0;
  b.sigma1_bound = b.sigma[1] <= k1 * static_cast<double>(T + 1) * inv_t * (1.0 + 1e-9) + 1e-12;
  return b;
}

double event_threshold(const ScaleSchedule& schedule, const EventParams& p, int i) {
  if (schedule.d == 3) {
    const int I = schedule.cutoff;
    if (i < 1 || i > I - 1) return -1.0;
    return (i >= I - p.I ? p.delta : p.A) * schedule.level(i).L;
  }
  if (i < 1 || i > schedule.defining_levels()) return -1.0;
  return (i <= p.I ? p.delta : p.A) * schedule.level(i).L;
}

FoldingEventCheck folding_event_check(const HatPartition& hat, const ScaleSchedule& schedule, const EventParams& p,
                                      double corrector_value) {
  require(p.A > 0.0 && p.delta > 0.0, "folding_event_check: A and delta must be positive");
  if (schedule.d == 3) {
    require(schedule.cutoff < 2 || (p.I >= 1 && p.I <= schedule.cutoff - 1), "folding_event_check: need 1 <= J <= I - 1");
  } else {
    require(p.I >= 1, "folding_event_check: need I >= 1");
  }
  FoldingEventCheck out;
  out.corrector = corrector_value;
  out.zeta = schedule.zeta;
  out.event_holds = true;
  for (int i = 1; i < schedule.residual_level(); ++i) {
    const double limit = event_threshold(schedule, p, i);
    if (limit >= 0.0 && static_cast<double>(hat.hat_size[static_cast<std::size_t>(i)]) > limit) out.event_holds = false;
  }
  return out;
}

NestingCheck nesting_check(const OccupancyIndex& occ, const ScaleSchedule& schedule, int I) {
  const int d = schedule.d;
  require(I >= 1 && I <= static_cast<int>(schedule.levels.size()), "nesting_check: I out of range");
  NestingCheck out;
  const RangeIndex& index = occ.range();
  const double e = d - 2;
  const auto& top = schedule.level(I);
  const double c0_log = schedule.options.c0_density * schedule.log_n;
  const double r_top_cont = std::pow(c0_log / top.rho, 1.0 / e);
  const double limit = static_cast<double>(index.steps() + 1);
  for (int i = 1; i <= I; ++i) {
    const auto& lv = schedule.level(i);
    ++out.checked_levels;
    const double rho_top = std::pow(2.0, 2.0 * (i - I) / e) * top.rho;
    // integer scales
    {
      const double t_in = cube_mass(lv.rho, static_cast<double>(lv.r), d);
      const double t_out = cube_mass(rho_top, static_cast<double>(top.r), d);
      if (t_in <= limit) {
        const auto& in = occ.cube_times_above(static_cast<double>(lv.r), t_in);
        const auto& outer = occ.cube_times_above(static_cast<double>(top.r), t_out);
        for (std::int64_t k = 0; k <= index.steps(); ++k) {
          const auto id = static_cast<std::size_t>(index.site_at(k));
          if (static_cast<double>(in[id]) >= t_in && static_cast<double>(outer[id]) < t_out) ++out.violations;
        }
      }
    }
    // unrounded scales
    {
      const double r_cont = std::pow(c0_log / lv.rho, 1.0 / e);
      const double t_in = cube_mass(lv.rho, r_cont, d);
      const double t_out = cube_mass(rho_top, r_top_cont, d);
      if (t_in <= limit) {
        const auto& in = occ.cube_times_above(r_cont, t_in);
        const auto& outer = occ.cube_times_above(r_top_cont, t_out);
        for (std::int64_t k = 0; k <= index.steps(); ++k) {
          const auto id = static_cast<std::size_t>(index.site_at(k));
          if (static_cast<double>(in[id]) >= t_in && static_cast<double>(outer[id]) < t_out * (1.0 - 1e-12))
            ++out.continuous_violations;
        }
      }
    }
  }
  return out;
}

FoldingReport folding_report(const WalkPath& path, const ScaleSchedule& schedule, const GreenTable& table,
                             const FoldingReportOptions& opt) {
  require(path.dim() == schedule.d && path.steps() == schedule.n, "folding_report: schedule built for another (d, n)");
  const RangeIndex index(path);
  const OccupancyIndex occ(index);
  FoldingReport rep;
  rep.schedule = schedule;
  rep.hat = hat_partition(occ, schedule);
  for (int i = 1; i <= schedule.defining_levels(); ++i) {
    const auto& lv = schedule.level(i);
    if (lv.reachable && !dyadic_cover_holds(occ, lv.r, lv.rho)) rep.dyadic_cover_ok = false;
  }
  double corr = 0.0;
  if (opt.budget) {
    rep.budget = sigma_budget(occ, schedule, rep.hat, table);
    corr = rep.budget.corrector;
  } else {
    corr = corrector(index, table);
    rep.budget.corrector = corr;
  }
  rep.event = folding_event_check(rep.hat, schedule, opt.event, corr);

  if (schedule.d != 4) {
    const auto tp = typical_params_log(schedule.d, schedule.log_n, schedule.n, schedule.zeta,
                                       schedule.options.c0_density);
    rep.vn = compute_Cn_Vn(path, tp.r_n, opt.beta * tp.rho_typ);
    if (opt.green != nullptr && !rep.vn.cells.empty() &&
        static_cast<std::size_t>(rep.vn.volume()) <= opt.max_capacity_sites) {
      const SiteSet v = rep.vn.sites();
      const auto sol = capacity_exact(v, *opt.green, CapacityOptions{opt.max_capacity_sites});
      rep.cap_vn = sol.cap;
      rep.cap_ratio = capacity_volume_ratio(v, sol.cap);
    }
  }
  return rep;
}

}  // namespace rangelab
