#include "rangelab/capacity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rangelab/errors.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/rng.hpp"
#include "rangelab/site_table.hpp"
#include "rangelab/walk.hpp"

namespace rangelab {

namespace {

void check_green(const SiteSet& set, const GreenFunction& green) {
  require(!set.empty(), "capacity: empty site set");
  require(set.dim() == green.dim(), "capacity: Green function dimension does not match the set");
}

Eigen::MatrixXd green_matrix(const SiteSet& set, const GreenFunction& green) {
  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = green(set[static_cast<std::size_t>(i)] - set[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = green(set[static_cast<std::size_t>(j)] - set[static_cast<std::size_t>(i)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace

EquilibriumSolution capacity_exact(const SiteSet& set, const GreenFunction& green, const CapacityOptions& opt) {
  check_green(set, green);
  if (set.size() > opt.max_sites)
    throw ResourceError("capacity_exact: " + std::to_string(set.size()) + " sites exceeds the dense-solve envelope of " +
                        std::to_string(opt.max_sites));
  const Eigen::MatrixXd g = green_matrix(set, green);
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw ContractError("capacity_exact: Green matrix is not positive definite (inconsistent Green oracle)");
  const auto n = g.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd e = llt.solve(ones);
  for (int it = 0; it < opt.refinement_steps; ++it) e += llt.solve(ones - g * e);

  EquilibriumSolution sol;
  sol.sites = set;
  sol.method = CapacityMethod::kExact;
  sol.e.assign(e.data(), e.data() + n);
  sol.cap = e.sum();
  sol.residual = (g * e - ones).cwiseAbs().maxCoeff();
  sol.rcond = llt.rcond();
  if (sol.rcond < opt.rcond_warning)
    sol.warning = "ill-conditioned Green matrix, rcond = " + std::to_string(sol.rcond);
  // first order: d cap = -e^T dG e
  double err = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      err += std::abs(e(i) * e(j)) * g(i, j) *
             green.relative_error(set[static_cast<std::size_t>(j)] - set[static_cast<std::size_t>(i)]);
  sol.error_bar = err;
  return sol;
}

namespace {

struct McTally {
  std::vector<double> raw;     // [batch][site] escape counts
  std::vector<double> m;       // [batch][site][site] sums of G(x' - Y) over escapes
  double max_rel_error = 0.0;
};

template <class Key>
void run_site(const SiteSet& set, std::size_t site, const LatticePoint& centre, const GreenFunction& green,
              const CapacityMcOptions& opt, double radius, const KeyCodec& codec,
              const SiteTable<Key, std::uint8_t>& members, const LatticePoint& box_lo, const LatticePoint& box_hi,
              McTally& tally) {
  const int dim = set.dim();
  const std::size_t ns = set.size();
  const auto r2_escape = static_cast<std::int64_t>(std::ceil(radius * radius));
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * dim; ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  RngStream rng(opt.seed, opt.first_stream + site);
  const LatticePoint start = set[site] - centre;
  const Key start_key = codec.encode<Key>(start);
  const auto two_d = static_cast<std::uint64_t>(2 * dim);
  for (std::int64_t t = 0; t < opt.trials_per_site; ++t) {
    const auto batch = static_cast<std::size_t>(t % opt.batches);
    LatticePoint y = start;
    Key key = start_key;
    std::int64_t r2 = y.norm2();
    bool escaped = false;
    while (true) {
      const int c = static_cast<int>(rng.below(two_d));
      const int a = code_axis(c);
      const int s = code_sign(c);
      r2 += 2 * s * y[a] + 1;
      y[a] += s;
      key += delta[c];
      if (r2 >= r2_escape) {
        escaped = true;
        break;
      }
      bool inside = true;
      for (int j = 0; j < dim && inside; ++j) inside = y[j] >= box_lo[j] && y[j] <= box_hi[j];
      if (inside && members.contains(key)) break;
    }
    if (!escaped) continue;
    tally.raw[batch * ns + site] += 1.0;
    double* row = &tally.m[(batch * ns + site) * ns];
    for (std::size_t j = 0; j < ns; ++j) {
      const LatticePoint z = (set[j] - centre) - y;
      row[j] += green(z);
      tally.max_rel_error = std::max(tally.max_rel_error, green.relative_error(z));
    }
  }
}

double solve_corrected(const std::vector<double>& raw, const std::vector<double>& m, std::size_t ns, double trials,
                       std::vector<double>* e_out) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
  Eigen::VectorXd b(static_cast<Eigen::Index>(ns));
  for (std::size_t i = 0; i < ns; ++i) {
    b(static_cast<Eigen::Index>(i)) = raw[i] / trials;
    for (std::size_t j = 0; j < ns; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += m[i * ns + j] / trials;
  }
  const Eigen::VectorXd e = a.partialPivLu().solve(b);
  if (e_out) e_out->assign(e.data(), e.data() + e.size());
  return e.sum();
}

}  // namespace

EquilibriumSolution capacity_mc(const SiteSet& set, const GreenFunction& green, const CapacityMcOptions& opt) {
  check_green(set, green);
  require(opt.trials_per_site > 0, "capacity_mc: trials must be positive");
  require(opt.batches >= 2 && opt.batches <= opt.trials_per_site, "capacity_mc: need 2 <= batches <= trials");
  const int dim = set.dim();
  const double diam = set.diameter();
  const double radius = opt.escape_radius > 0 ? opt.escape_radius : std::max(4.0 * diam, 64.0);
  require(radius >= 2.0 * diam, "capacity_mc: escape radius must be at least twice the diameter");

  LatticePoint centre(dim);
  for (int j = 0; j < dim; ++j) {
    double s = 0;
    for (const auto& x : set) s += static_cast<double>(x[j]);
    centre[j] = std::llround(s / static_cast<double>(set.size()));
  }
  LatticePoint lo(dim), hi(dim);
  for (int j = 0; j < dim; ++j) {
    lo[j] = std::numeric_limits<std::int64_t>::max();
    hi[j] = std::numeric_limits<std::int64_t>::min();
    for (const auto& x : set) {
      lo[j] = std::min(lo[j], x[j] - centre[j]);
      hi[j] = std::max(hi[j], x[j] - centre[j]);
    }
  }
  std::int64_t bound = static_cast<std::int64_t>(std::ceil(radius)) + 2;
  for (int j = 0; j < dim; ++j) bound = std::max<std::int64_t>({bound, std::abs(lo[j]) + 1, std::abs(hi[j]) + 1});
  const KeyCodec codec(dim, bound);
  const std::size_t ns = set.size();
  const auto nb = static_cast<std::size_t>(opt.batches);
  std::vector<McTally> tallies(ns);

  auto run = [&](auto key_tag) {
    using Key = decltype(key_tag);
    SiteTable<Key, std::uint8_t> members(ns);
    for (const auto& x : set) members.insert(codec.encode<Key>(x - centre), 1);
    parallel_for(static_cast<std::int64_t>(ns), [&](std::int64_t i) {
      auto& t = tallies[static_cast<std::size_t>(i)];
      t.raw.assign(nb * ns, 0.0);
      t.m.assign(nb * ns * ns, 0.0);
      run_site<Key>(set, static_cast<std::size_t>(i), centre, green, opt, radius, codec, members, lo, hi, t);
    });
  };
  if (codec.fits64()) run(std::uint64_t{});
  else run(u128{});

  // merge per-site tallies in site order
  std::vector<double> raw(nb * ns, 0.0), m(nb * ns * ns, 0.0);
  double max_rel = 0.0;
  for (const auto& t : tallies) {
    for (std::size_t k = 0; k < raw.size(); ++k) raw[k] += t.raw[k];
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += t.m[k];
    max_rel = std::max(max_rel, t.max_rel_error);
  }
  std::vector<double> raw_all(ns, 0.0), m_all(ns * ns, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < ns; ++i) raw_all[i] += raw[b * ns + i];
    for (std::size_t k = 0; k < ns * ns; ++k) m_all[k] += m[b * ns * ns + k];
  }

  EquilibriumSolution sol;
  sol.sites = set;
  sol.method = CapacityMethod::kMonteCarlo;
  sol.trials_per_site = opt.trials_per_site;
  sol.escape_radius = radius;
  const auto trials = static_cast<double>(opt.trials_per_site);
  sol.cap = solve_corrected(raw_all, m_all, ns, trials, &sol.e);
  for (double r : raw_all) sol.raw_cap += r / trials;

  std::vector<double> batch_caps(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::int64_t per = opt.trials_per_site / opt.batches + (static_cast<std::int64_t>(b) <
                                                                  opt.trials_per_site % opt.batches ? 1 : 0);
    const std::vector<double> rb(raw.begin() + static_cast<std::ptrdiff_t>(b * ns),
                                 raw.begin() + static_cast<std::ptrdiff_t>((b + 1) * ns));
    const std::vector<double> mb(m.begin() + static_cast<std::ptrdiff_t>(b * ns * ns),
                                 m.begin() + static_cast<std::ptrdiff_t>((b + 1) * ns * ns));
    batch_caps[b] = solve_corrected(rb, mb, ns, static_cast<double>(per), nullptr);
  }
  sol.se = sample_moments(batch_caps).se_mean;
  sol.bias_bound = std::abs(sol.raw_cap - sol.cap) * max_rel;

  // sup over the sphere |y - centre| = R, probed along axes, diagonals and a fixed set of directions
  RngStream dir_rng(0x5eedULL, 0);
  double sphere = 0.0;
  for (int probe = 0; probe < 64 + 2 * dim; ++probe) {
    std::vector<double> u(static_cast<std::size_t>(dim), 0.0);
    if (probe < 2 * dim) {
      u[static_cast<std::size_t>(probe / 2)] = (probe & 1) ? -1.0 : 1.0;
    } else {
      double norm = 0;
      for (auto& v : u) {
        v = dir_rng.uniform() * 2.0 - 1.0;
        norm += v * v;
      }
      for (auto& v : u) v /= std::sqrt(norm);
    }
    LatticePoint y(dim);
    for (int j = 0; j < dim; ++j) y[j] = centre[j] + std::llround(radius * u[static_cast<std::size_t>(j)]);
    double s = 0;
    for (const auto& x : set) s += green(x - y);
    sphere = std::max(sphere, s);
  }
  sol.sphere_return_bound = sphere;
  sol.error_bar = sol.se + sol.bias_bound;
  return sol;
}

double capacity_volume_ratio(const SiteSet& set, double cap) {
  require(!set.empty(), "capacity_volume_ratio: empty set");
  const double d = set.dim();
  return cap / std::pow(static_cast<double>(set.size()), 1.0 - 2.0 / d);
}

double capacity_volume_lower(const SiteSet& set, const GreenFunction& green) {
  return capacity_volume_ratio(set, capacity_exact(set, green).cap);
}

double sup_green_potential(const SiteSet& set, const SiteSet& probe, const GreenFunction& green) {
  double best = 0.0;
  for (const auto& y : probe) {
    double s = 0;
    for (const auto& x : set) s += green(x - y);
    best = std::max(best, s);
  }
  return best;
}

CapacityTimeReport capacity_time_inequality(const SiteSet& set, const GreenFunction& green,
                                            const EquilibriumSolution& solved) {
  CapacityTimeReport r;
  r.cap = solved.cap;
  r.sup_occupation = std::max(sup_green_potential(set, set, green), sup_green_potential(set, set.outer_ring(), green));
  r.product_ratio = r.cap * r.sup_occupation / static_cast<double>(set.size());
  return r;
}

CapacityTimeReport capacity_time_inequality(const SiteSet& set, const GreenFunction& green) {
  return capacity_time_inequality(set, green, capacity_exact(set, green));
}

std::int64_t min_separation(const SiteSet& points) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b) best = std::min(best, (points[a] - points[b]).linf_norm());
  return best;
}

SeparatedSet::SeparatedSet(std::int64_t r, SiteSet centers) : r_(r), centers_(std::move(centers)) {
  require(r >= 1, "SeparatedSet: r must be positive");
  const std::int64_t sep = min_separation(centers_);
  require(centers_.size() < 2 || sep > 2 * r,
          "SeparatedSet: centres at sup-distance " + std::to_string(sep) + " <= 2r = " + std::to_string(2 * r));
}

SiteSet SeparatedSet::cube_union() const {
  return SiteSet::union_of_cubes(centers_.dim(), centers_.sites(), r_);
}

namespace {

bool cubes_disjoint(const LatticePoint& a, const LatticePoint& b, double side) {
  for (int j = 0; j < a.dim(); ++j) {
    std::int64_t alo, ahi, blo, bhi;
    cube_axis_range(side, a[j], &alo, &ahi);
    cube_axis_range(side, b[j], &blo, &bhi);
    if (ahi < alo || bhi < blo || ahi < blo || bhi < alo) return true;
  }
  return false;
}

}  // namespace

ExtractionResult extract_high_capacity_subset(const SeparatedSet& c, const GreenFunction* green) {
  const SiteSet& pts = c.centers();
  require(!pts.empty(), "extract_high_capacity_subset: empty set");
  const int d = pts.dim();
  const auto size = static_cast<double>(pts.size());
  ExtractionResult res;
  // small slack so that exact powers are not lost to rounding
  res.big_r = static_cast<std::int64_t>(std::floor(static_cast<double>(c.r()) * std::pow(size, 2.0 / (d * d)) + 1e-9));
  res.target = static_cast<std::size_t>(std::floor(std::pow(size, 1.0 - 2.0 / d) + 1e-9));
  const double half = static_cast<double>(res.big_r) / 2.0;
  std::vector<LatticePoint> chosen;
  for (const auto& z : pts) {
    bool ok = true;
    for (const auto& w : chosen) {
      if (!cubes_disjoint(z, w, half)) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(z);
  }
  res.greedy_count = chosen.size();
  res.covers = std::all_of(pts.begin(), pts.end(), [&](const LatticePoint& x) {
    return std::any_of(chosen.begin(), chosen.end(), [&](const LatticePoint& z) {
      return cube_contains(Cube{z, static_cast<double>(res.big_r)}, x);
    });
  });
  chosen.resize(std::min(chosen.size(), std::max<std::size_t>(res.target, 1)));
  res.subset = SeparatedSet(c.r(), SiteSet(d, chosen));
  if (green) {
    const SiteSet u = res.subset.cube_union();
    res.sup_occupation = std::max(sup_green_potential(u, u, *green), sup_green_potential(u, u.outer_ring(), *green));
    res.occupation_ratio = res.sup_occupation / static_cast<double>(c.r() * c.r());
  }
  return res;
}

double FillingReport::log_p() const { return hits > 0 ? std::log(p_hat) : std::log(ci.high); }

FillingReport filling_probability_bound_check(const SeparatedSet& c, double rho, std::int64_t n, std::int64_t samples,
                                              const GreenFunction& green, std::uint64_t seed) {
  require(c.size() >= 1 && c.size() <= 3 && c.r() <= 4, "filling_probability_bound_check: needs |C| <= 3, r <= 4");
  require(rho >= 0 && n >= 0 && samples >= 1, "filling_probability_bound_check: bad parameters");
  FillingReport rep;
  rep.rho = rho;
  rep.steps = n;
  rep.samples = samples;
  rep.cap_union = capacity_exact(c.cube_union(), green).cap;
  const int d = c.centers().dim();
  const double need = rho * std::pow(static_cast<double>(c.r()), d);
  std::vector<char> hit(static_cast<std::size_t>(samples));
  const std::vector<LatticePoint>& centres = c.centers().sites();
  parallel_for(samples, [&](std::int64_t i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    std::vector<std::int64_t> counts(centres.size(), 0);
    LatticePoint p(d);
    auto tally = [&] {
      for (std::size_t q = 0; q < centres.size(); ++q)
        if (cube_contains(Cube{centres[q], static_cast<double>(c.r())}, p)) ++counts[q];
    };
    tally();
    const auto two_d = static_cast<std::uint64_t>(2 * d);
    for (std::int64_t k = 0; k < n; ++k) {
      const int code = static_cast<int>(rng.below(two_d));
      p[code_axis(code)] += code_sign(code);
      tally();
    }
    hit[static_cast<std::size_t>(i)] =
        std::all_of(counts.begin(), counts.end(), [&](std::int64_t v) { return static_cast<double>(v) >= need; });
  });
  for (char h : hit) rep.hits += h;
  rep.p_hat = static_cast<double>(rep.hits) / static_cast<double>(samples);
  rep.ci = wilson_interval(rep.hits, samples);
  rep.one_sided = rep.hits == 0;
  return rep;
}

}  // namespace rangelab
