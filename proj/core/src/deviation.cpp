#include "rangelab/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rangelab/errors.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/range_stats.hpp"
#include "rangelab/site_table.hpp"

namespace rangelab {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kZ95OneSided = 1.6448536269514722;

// Distinct sites among the keys fed to add(); the table is reused across calls.
template <class Key>
class KeyRange {
 public:
  explicit KeyRange(const KeyCodec& codec) : codec_(codec) {
    for (int c = 0; c < 2 * codec.dim(); ++c) delta_[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  }
  void reset(std::size_t expected) {
    table_.clear();
    table_.reserve(expected);
    key_ = codec_.template origin<Key>();
    table_.insert(key_);
  }
  void step(int code) {
    key_ += delta_[code];
    table_.insert(key_);
  }
  std::int64_t size() const { return static_cast<std::int64_t>(table_.size()); }

 private:
  KeyCodec codec_;
  Key delta_[2 * kMaxDim];
  Key key_ = 0;
  SiteTable<Key, std::uint8_t> table_{16};
};

// |R[a, b]| of a path, reusing a per-thread table.
std::int64_t segment_range(const WalkPath& path, std::int64_t a, std::int64_t b) {
  const KeyCodec codec(path.dim(), std::max<std::int64_t>(1, b - a));
  const auto expected = static_cast<std::size_t>(b - a + 1);
  if (codec.fits64()) {
    thread_local KeyRange<std::uint64_t>* r = nullptr;
    thread_local KeyCodec last;
    if (r == nullptr || last.dim() != codec.dim() || last.bound() != codec.bound()) {
      delete r;
      r = new KeyRange<std::uint64_t>(codec);
      last = codec;
    }
    r->reset(expected);
    for (std::int64_t k = a; k < b; ++k) r->step(path.code(k));
    return r->size();
  }
  thread_local KeyRange<u128>* r = nullptr;
  thread_local KeyCodec last;
  if (r == nullptr || last.dim() != codec.dim() || last.bound() != codec.bound()) {
    delete r;
    r = new KeyRange<u128>(codec);
    last = codec;
  }
  r->reset(expected);
  for (std::int64_t k = a; k < b; ++k) r->step(path.code(k));
  return r->size();
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Systematic resampling: indices drawn proportionally to exp(logw).
std::vector<std::int32_t> systematic_resample(std::span<const double> logw, std::size_t count, RngStream& rng) {
  const double mx = *std::max_element(logw.begin(), logw.end());
  std::vector<double> cum(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    total += std::isfinite(logw[i]) ? std::exp(logw[i] - mx) : 0.0;
    cum[i] = total;
  }
  std::vector<std::int32_t> out(count);
  const double step = total / static_cast<double>(count);
  double u = rng.uniform() * step;
  std::size_t j = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (j + 1 < cum.size() && cum[j] <= u) ++j;
    out[i] = static_cast<std::int32_t>(j);
    u += step;
  }
  return out;
}

}  // namespace

double rate_coordinate(int d, std::int64_t n, double zeta) {
  require(d >= 3 && n >= 1 && zeta > 0.0, "rate_coordinate: need d >= 3, n >= 1, zeta > 0");
  if (d == 3) return std::cbrt(zeta * zeta / static_cast<double>(n));
  return std::pow(zeta, 1.0 - 2.0 / d);
}

Calibration calibrate(int d, std::int64_t n, std::span<const std::int64_t> volumes, std::uint64_t seed,
                      std::uint64_t first_stream) {
  require(volumes.size() >= 2, "calibrate: need at least two samples");
  const auto rep = moment_report(d, n, std::vector<std::int64_t>(volumes.begin(), volumes.end()));
  Calibration c;
  c.dim = d;
  c.steps = n;
  c.samples = static_cast<std::int64_t>(volumes.size());
  c.seed = seed;
  c.first_stream = first_stream;
  c.mean = rep.moments.mean;
  c.variance = rep.moments.variance;
  c.se_mean = rep.moments.se_mean;
  return c;
}

Calibration calibrate(int d, std::int64_t n, std::int64_t samples, std::uint64_t seed, std::uint64_t first_stream) {
  const auto v = sample_range_volumes(d, n, samples, seed, first_stream);
  return calibrate(d, n, v, seed, first_stream);
}

const char* estimator_name(EstimatorKind k) {
  return k == EstimatorKind::kDirect ? "direct" : "confined-lower-bound";
}

DeviationEstimate direct_tail(const Calibration& cal, double zeta, std::span<const std::int64_t> volumes) {
  require(!volumes.empty(), "direct_tail: empty sample");
  require(zeta >= 0.0, "direct_tail: zeta must be non-negative");
  DeviationEstimate e;
  e.dim = cal.dim;
  e.steps = cal.steps;
  e.zeta = zeta;
  e.estimator = EstimatorKind::kDirect;
  e.samples = static_cast<std::int64_t>(volumes.size());
  for (const auto v : volumes)
    if (static_cast<double>(v) - cal.mean <= -zeta) ++e.hits;
  e.rate_coordinate = zeta > 0.0 ? rate_coordinate(cal.dim, cal.steps, zeta) : 0.0;
  if (e.hits == 0) {
    e.one_sided = true;
    e.ci = wilson_interval(0, e.samples, kZ95OneSided);
    e.ci.low = 0.0;
    e.p_hat = e.ci.high;
    e.log_p = std::log(e.ci.high);
    e.log_ci_low = -std::numeric_limits<double>::infinity();
    e.log_ci_high = e.log_p;
    e.warnings.push_back("no hits: p_hat is the one-sided 95% upper bound");
    return e;
  }
  e.p_hat = static_cast<double>(e.hits) / static_cast<double>(e.samples);
  e.ci = wilson_interval(e.hits, e.samples, kZ95);
  e.log_p = std::log(e.p_hat);
  e.log_ci_low = std::log(e.ci.low);
  e.log_ci_high = std::log(e.ci.high);
  return e;
}

DeviationEstimate direct_tail(const Calibration& cal, double zeta, std::int64_t samples, std::uint64_t seed,
                              std::uint64_t first_stream) {
  require(seed != cal.seed || first_stream >= cal.first_stream + static_cast<std::uint64_t>(cal.samples) ||
              first_stream + static_cast<std::uint64_t>(samples) <= cal.first_stream,
          "direct_tail: experiment streams overlap the calibration streams");
  const auto v = sample_range_volumes(cal.dim, cal.steps, samples, seed, first_stream);
  return direct_tail(cal, zeta, v);
}

// ---------------------------------------------------------------------------
// Confinement

ConfinementBox ConfinementBox::cube(int dim, double side) {
  require(dim >= 1 && dim <= kMaxDim, "ConfinementBox: dimension out of range");
  require(side >= 1.0, "ConfinementBox: side must be at least 1");
  ConfinementBox b;
  b.dim = dim;
  for (int j = 0; j < dim; ++j) cube_axis_range(side, 0, &b.lo[static_cast<std::size_t>(j)], &b.hi[static_cast<std::size_t>(j)]);
  return b;
}

ConfinementBox ConfinementBox::with_volume(int dim, double volume) {
  require(dim >= 1 && dim <= kMaxDim, "ConfinementBox: dimension out of range");
  require(volume >= 1.0, "ConfinementBox: volume must be at least 1");
  auto L = static_cast<std::int64_t>(std::floor(std::pow(volume, 1.0 / dim)));
  L = std::max<std::int64_t>(L, 1);
  while (std::pow(static_cast<double>(L + 1), dim) <= volume) ++L;
  while (L > 1 && std::pow(static_cast<double>(L), dim) > volume) --L;
  int best_k = 0;
  double best_gap = HUGE_VAL;
  for (int k = 0; k <= dim; ++k) {
    const double v = std::pow(static_cast<double>(L), dim - k) * std::pow(static_cast<double>(L + 1), k);
    const double gap = std::abs(v - volume);
    if (gap < best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  ConfinementBox b;
  b.dim = dim;
  for (int j = 0; j < dim; ++j) {
    const double side = static_cast<double>(j < best_k ? L + 1 : L);
    cube_axis_range(side, 0, &b.lo[static_cast<std::size_t>(j)], &b.hi[static_cast<std::size_t>(j)]);
  }
  return b;
}

std::int64_t ConfinementBox::volume() const {
  std::int64_t v = 1;
  for (int j = 0; j < dim; ++j) v *= side(j);
  return v;
}

bool ConfinementBox::contains(const LatticePoint& p) const {
  for (int j = 0; j < dim; ++j)
    if (p[j] < lo[static_cast<std::size_t>(j)] || p[j] > hi[static_cast<std::size_t>(j)]) return false;
  return true;
}

double ConfinementBox::survival_rate() const {
  double s = 0.0;
  for (int j = 0; j < dim; ++j) s += std::cos(M_PI / static_cast<double>(side(j) + 1));
  return s / dim;
}

const char* confined_mode_name(ConfinedMode m) {
  switch (m) {
    case ConfinedMode::kAuto: return "auto";
    case ConfinedMode::kRejection: return "rejection";
    case ConfinedMode::kCloning: return "cloning";
    case ConfinedMode::kGuided: return "guided";
  }
  return "?";
}

namespace {

// Particle genealogy: per step t >= 1 the code taken and the index of the
// parent particle at step t - 1.
struct Genealogy {
  std::int64_t m = 0;
  std::size_t N = 0;
  std::vector<std::uint8_t> codes;
  std::vector<std::int32_t> parents;

  Genealogy(std::int64_t steps, std::size_t count)
      : m(steps), N(count), codes(static_cast<std::size_t>(steps) * count), parents(codes.size()) {}
  void record(std::int64_t t, std::size_t i, int code, std::int32_t parent) {
    const std::size_t at = static_cast<std::size_t>(t - 1) * N + i;
    codes[at] = static_cast<std::uint8_t>(code);
    parents[at] = parent;
  }
  WalkPath trace(int dim, std::size_t final_index, std::uint64_t seed, std::uint64_t stream) const {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(m));
    std::size_t idx = final_index;
    for (std::int64_t t = m; t >= 1; --t) {
      const std::size_t at = static_cast<std::size_t>(t - 1) * N + idx;
      out[static_cast<std::size_t>(t - 1)] = codes[at];
      idx = static_cast<std::size_t>(parents[at]);
    }
    return WalkPath::from_codes(dim, out, seed, stream);
  }
};

ConfinedRun run_rejection(const ConfinementBox& box, std::int64_t m, const ConfinedOptions& opt, RngStream& rng) {
  ConfinedRun run;
  run.mode = ConfinedMode::kRejection;
  run.m = m;
  const int d = box.dim;
  const auto two_d = static_cast<std::uint64_t>(2 * d);
  std::vector<std::uint8_t> codes(static_cast<std::size_t>(m));
  while (run.accepted < opt.population) {
    if (run.trials >= opt.rejection_budget)
      throw ResourceError("confined_sampler: rejection budget of " + std::to_string(opt.rejection_budget) +
                          " walks exhausted with " + std::to_string(run.accepted) + " accepted (rate " +
                          std::to_string(run.acceptance_rate()) + ")");
    ++run.trials;
    LatticePoint p(d);
    bool inside = true;
    for (std::int64_t k = 0; k < m; ++k) {
      const int c = static_cast<int>(rng.below(two_d));
      codes[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(c);
      p[code_axis(c)] += code_sign(c);
      if (!box.contains(p)) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    ++run.accepted;
    run.paths.push_back(WalkPath::from_codes(d, codes, rng.seed(), rng.stream_id()));
  }
  // accepted - 1 over trials - 1 is unbiased under sampling until a fixed number of acceptances
  const double p = run.accepted >= 2 ? static_cast<double>(run.accepted - 1) / static_cast<double>(run.trials - 1)
                                     : 1.0 / static_cast<double>(run.trials);
  run.log_z = std::log(p);
  return run;
}

ConfinedRun run_particles(const ConfinementBox& box, std::int64_t m, const ConfinedOptions& opt, RngStream& rng,
                          bool guided) {
  ConfinedRun run;
  run.mode = guided ? ConfinedMode::kGuided : ConfinedMode::kCloning;
  run.m = m;
  const int d = box.dim;
  const auto N = static_cast<std::size_t>(opt.population);
  const double log_2d = std::log(2.0 * d);
  Genealogy gen(m, N);
  std::vector<std::int64_t> pos(N * static_cast<std::size_t>(d), 0), next_pos(pos.size());
  std::vector<double> logw(N, 0.0), next_logw(N);
  std::vector<std::int32_t> anc(N);
  std::iota(anc.begin(), anc.end(), 0);
  const auto two_d = static_cast<std::uint64_t>(2 * d);
  int allowed[2 * kMaxDim];
  double survival_sum = 0.0;

  auto resample = [&](std::span<const double> w) {
    const auto pick = systematic_resample(w, N, rng);
    for (std::size_t i = 0; i < N; ++i) {
      const auto src = static_cast<std::size_t>(pick[i]);
      std::copy_n(&pos[src * static_cast<std::size_t>(d)], d, &next_pos[i * static_cast<std::size_t>(d)]);
      next_logw[i] = 0.0;
    }
    pos.swap(next_pos);
    logw.swap(next_logw);
    for (std::size_t i = 0; i < N; ++i) anc[i] = pick[i];
    ++run.resamples;
  };

  for (std::int64_t t = 1; t <= m; ++t) {
    std::size_t alive = 0;
    for (std::size_t i = 0; i < N; ++i) {
      std::int64_t* x = &pos[i * static_cast<std::size_t>(d)];
      int code;
      if (guided) {
        int a = 0;
        for (int j = 0; j < d; ++j) {
          if (x[j] + 1 <= box.hi[static_cast<std::size_t>(j)]) allowed[a++] = 2 * j;
          if (x[j] - 1 >= box.lo[static_cast<std::size_t>(j)]) allowed[a++] = 2 * j + 1;
        }
        if (a == 0) {
          logw[i] = -HUGE_VAL;
          code = 0;
        } else {
          code = allowed[rng.below(static_cast<std::uint64_t>(a))];
          logw[i] += std::log(static_cast<double>(a)) - log_2d;
          x[code_axis(code)] += code_sign(code);
        }
      } else {
        code = static_cast<int>(rng.below(two_d));
        x[code_axis(code)] += code_sign(code);
        const auto j = static_cast<std::size_t>(code_axis(code));
        if (x[code_axis(code)] < box.lo[j] || x[code_axis(code)] > box.hi[j]) logw[i] = -HUGE_VAL;
      }
      if (std::isfinite(logw[i])) ++alive;
      gen.record(t, i, code, anc[i]);
      anc[i] = static_cast<std::int32_t>(i);
    }
    if (alive == 0) {
      run.log_z = -HUGE_VAL;
      return run;
    }
    if (!guided) {
      survival_sum += static_cast<double>(alive) / static_cast<double>(N);
      run.log_z += std::log(static_cast<double>(alive) / static_cast<double>(N));
      if (t < m) resample(logw);
      continue;
    }
    // effective sample size of the current weights
    const double mx = *std::max_element(logw.begin(), logw.end());
    double s1 = 0.0, s2 = 0.0;
    for (double lw : logw) {
      const double w = std::isfinite(lw) ? std::exp(lw - mx) : 0.0;
      s1 += w;
      s2 += w * w;
    }
    const double ess = s1 * s1 / s2;
    if (ess < opt.resample_ess * static_cast<double>(N) && t < m) {
      run.log_z += mx + std::log(s1 / static_cast<double>(N));
      resample(logw);
    }
  }
  if (guided) {
    run.log_z += log_mean_exp(logw);
  } else {
    run.unweighted_survival = survival_sum / static_cast<double>(m);
  }
  // final draw of equally weighted paths
  const auto pick = systematic_resample(logw, N, rng);
  run.paths.reserve(N);
  for (std::size_t i = 0; i < N; ++i)
    run.paths.push_back(gen.trace(d, static_cast<std::size_t>(pick[i]), rng.seed(), rng.stream_id()));
  return run;
}

}  // namespace

ConfinedRun confined_sampler(const ConfinementBox& box, std::int64_t m, const ConfinedOptions& opt,
                             std::uint64_t seed, std::uint64_t stream) {
  require(box.dim >= 1 && box.contains(LatticePoint(box.dim)), "confined_sampler: box must contain the origin");
  require(m >= 0, "confined_sampler: negative step count");
  require(opt.population >= 1, "confined_sampler: population must be positive");
  RngStream rng(seed, stream);
  ConfinedMode mode = opt.mode;
  if (mode == ConfinedMode::kAuto) {
    const double predicted = std::pow(box.survival_rate(), static_cast<double>(m));
    std::int64_t reach = 0;
    for (int j = 0; j < box.dim; ++j)
      reach = std::min({reach == 0 ? INT64_MAX : reach, -box.lo[static_cast<std::size_t>(j)], box.hi[static_cast<std::size_t>(j)]});
    mode = (reach >= m || predicted >= opt.rejection_threshold) ? ConfinedMode::kRejection : ConfinedMode::kGuided;
  }
  if (m == 0) {
    ConfinedRun run;
    run.mode = mode;
    run.paths.assign(static_cast<std::size_t>(opt.population), WalkPath(box.dim, seed, stream));
    run.trials = run.accepted = opt.population;
    return run;
  }
  switch (mode) {
    case ConfinedMode::kRejection: return run_rejection(box, m, opt, rng);
    case ConfinedMode::kCloning: return run_particles(box, m, opt, rng, false);
    default: return run_particles(box, m, opt, rng, true);
  }
}

ConfinementEstimate estimate_confinement(const ConfinementBox& box, std::int64_t m, int replicates,
                                         const ConfinedOptions& opt, std::uint64_t seed,
                                         std::uint64_t first_stream) {
  require(replicates >= 2, "estimate_confinement: need at least two replicates");
  ConfinementEstimate out;
  out.log_z.resize(static_cast<std::size_t>(replicates));
  std::vector<ConfinedMode> modes(out.log_z.size());
  parallel_for(replicates, [&](std::int64_t r) {
    auto run = confined_sampler(box, m, opt, seed, first_stream + static_cast<std::uint64_t>(r));
    out.log_z[static_cast<std::size_t>(r)] = run.log_z;
    modes[static_cast<std::size_t>(r)] = run.mode;
  });
  out.mode = modes.front();
  out.log_p = log_mean_exp(out.log_z);
  std::vector<double> rel(out.log_z.size());
  for (std::size_t r = 0; r < rel.size(); ++r) rel[r] = std::exp(out.log_z[r] - out.log_p);
  out.p = std::exp(out.log_p);
  out.se = out.p * sd_of(rel) / std::sqrt(static_cast<double>(replicates));
  return out;
}

LowerBoundPlan lower_bound_plan(int d, std::int64_t n, double zeta, const LowerBoundOptions& opt) {
  require(d >= 3, "lower_bound_plan: dimension must be at least 3");
  require(n >= 2 && zeta > 0.0, "lower_bound_plan: need n >= 2 and zeta > 0");
  LowerBoundPlan plan;
  if (d == 3) {
    require(opt.d3_box_factor > 0.0, "lower_bound_plan: box factor must be positive");
    const double nd = static_cast<double>(n);
    const double side = opt.d3_box_factor * std::cbrt(nd * nd / zeta);
    plan.box = ConfinementBox::with_volume(3, std::max(1.0, side * side * side));
    plan.m = n / 2;
  } else {
    require(opt.gamma > 0.0 && opt.gamma <= 1.0, "lower_bound_plan: gamma_d in (0, 1] is required");
    plan.box = ConfinementBox::with_volume(d, zeta);
    plan.m = static_cast<std::int64_t>(std::floor(3.0 * zeta / opt.gamma));
    require(plan.m <= n, "lower_bound_plan: m = floor(3 zeta / gamma) exceeds n");
  }
  return plan;
}

DeviationEstimate lower_bound_experiment(const Calibration& cal, double zeta, const LowerBoundOptions& opt,
                                         std::uint64_t seed, std::uint64_t first_stream) {
  require(opt.replicates >= 2, "lower_bound_experiment: need at least two replicates");
  const int d = cal.dim;
  const std::int64_t n = cal.steps;
  const auto plan = lower_bound_plan(d, n, zeta, opt);
  const auto N = static_cast<std::uint64_t>(opt.sampler.population);
  DeviationEstimate e;
  e.dim = d;
  e.steps = n;
  e.zeta = zeta;
  e.estimator = EstimatorKind::kConfinedLowerBound;
  e.rate_coordinate = rate_coordinate(d, n, zeta);
  e.replicates = opt.replicates;
  e.confinement_steps = plan.m;
  e.box_volume = plan.box.volume();
  const double nd = static_cast<double>(n);
  if (d == 3 && zeta < std::cbrt(nd * nd)) e.warnings.push_back("zeta below n^{2/3}");
  if (d >= 5 && zeta < std::pow(nd, static_cast<double>(d) / (d + 2)))
    e.warnings.push_back("zeta below n^{d/(d+2)}");
  if (2 * plan.m > n) e.warnings.push_back("n - m < n/2");

  std::vector<double> log_z(static_cast<std::size_t>(opt.replicates)), hit_frac(log_z.size());
  std::int64_t hits = 0;
  for (int r = 0; r < opt.replicates; ++r) {
    const std::uint64_t base = first_stream + static_cast<std::uint64_t>(r) * (N + 1);
    const auto run = confined_sampler(plan.box, plan.m, opt.sampler, seed, base);
    log_z[static_cast<std::size_t>(r)] = run.log_z;
    if (run.paths.empty()) {
      hit_frac[static_cast<std::size_t>(r)] = 0.0;
      continue;
    }
    std::vector<char> hit(run.paths.size(), 0);
    parallel_for(static_cast<std::int64_t>(run.paths.size()), [&](std::int64_t i) {
      RngStream rng(seed, base + 1 + static_cast<std::uint64_t>(i));
      WalkPath full = run.paths[static_cast<std::size_t>(i)];
      full.append(simulate_walk(d, n - plan.m, rng));
      const double range = static_cast<double>(segment_range(full, 0, n));
      hit[static_cast<std::size_t>(i)] = range - cal.mean <= -zeta;
    });
    std::int64_t h = 0;
    for (char c : hit) h += c;
    hits += h;
    hit_frac[static_cast<std::size_t>(r)] = static_cast<double>(h) / static_cast<double>(run.paths.size());
  }
  e.hits = hits;
  e.samples = static_cast<std::int64_t>(N) * opt.replicates;
  e.log_p_event = log_mean_exp(log_z);
  e.p_deviation_given_event = static_cast<double>(hits) / static_cast<double>(e.samples);

  std::vector<double> logs(log_z.size());
  for (std::size_t r = 0; r < logs.size(); ++r)
    logs[r] = hit_frac[r] > 0.0 ? log_z[r] + std::log(hit_frac[r]) : -HUGE_VAL;
  const double lp = log_mean_exp(logs);
  if (!std::isfinite(lp)) {
    // no replicate achieved the deviation: report a one-sided bound
    e.one_sided = true;
    const auto w = wilson_interval(0, e.samples, kZ95OneSided);
    e.log_p = e.log_p_event + std::log(w.high);
    e.log_ci_low = -HUGE_VAL;
    e.log_ci_high = e.log_p;
    e.p_hat = std::exp(e.log_p);
    e.ci = {0.0, e.p_hat};
    e.warnings.push_back("no replicate reached the deviation: one-sided bound");
    return e;
  }
  std::vector<double> rel(logs.size());
  for (std::size_t r = 0; r < rel.size(); ++r) rel[r] = std::isfinite(logs[r]) ? std::exp(logs[r] - lp) : 0.0;
  const double rel_se = sd_of(rel) / std::sqrt(static_cast<double>(rel.size()));
  e.log_p = lp;
  e.log_ci_low = lp - kZ95 * rel_se;
  e.log_ci_high = lp + kZ95 * rel_se;
  e.p_hat = std::exp(lp);
  e.ci = {std::exp(e.log_ci_low), std::exp(e.log_ci_high)};
  return e;
}

RateFit rate_fit(std::span<const DeviationEstimate> estimates) {
  std::vector<double> x, y, w;
  for (const auto& e : estimates) {
    if (!std::isfinite(e.log_p) || e.one_sided) continue;
    x.push_back(e.rate_coordinate);
    y.push_back(e.log_p);
    double half = (e.log_ci_high - e.log_ci_low) / (2.0 * kZ95);
    if (!std::isfinite(half) || half <= 1e-9) half = 1e-9;
    w.push_back(1.0 / (half * half));
  }
  require(x.size() >= 4, "rate_fit: need at least four estimates with finite log p");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  require(*hi > *lo, "rate_fit: degenerate design, all estimates share one rate coordinate");
  const auto f = weighted_linear_fit(x, y, w);
  return RateFit{f.slope, f.intercept, f.r_squared, f.slope_se, f.points};
}

// ---------------------------------------------------------------------------
// Gaussian regime

namespace {

// Distinct sites of the concatenation of the given block segments.
template <class Key>
std::int64_t concat_range(const KeyCodec& codec, const std::vector<const WalkPath*>& walks,
                          const std::vector<std::int64_t>& bounds, std::size_t expected) {
  thread_local SiteTable<Key, std::uint8_t> table(16);
  table.clear();
  table.reserve(expected);
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * codec.dim(); ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  Key key = codec.origin<Key>();
  table.insert(key);
  for (std::size_t i = 0; i < walks.size(); ++i)
    for (std::int64_t k = bounds[i]; k < bounds[i + 1]; ++k) {
      key += delta[walks[i]->code(k)];
      table.insert(key);
    }
  return static_cast<std::int64_t>(table.size());
}

std::int64_t concat_range(const KeyCodec& codec, const std::vector<const WalkPath*>& walks,
                          const std::vector<std::int64_t>& bounds) {
  const auto expected = static_cast<std::size_t>(bounds.back() + 1);
  return codec.fits64() ? concat_range<std::uint64_t>(codec, walks, bounds, expected)
                        : concat_range<u128>(codec, walks, bounds, expected);
}

}  // namespace

GaussianMgfReport gaussian_mgf_check(const Calibration& cal, double zeta, std::span<const double> thetas,
                                     const GaussianMgfOptions& opt, std::uint64_t seed, std::uint64_t first_stream) {
  const int d = cal.dim;
  const std::int64_t n = cal.steps;
  require(d >= 5, "gaussian_mgf_check: needs d >= 5");
  require(zeta > 0.0, "gaussian_mgf_check: zeta must be positive");
  require(opt.levels >= 0 && opt.levels <= 16 && (std::int64_t(1) << opt.levels) <= n,
          "gaussian_mgf_check: 2^levels must not exceed n");
  require(opt.block_samples >= 2 && opt.concatenations >= 2 && opt.replicates >= 2 && opt.cross_calibration >= 2,
          "gaussian_mgf_check: sample sizes too small");
  GaussianMgfReport rep;
  rep.dim = d;
  rep.steps = n;
  rep.zeta = zeta;
  rep.sigma2 = cal.sigma2();
  if (zeta * zeta <= static_cast<double>(n)) rep.warnings.push_back("zeta below sqrt(n): outside the moderate window");

  const std::size_t B = std::size_t(1) << opt.levels;
  std::vector<std::int64_t> bounds(B + 1);
  for (std::size_t i = 0; i <= B; ++i)
    bounds[i] = static_cast<std::int64_t>((static_cast<unsigned __int128>(i) * static_cast<std::uint64_t>(n)) >> opt.levels);
  const KeyCodec codec(d, n);
  const auto M = static_cast<std::size_t>(opt.block_samples);
  const auto R = static_cast<std::uint64_t>(opt.replicates);
  const std::uint64_t pool_streams = R * M;
  const std::uint64_t resample_base = first_stream + pool_streams;
  const std::uint64_t cross_base = resample_base + R;

  // E[C] from plain walks on their own streams
  std::vector<double> cross(static_cast<std::size_t>(opt.cross_calibration));
  parallel_for(opt.cross_calibration, [&](std::int64_t s) {
    RngStream rng(seed, cross_base + static_cast<std::uint64_t>(s));
    const WalkPath w = simulate_walk(d, n, rng);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < B; ++i) sum += segment_range(w, bounds[i], bounds[i + 1]);
    cross[static_cast<std::size_t>(s)] = static_cast<double>(sum - segment_range(w, 0, n));
  });
  rep.mean_cross = mean_of(cross);

  const double scale = static_cast<double>(n) / (zeta * zeta);
  std::vector<std::vector<double>> values(thetas.size());
  std::vector<double> min_ess(thetas.size(), 1.0);

  for (std::uint64_t r = 0; r < R; ++r) {
    std::vector<WalkPath> pool(M);
    std::vector<std::vector<double>> size(B, std::vector<double>(M));
    parallel_for(static_cast<std::int64_t>(M), [&](std::int64_t j) {
      RngStream rng(seed, first_stream + r * M + static_cast<std::uint64_t>(j));
      pool[static_cast<std::size_t>(j)] = simulate_walk(d, n, rng);
      for (std::size_t i = 0; i < B; ++i)
        size[i][static_cast<std::size_t>(j)] =
            static_cast<double>(segment_range(pool[static_cast<std::size_t>(j)], bounds[i], bounds[i + 1]));
    });
    std::vector<double> block_mean(B);
    for (std::size_t i = 0; i < B; ++i) block_mean[i] = mean_of(size[i]);

    RngStream pick_rng(seed, resample_base + r);
    for (std::size_t q = 0; q < thetas.size(); ++q) {
      const double theta = thetas[q];
      if (theta == 0.0) {
        values[q].push_back(0.0);
        continue;
      }
      const double t = theta * zeta / static_cast<double>(n);
      double cumulant = 0.0;
      std::vector<std::vector<double>> cum(B, std::vector<double>(M));
      for (std::size_t i = 0; i < B; ++i) {
        std::vector<double> lw(M);
        for (std::size_t j = 0; j < M; ++j) lw[j] = t * (size[i][j] - block_mean[i]);
        cumulant += log_mean_exp(lw);
        const double mx = *std::max_element(lw.begin(), lw.end());
        double s1 = 0.0, s2 = 0.0, acc = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          const double w = std::exp(lw[j] - mx);
          s1 += w;
          s2 += w * w;
          acc += w;
          cum[i][j] = acc;
        }
        min_ess[q] = std::min(min_ess[q], s1 * s1 / s2 / static_cast<double>(M));
      }
      std::vector<double> tilt(static_cast<std::size_t>(opt.concatenations));
      std::vector<std::vector<std::size_t>> choice(tilt.size(), std::vector<std::size_t>(B));
      for (auto& row : choice)
        for (std::size_t i = 0; i < B; ++i) {
          const double u = pick_rng.uniform() * cum[i].back();
          row[i] = static_cast<std::size_t>(std::upper_bound(cum[i].begin(), cum[i].end(), u) - cum[i].begin());
          if (row[i] >= M) row[i] = M - 1;
        }
      parallel_for(opt.concatenations, [&](std::int64_t k) {
        const auto& row = choice[static_cast<std::size_t>(k)];
        std::vector<const WalkPath*> walks(B);
        double sum = 0.0;
        for (std::size_t i = 0; i < B; ++i) {
          walks[i] = &pool[row[i]];
          sum += size[i][row[i]];
        }
        const double c = sum - static_cast<double>(concat_range(codec, walks, bounds));
        tilt[static_cast<std::size_t>(k)] = -t * (c - rep.mean_cross);
      });
      values[q].push_back((cumulant + log_mean_exp(tilt)) * scale);
    }
  }

  for (std::size_t q = 0; q < thetas.size(); ++q) {
    MgfPoint p;
    p.theta = thetas[q];
    p.t = thetas[q] * zeta / static_cast<double>(n);
    p.scaled = mean_of(values[q]);
    p.se = sd_of(values[q]) / std::sqrt(static_cast<double>(values[q].size()));
    p.predicted = rep.sigma2 * p.theta * p.theta / 2.0;
    p.rel_gap = p.predicted > 0.0 ? std::abs(p.scaled - p.predicted) / p.predicted : std::abs(p.scaled);
    p.min_ess_fraction = min_ess[q];
    if (p.theta != 0.0 && min_ess[q] < opt.min_ess_fraction) {
      p.truncated = true;
      rep.warnings.push_back("theta = " + std::to_string(p.theta) + " dropped: block ESS fraction " +
                             std::to_string(min_ess[q]));
    } else {
      rep.max_rel_gap = std::max(rep.max_rel_gap, p.rel_gap);
    }
    rep.points.push_back(p);
  }
  for (const auto& a : rep.points)
    for (const auto& b : rep.points)
      if (a.theta > 0.0 && b.theta == -a.theta && !a.truncated && !b.truncated) {
        const double se = std::sqrt(a.se * a.se + b.se * b.se);
        if (se > 0.0) rep.max_symmetry_z = std::max(rep.max_symmetry_z, std::abs(a.scaled - b.scaled) / se);
      }
  return rep;
}

// ---------------------------------------------------------------------------
// Intersection of two independent ranges

namespace {

constexpr std::uint32_t kTimeMask = (std::uint32_t(1) << 30) - 1;
constexpr std::uint32_t kSeenShort = std::uint32_t(1) << 30;
constexpr std::uint32_t kSeenLong = std::uint32_t(1) << 31;

// |R_A[0,H] ∩ R_B[0,H]| and |R_A[0,2H] ∩ R_B[0,2H]|. Returns false when a
// coordinate leaves the codec's range.
template <class Key>
bool pair_intersections(const KeyCodec& codec, std::int64_t H, RngStream& ra, RngStream& rb,
                        SiteTable<Key, std::uint32_t>& table, std::int64_t* short_count, std::int64_t* long_count) {
  const int d = codec.dim();
  const std::int64_t bound = codec.bound();
  const std::int64_t H2 = 2 * H;
  Key delta[2 * kMaxDim];
  for (int c = 0; c < 2 * d; ++c) delta[c] = codec.step_delta<Key>(code_axis(c), code_sign(c));
  const auto two_d = static_cast<std::uint64_t>(2 * d);
  std::int64_t x[kMaxDim] = {};
  table.clear();
  Key key = codec.origin<Key>();
  table.insert(key, 0);
  for (std::int64_t k = 1; k <= H2; ++k) {
    const int c = static_cast<int>(ra.below(two_d));
    const int j = code_axis(c);
    x[j] += code_sign(c);
    if (x[j] > bound || x[j] < -bound) return false;
    key += delta[c];
    table.insert(key, static_cast<std::uint32_t>(k));
  }
  std::fill(x, x + kMaxDim, 0);
  key = codec.origin<Key>();
  std::int64_t s = 0, l = 0;
  auto visit = [&](std::int64_t time) {
    const std::size_t slot = table.find(key);
    if (slot == SiteTable<Key, std::uint32_t>::npos) return;
    auto& v = table.value(slot);
    if (!(v & kSeenLong)) {
      v |= kSeenLong;
      ++l;
    }
    if (time <= H && (v & kTimeMask) <= static_cast<std::uint32_t>(H) && !(v & kSeenShort)) {
      v |= kSeenShort;
      ++s;
    }
  };
  visit(0);
  for (std::int64_t k = 1; k <= H2; ++k) {
    const int c = static_cast<int>(rb.below(two_d));
    const int j = code_axis(c);
    x[j] += code_sign(c);
    if (x[j] > bound || x[j] < -bound) return false;
    key += delta[c];
    visit(k);
  }
  *short_count = s;
  *long_count = l;
  return true;
}

}  // namespace

IntersectionTail tail_table(std::span<const std::int64_t> sizes, int d, std::int64_t horizon,
                            const IntersectionTailOptions& opt) {
  require(!sizes.empty(), "tail_table: empty sample");
  IntersectionTail out;
  out.horizon = horizon;
  out.pairs = static_cast<std::int64_t>(sizes.size());
  const std::int64_t mx = *std::max_element(sizes.begin(), sizes.end());
  std::vector<std::int64_t> hist(static_cast<std::size_t>(mx + 2), 0);
  for (const auto s : sizes) ++hist[static_cast<std::size_t>(s)];
  std::int64_t above = out.pairs;  // sizes > t, starting from t = -1
  std::vector<double> x, y, w;
  for (std::int64_t t = 0; t <= mx; ++t) {
    above -= hist[static_cast<std::size_t>(t)];
    TailRow row;
    row.t = t;
    row.exceed = above;
    row.p = static_cast<double>(above) / static_cast<double>(out.pairs);
    row.ci = wilson_interval(above, out.pairs);
    out.rows.push_back(row);
  }
  out.fit_t_min = opt.fit_t_min;
  out.fit_t_max = opt.fit_t_min - 1;
  for (const auto& row : out.rows) {
    if (row.t < opt.fit_t_min || row.exceed < opt.min_exceed) continue;
    x.push_back(std::pow(static_cast<double>(row.t), 1.0 - 2.0 / d));
    y.push_back(std::log(row.p));
    w.push_back(1.0);
    out.fit_t_max = row.t;
  }
  if (x.size() >= 3) out.fit = weighted_linear_fit(x, y, w);
  return out;
}

IntersectionTailReport intersection_tail(int d, const IntersectionTailOptions& opt, std::uint64_t seed,
                                         std::uint64_t first_stream) {
  require(d >= 3, "intersection_tail: dimension must be at least 3");
  require(opt.horizon >= 1 && opt.pairs >= 1, "intersection_tail: horizon and pairs must be positive");
  require(2 * opt.horizon < static_cast<std::int64_t>(kTimeMask), "intersection_tail: horizon too large");
  const std::int64_t H = opt.horizon;
  std::vector<std::int64_t> short_sizes(static_cast<std::size_t>(opt.pairs)), long_sizes(short_sizes.size());
  // Compact keys cover |x_j| < 2^(floor(64/d) - 1); pairs that leave the range
  // are redone with full-width keys.
  const int bits = 64 / d;
  const std::int64_t compact = std::min<std::int64_t>(2 * H, (std::int64_t(1) << (bits - 1)) - 1);
  const KeyCodec small(d, compact);
  const KeyCodec full(d, 2 * H);
  parallel_for(opt.pairs, [&](std::int64_t p) {
    const std::uint64_t sa = first_stream + 2 * static_cast<std::uint64_t>(p);
    std::int64_t s = 0, l = 0;
    bool done = false;
    if (small.fits64()) {
      thread_local SiteTable<std::uint64_t, std::uint32_t> table(16);
      table.reserve(static_cast<std::size_t>(2 * H + 1));
      RngStream ra(seed, sa), rb(seed, sa + 1);
      done = pair_intersections<std::uint64_t>(small, H, ra, rb, table, &s, &l);
    }
    if (!done) {
      thread_local SiteTable<u128, std::uint32_t> table(16);
      table.reserve(static_cast<std::size_t>(2 * H + 1));
      RngStream ra(seed, sa), rb(seed, sa + 1);
      pair_intersections<u128>(full, H, ra, rb, table, &s, &l);
    }
    short_sizes[static_cast<std::size_t>(p)] = s;
    long_sizes[static_cast<std::size_t>(p)] = l;
  });
  IntersectionTailReport rep;
  rep.dim = d;
  rep.base = tail_table(short_sizes, d, H, opt);
  rep.doubled = tail_table(long_sizes, d, 2 * H, opt);
  rep.slope_drift = rep.base.fit.slope != 0.0
                        ? std::abs(rep.doubled.fit.slope - rep.base.fit.slope) / std::abs(rep.base.fit.slope)
                        : HUGE_VAL;
  return rep;
}

}  // namespace rangelab
