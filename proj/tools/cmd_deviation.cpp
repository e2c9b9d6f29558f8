#include <cmath>
#include <memory>

#include "commands.hpp"
#include "rangelab/deviation.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/folding.hpp"
#include "rangelab/range_stats.hpp"
#include "rangelab/transfer.hpp"

namespace rangelab::cli {

namespace {

// Experiment k draws its walks from first_stream + calibration + k * kStride.
constexpr std::uint64_t kStride = 100000000;

struct DeviationOpts {
  int d = 5;
  std::int64_t n = 10000;
  std::vector<double> zetas;
  std::int64_t samples = 10000;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  double schedule_c0 = 1.0;
  std::int64_t calibration = 400;
  std::string out;
  // lower
  double gamma = -1.0;
  std::int64_t gamma_samples = 200;
  int replicates = 8;
  std::int64_t population = 1000;
  double box_factor = 0.25;
  std::string fit_out;
  // transfer
  std::int64_t T = -1;
  std::vector<double> thresholds;
  // intersection
  std::int64_t horizon = -1;
  std::int64_t min_exceed = 30;
  // gaussian
  std::vector<double> thetas = {-1.0, -0.5, 0.5, 1.0};
  int levels = 6;
  std::int64_t block_samples = 200;
  std::int64_t concatenations = 200;
};

void record_schedule(const DeviationOpts& o, Manifest& m) {
  m.seed = o.seed;
  m.constants["schedule_c0"] = o.schedule_c0;
  if (o.d == 4) return;
  json sched = json::array();
  for (double z : o.zetas) {
    ScheduleOptions so;
    so.c0_density = o.schedule_c0;
    const auto s = scale_schedule(o.d, o.n, z, so);
    for (const auto& w : s.warnings) std::fprintf(stderr, "warning (zeta %g): %s\n", z, w.c_str());
    sched.push_back({{"zeta", z}, {"T", s.T}, {"levels", s.levels.size()}, {"cutoff", s.cutoff}});
  }
  m.constants["schedule"] = sched;
}

Calibration calibration(const DeviationOpts& o, Manifest& m) {
  const auto cal = calibrate(o.d, o.n, o.calibration, o.seed, o.first_stream);
  m.stream_range("calibration", o.first_stream, static_cast<std::uint64_t>(o.calibration));
  m.constants["calibration_mean"] = cal.mean;
  m.constants["calibration_variance"] = cal.variance;
  m.constants["sigma2"] = cal.sigma2();
  return cal;
}

std::uint64_t experiment_stream(const DeviationOpts& o, std::size_t k) {
  return o.first_stream + static_cast<std::uint64_t>(o.calibration) + static_cast<std::uint64_t>(k) * kStride;
}

const std::vector<std::string> kEstimateHeader = {
    "d", "n [steps]", "zeta [sites]", "estimator", "hits", "samples", "p_hat [probability]",
    "ci_low [probability]", "ci_high [probability]", "one_sided", "rate_coordinate [rate units]",
    "log_p [nats]", "log_p_event [nats]", "p_given_event [probability]", "confinement_steps [steps]",
    "box_volume [sites]"};

std::vector<std::string> estimate_row(const DeviationEstimate& e) {
  const bool lb = e.estimator == EstimatorKind::kConfinedLowerBound;
  return {cell(e.dim), cell(e.steps), cell(e.zeta), estimator_name(e.estimator), cell(e.hits), cell(e.samples),
          cell(e.p_hat), cell(e.ci.low), cell(e.ci.high), cell(e.one_sided), cell(e.rate_coordinate), cell(e.log_p),
          lb ? cell(e.log_p_event) : "", lb ? cell(e.p_deviation_given_event) : "",
          lb ? cell(e.confinement_steps) : "", lb ? cell(e.box_volume) : ""};
}

void run_direct(const DeviationOpts& o, Manifest& m) {
  record_schedule(o, m);
  const auto cal = calibration(o, m);
  const auto first = experiment_stream(o, 0);
  const auto vols = sample_range_volumes(o.d, o.n, o.samples, o.seed, first);
  m.stream_range("experiment", first, static_cast<std::uint64_t>(o.samples));
  CsvWriter csv(o.out);
  csv.header(kEstimateHeader);
  for (double z : o.zetas) {
    const auto e = direct_tail(cal, z, vols);
    for (const auto& w : e.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    csv.row(estimate_row(e));
  }
  m.add_output(o.out);
}

void run_lower(const DeviationOpts& o, Manifest& m) {
  record_schedule(o, m);
  const auto cal = calibration(o, m);
  LowerBoundOptions lo;
  lo.gamma = o.gamma;
  if (o.d >= 4 && lo.gamma <= 0) {
    const std::uint64_t gs = o.first_stream + static_cast<std::uint64_t>(o.calibration) +
                             static_cast<std::uint64_t>(o.zetas.size()) * kStride;
    const auto g = estimate_gamma(o.d, o.n, o.gamma_samples, o.seed, gs);
    lo.gamma = g.by_range;
    m.stream_range("gamma", gs, static_cast<std::uint64_t>(o.gamma_samples));
    m.constants["gamma_se"] = g.se_range;
  }
  m.constants["gamma"] = lo.gamma;
  m.constants["d3_box_factor"] = o.box_factor;
  lo.d3_box_factor = o.box_factor;
  lo.replicates = o.replicates;
  lo.sampler.population = o.population;

  std::vector<DeviationEstimate> ests;
  json exps = json::array();
  CsvWriter csv(o.out);
  csv.header(kEstimateHeader);
  for (std::size_t k = 0; k < o.zetas.size(); ++k) {
    const auto first = experiment_stream(o, k);
    ests.push_back(lower_bound_experiment(cal, o.zetas[k], lo, o.seed, first));
    for (const auto& w : ests.back().warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    exps.push_back(json::array({first, first + kStride - 1}));
    csv.row(estimate_row(ests.back()));
  }
  m.streams["experiments"] = exps;
  m.add_output(o.out);

  if (ests.size() >= 4) {
    const auto fit = rate_fit(ests);
    m.results["slope"] = fit.slope;
    m.results["slope_se"] = fit.slope_se;
    m.results["r_squared"] = fit.r_squared;
    if (!o.fit_out.empty()) {
      CsvWriter f(o.fit_out);
      f.header({"d", "n [steps]", "points", "slope [nats per rate unit]", "slope_se [nats per rate unit]",
                "intercept [nats]", "r_squared"});
      f.row({cell(o.d), cell(o.n), cell(fit.points), cell(fit.slope), cell(fit.slope_se), cell(fit.intercept),
             cell(fit.r_squared)});
      m.add_output(o.fit_out);
    }
  } else if (!o.fit_out.empty()) {
    throw ContractError("deviation lower: --fit-out needs at least 4 zeta values");
  }
}

void run_transfer(const DeviationOpts& o, Manifest& m) {
  record_schedule(o, m);
  std::int64_t T = o.T;
  if (T <= 0) {
    require(!o.zetas.empty(), "deviation transfer: --T or --zeta is needed to fix the horizon");
    ScheduleOptions so;
    so.c0_density = o.schedule_c0;
    T = scale_schedule(o.d, o.n, o.zetas.front(), so).T;
  }
  require(T >= 1 && T <= o.n, "deviation transfer: T must lie in [1, n]");
  m.constants["T"] = T;
  const auto first = experiment_stream(o, 0);
  const auto rep = transfer_range_audit(o.d, o.n, T, o.samples, o.thresholds, o.seed, first);
  m.stream_range("experiment", first, static_cast<std::uint64_t>(o.samples));
  CsvWriter csv(o.out);
  csv.header({"d", "n [steps]", "T [steps]", "process", "threshold [units of (1/T) sum X_i]", "lhs [probability]", "rhs [probability]",
              "se [probability]", "ok"});
  for (const auto& r : rep.rows)
    csv.row({cell(o.d), cell(o.n), cell(T), r.process, cell(r.zeta), cell(r.lhs), cell(r.rhs), cell(r.se),
             cell(r.ok)});
  m.results["passed"] = rep.passed();
  m.add_output(o.out);
}

void run_intersection(const DeviationOpts& o, Manifest& m) {
  m.seed = o.seed;
  IntersectionTailOptions io;
  io.horizon = o.horizon > 0 ? o.horizon : o.n;
  io.pairs = o.samples;
  io.min_exceed = o.min_exceed;
  const auto rep = intersection_tail(o.d, io, o.seed, o.first_stream);
  m.stream_range("pairs", o.first_stream, 2 * static_cast<std::uint64_t>(o.samples));
  m.constants["horizon"] = io.horizon;
  CsvWriter csv(o.out);
  csv.header({"d", "horizon [steps]", "pairs", "t [sites]", "exceed", "p [probability]", "ci_low [probability]",
              "ci_high [probability]"});
  for (const auto* tab : {&rep.base, &rep.doubled})
    for (const auto& r : tab->rows)
      csv.row({cell(o.d), cell(tab->horizon), cell(tab->pairs), cell(r.t), cell(r.exceed), cell(r.p), cell(r.ci.low),
               cell(r.ci.high)});
  m.results["slope"] = rep.base.fit.slope;
  m.results["r_squared"] = rep.base.fit.r_squared;
  m.results["doubled_slope"] = rep.doubled.fit.slope;
  m.results["slope_drift"] = rep.slope_drift;
  m.results["fit_t_range"] = json::array({rep.base.fit_t_min, rep.base.fit_t_max});
  m.add_output(o.out);
}

void run_gaussian(const DeviationOpts& o, Manifest& m) {
  record_schedule(o, m);
  const auto cal = calibration(o, m);
  GaussianMgfOptions go;
  go.levels = o.levels;
  go.block_samples = o.block_samples;
  go.concatenations = o.concatenations;
  CsvWriter csv(o.out);
  csv.header({"d", "n [steps]", "zeta [sites]", "theta", "t [per site]", "scaled_log_mgf [variance units]",
              "se [variance units]", "predicted [variance units]", "rel_gap", "min_ess_fraction", "truncated"});
  for (std::size_t k = 0; k < o.zetas.size(); ++k) {
    const auto rep = gaussian_mgf_check(cal, o.zetas[k], o.thetas, go, o.seed, experiment_stream(o, k));
    for (const auto& w : rep.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const auto& p : rep.points)
      csv.row({cell(o.d), cell(o.n), cell(o.zetas[k]), cell(p.theta), cell(p.t), cell(p.scaled), cell(p.se),
               cell(p.predicted), cell(p.rel_gap), cell(p.min_ess_fraction), cell(p.truncated)});
  }
  m.add_output(o.out);
}

CLI::App* child(CLI::App& parent, const std::string& name, const std::string& desc,
                const std::shared_ptr<DeviationOpts>& o, bool zeta_required) {
  auto* sub = parent.add_subcommand(name, desc);
  sub->add_option("--d", o->d, "dimension")->check(CLI::Range(3, 8));
  sub->add_option("--n", o->n, "steps per walk")->check(CLI::PositiveNumber);
  auto* z = sub->add_option("--zeta", o->zetas, "deviation sizes (repeat or comma separate)")->delimiter(',');
  if (zeta_required) z->required();
  sub->add_option("--samples", o->samples, "walks (direct, transfer) or pairs (intersection)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "master seed");
  sub->add_option("--first-stream", o->first_stream, "first stream id");
  sub->add_option("--schedule-c0", o->schedule_c0, "density constant C0 of the scale schedule")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", o->out, "CSV output (stdout when omitted)");
  return sub;
}

}  // namespace

void add_deviation(CLI::App& app, Registry& reg) {
  auto* dev = app.add_subcommand("deviation", "Lower deviation experiments");
  dev->require_subcommand(1);

  auto od = std::make_shared<DeviationOpts>();
  auto* direct = child(*dev, "direct", "Plain Monte Carlo tail of |R_n| - E|R_n|", od, true);
  direct->add_option("--calibration", od->calibration, "calibration walks")->check(CLI::PositiveNumber);
  reg[direct] = [od](Manifest& m) { run_direct(*od, m); };

  auto ol = std::make_shared<DeviationOpts>();
  ol->samples = 1;
  auto* lower = child(*dev, "lower", "Confinement lower bound with conditioned sampling", ol, true);
  lower->add_option("--calibration", ol->calibration, "calibration walks")->check(CLI::PositiveNumber);
  lower->add_option("--gamma", ol->gamma, "escape probability gamma_d (estimated when omitted, d >= 4)");
  lower->add_option("--gamma-samples", ol->gamma_samples, "walks for the gamma estimate")->check(CLI::PositiveNumber);
  lower->add_option("--replicates", ol->replicates, "independent populations")->check(CLI::Range(2, 1000));
  lower->add_option("--population", ol->population, "walkers per population")->check(CLI::PositiveNumber);
  lower->add_option("--box-factor", ol->box_factor, "d = 3 box size factor")->check(CLI::PositiveNumber);
  lower->add_option("--fit-out", ol->fit_out, "CSV with the rate fit over the zeta grid");
  reg[lower] = [ol](Manifest& m) { run_lower(*ol, m); };

  auto ot = std::make_shared<DeviationOpts>();
  ot->samples = 1000;
  auto* transfer = child(*dev, "transfer", "Transfer inequality audit on the range process", ot, false);
  transfer->add_option("--T", ot->T, "block length (default from the scale schedule at the first zeta)");
  transfer->add_option("--threshold", ot->thresholds, "thresholds for (1/T) sum X_i (default: observed quantiles)")
      ->delimiter(',');
  reg[transfer] = [ot](Manifest& m) { run_transfer(*ot, m); };

  auto oi = std::make_shared<DeviationOpts>();
  oi->samples = 100000;
  auto* inter = child(*dev, "intersection", "Tail of |R ∩ R~| for independent walks", oi, false);
  inter->add_option("--horizon", oi->horizon, "walk length (default n)");
  inter->add_option("--min-exceed", oi->min_exceed, "fit range: t with at least this many exceedances");
  reg[inter] = [oi](Manifest& m) { run_intersection(*oi, m); };

  auto og = std::make_shared<DeviationOpts>();
  og->calibration = 2000;
  auto* gauss = child(*dev, "gaussian", "Scaled log-MGF against the Gaussian prediction", og, true);
  gauss->add_option("--calibration", og->calibration, "calibration walks")->check(CLI::PositiveNumber);
  gauss->add_option("--theta", og->thetas, "theta grid")->delimiter(',');
  gauss->add_option("--levels", og->levels, "2^levels blocks")->check(CLI::Range(1, 12));
  gauss->add_option("--block-samples", og->block_samples, "pool size per block")->check(CLI::PositiveNumber);
  gauss->add_option("--concatenations", og->concatenations, "tilted concatenations per theta")
      ->check(CLI::PositiveNumber);
  reg[gauss] = [og](Manifest& m) { run_gaussian(*og, m); };
}

}  // namespace rangelab::cli
