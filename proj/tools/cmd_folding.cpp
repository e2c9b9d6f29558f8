#include <fstream>
#include <memory>

#include "commands.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/folding.hpp"
#include "rangelab/parallel.hpp"
#include "rangelab/walk.hpp"

namespace rangelab::cli {

namespace {

struct FoldingOpts {
  int d = 3;
  std::int64_t n = 10000;
  double zeta = -1.0;  // default n^0.85
  std::int64_t paths = 10;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  double c0 = 1.0;
  double cutoff_c0 = 0.125;
  double horizon_constant = -1.0;
  double A = 1.0;
  double delta = 0.125;
  int I = 3;
  double beta = 1.0;
  bool no_budget = false;
  bool capacity = false;
  std::string out;
  std::string json_out;
};

json level_json(const FoldingReport& rep, const EventParams& ev) {
  json levels = json::array();
  for (int i = 1; i <= rep.hat.residual; ++i) {
    json l;
    l["level"] = i;
    l["hat_size"] = rep.hat.hat_size[static_cast<std::size_t>(i)];
    if (i <= rep.schedule.defining_levels()) {
      const auto& lv = rep.schedule.level(i);
      l["r"] = lv.r;
      l["rho"] = lv.rho;
      l["L"] = lv.L;
      l["kn_size"] = rep.hat.kn_size[static_cast<std::size_t>(i)];
    }
    l["threshold"] = event_threshold(rep.schedule, ev, i);
    levels.push_back(l);
  }
  return levels;
}

void run(const FoldingOpts& o, Manifest& m) {
  require(o.d != 4, "folding: d = 4 is not supported");
  const double zeta = o.zeta > 0 ? o.zeta : std::pow(static_cast<double>(o.n), 0.85);
  ScheduleOptions so;
  so.c0_density = o.c0;
  so.c0_cutoff = o.cutoff_c0;
  so.horizon_constant = o.horizon_constant;
  const auto sched = scale_schedule(o.d, o.n, zeta, so);
  for (const auto& w : sched.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto table = GreenTable::cached(o.d, static_cast<int>(sched.T));
  const auto green = o.capacity ? GreenFunction::standard(o.d) : nullptr;

  FoldingReportOptions ro;
  ro.event = EventParams{o.A, o.delta, o.I};
  ro.budget = !o.no_budget;
  ro.beta = o.beta;
  ro.green = green.get();

  std::vector<FoldingReport> reps(static_cast<std::size_t>(o.paths));
  parallel_for(o.paths, [&](std::int64_t p) {
    RngStream rng(o.seed, o.first_stream + static_cast<std::uint64_t>(p));
    reps[static_cast<std::size_t>(p)] = folding_report(simulate_walk(o.d, o.n, rng), sched, *table, ro);
  });

  m.seed = o.seed;
  m.stream_range("walks", o.first_stream, static_cast<std::uint64_t>(o.paths));
  m.constants["zeta"] = zeta;
  m.constants["T"] = sched.T;
  m.constants["log_n"] = sched.log_n;
  m.constants["cutoff_level"] = sched.cutoff;
  m.constants["residual_level"] = sched.residual_level();

  CsvWriter csv(o.out);
  csv.header({"seed", "stream_id", "level", "hat_size [steps]", "L_i [steps]", "threshold [steps]", "exceeded"});
  std::int64_t held = 0, counterexamples = 0, budget_ok = 0;
  for (std::int64_t p = 0; p < o.paths; ++p) {
    const auto& rep = reps[static_cast<std::size_t>(p)];
    const auto stream = o.first_stream + static_cast<std::uint64_t>(p);
    for (int i = 1; i <= rep.hat.residual; ++i) {
      const double thr = event_threshold(sched, ro.event, i);
      const double hat = static_cast<double>(rep.hat.hat_size[static_cast<std::size_t>(i)]);
      const std::string L = i <= sched.defining_levels() ? cell(sched.level(i).L) : "";
      csv.row({cell(o.seed), cell(stream), cell(i), cell(rep.hat.hat_size[static_cast<std::size_t>(i)]), L,
               thr < 0 ? "" : cell(thr), thr < 0 ? "" : cell(hat > thr)});
    }
    if (rep.event.event_holds) ++held;
    if (rep.event.counterexample()) ++counterexamples;
    if (rep.budget.inequality_holds) ++budget_ok;
  }
  m.add_output(o.out);
  m.results["event_held"] = held;
  m.results["counterexamples"] = counterexamples;
  if (!o.no_budget) m.results["budget_holds"] = budget_ok;

  if (!o.json_out.empty()) {
    std::ofstream js(o.json_out, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(js), "cannot write " + o.json_out);
    for (std::int64_t p = 0; p < o.paths; ++p) {
      const auto& rep = reps[static_cast<std::size_t>(p)];
      json j;
      j["seed"] = o.seed;
      j["stream_id"] = o.first_stream + static_cast<std::uint64_t>(p);
      j["levels"] = level_json(rep, ro.event);
      j["disjoint_cover"] = rep.hat.disjoint_cover;
      j["shell_property"] = rep.hat.shell_property;
      j["dyadic_cover"] = rep.dyadic_cover_ok;
      j["corrector"] = rep.budget.corrector;
      if (!o.no_budget) {
        j["sigma"] = json::array({rep.budget.sigma[1], rep.budget.sigma[2], rep.budget.sigma[3], rep.budget.sigma[4],
                                  rep.budget.sigma[5]});
        j["budget_total"] = rep.budget.total();
        j["budget_holds"] = rep.budget.inequality_holds;
      }
      j["event_holds"] = rep.event.event_holds;
      j["counterexample"] = rep.event.counterexample();
      j["vn_cells"] = rep.vn.cells.size();
      j["vn_volume"] = rep.vn.volume();
      j["vn_local_time"] = rep.vn.local_time;
      if (rep.cap_vn >= 0) {
        j["cap_vn"] = rep.cap_vn;
        j["cap_ratio"] = rep.cap_ratio;
      }
      js << j.dump() << '\n';
    }
    js.close();
    m.add_output(o.json_out);
  }
}

}  // namespace

void add_folding(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<FoldingOpts>();
  auto* sub = app.add_subcommand("folding", "Scale partition, corrector budget and folding event per path");
  sub->add_option("--d", o->d, "dimension")->check(CLI::Range(3, 8));
  sub->add_option("--n", o->n, "steps per walk")->check(CLI::PositiveNumber);
  sub->add_option("--zeta", o->zeta, "deviation size (default n^0.85)");
  sub->add_option("--paths", o->paths, "number of walks")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "master seed");
  sub->add_option("--first-stream", o->first_stream, "stream id of the first walk");
  sub->add_option("--c0", o->c0, "density constant in rho_i r_i^(d-2) = C0 log n")->check(CLI::PositiveNumber);
  sub->add_option("--cutoff-c0", o->cutoff_c0, "d = 3 cutoff constant")->check(CLI::PositiveNumber);
  sub->add_option("--horizon-constant", o->horizon_constant, "c_T in the truncation horizon (<= 0 for default)");
  sub->add_option("--A", o->A, "event constant A")->check(CLI::PositiveNumber);
  sub->add_option("--delta", o->delta, "event constant delta")->check(CLI::PositiveNumber);
  sub->add_option("--I", o->I, "event level count")->check(CLI::PositiveNumber);
  sub->add_option("--beta", o->beta, "V_n density factor on rho_typ")->check(CLI::PositiveNumber);
  sub->add_flag("--no-budget", o->no_budget, "skip the Sigma budget (corrector only)");
  sub->add_flag("--capacity", o->capacity, "solve cap(V_n) exactly when it fits the dense envelope");
  sub->add_option("--out", o->out, "aggregate CSV (stdout when omitted)");
  sub->add_option("--json-out", o->json_out, "NDJSON per-path reports");
  reg[sub] = [o](Manifest& m) { run(*o, m); };
}

}  // namespace rangelab::cli
