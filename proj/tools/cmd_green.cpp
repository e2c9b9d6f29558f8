#include <algorithm>
#include <filesystem>
#include <memory>

#include "commands.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/green.hpp"
#include "rangelab/util.hpp"

namespace rangelab::cli {

namespace {

struct GreenOpts {
  int d = 3;
  int T = 50;
  int axis_max = -1;
  std::string out;
  std::string load;
  std::string save;
  bool cache = false;
  double max_gib = 3.0;
};

void run(const GreenOpts& o, Manifest& m) {
  std::shared_ptr<const GreenTable> table;
  if (!o.load.empty()) {
    require(std::filesystem::exists(o.load), "missing Green cache " + o.load);
    table = std::make_shared<const GreenTable>(GreenTable::load(o.load));
    require(table->dim() == o.d && table->horizon() == o.T,
            "Green cache " + o.load + " holds (d, T) = (" + std::to_string(table->dim()) + ", " +
                std::to_string(table->horizon()) + "), requested (" + std::to_string(o.d) + ", " +
                std::to_string(o.T) + ")");
  } else if (o.cache) {
    table = GreenTable::cached(o.d, o.T);
  } else {
    GreenBudget budget;
    budget.max_bytes = static_cast<std::size_t>(o.max_gib * static_cast<double>(1ULL << 30));
    table = std::make_shared<const GreenTable>(GreenTable::build(o.d, o.T, -1, budget));
  }
  m.constants["T"] = o.T;
  m.constants["layer_radius"] = table->layer_radius();
  m.constants["checksum"] = hex64(table->checksum());

  const int kmax = o.axis_max < 0 ? o.T : std::min(o.axis_max, o.T);
  CsvWriter csv(o.out);
  csv.header({"row", "k [sites along e1]", "value [expected visits]", "expected [expected visits]"});
  for (int k = 0; k <= kmax; ++k) {
    LatticePoint z(o.d);
    z[0] = k;
    csv.row({"axis", cell(k), cell((*table)(z)), ""});
  }
  const double mass = table->total_mass();
  csv.row({"mass", "", cell(mass), cell(o.T + 1.0)});
  m.results["mass_relative_error"] = std::abs(mass - (o.T + 1.0)) / o.T;
  m.add_output(o.out);
  if (!o.save.empty()) {
    table->save(o.save);
    m.add_output(o.save);
  }
}

}  // namespace

void add_green(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<GreenOpts>();
  auto* sub = app.add_subcommand("green", "Truncated Green function G_T along the first axis");
  sub->add_option("--d", o->d, "dimension")->check(CLI::Range(1, 8));
  sub->add_option("--T", o->T, "horizon")->check(CLI::PositiveNumber);
  sub->add_option("--axis-max", o->axis_max, "largest k exported (default T)");
  sub->add_option("--out", o->out, "CSV output (stdout when omitted)");
  sub->add_option("--load", o->load, "read the table from a cache file instead of building it");
  sub->add_option("--save", o->save, "write the table to a cache file");
  sub->add_flag("--cache", o->cache, "use the RANGELAB_CACHE_DIR table cache");
  sub->add_option("--max-gib", o->max_gib, "memory budget for the DP in GiB")->check(CLI::PositiveNumber);
  reg[sub] = [o](Manifest& m) { run(*o, m); };
}

}  // namespace rangelab::cli
