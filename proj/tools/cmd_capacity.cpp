#include <fstream>
#include <memory>

#include "commands.hpp"
#include "rangelab/capacity.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/rng.hpp"

namespace rangelab::cli {

namespace {

struct CapacityOpts {
  int d = 3;
  std::string set = "cube";
  std::int64_t r = 4;
  std::string file;
  int sets = 10;
  int size = 20;
  std::int64_t spread = 4;
  std::int64_t trials = 2000;
  double radius = -1.0;
  std::uint64_t seed = 1;
  std::size_t max_sites = 5000;
  std::string out;
};

// One set per line: [[x1, ..., xd], ...] or {"sites": [[...], ...]}.
std::vector<SiteSet> read_sets(const std::string& file, int d) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "cannot read set file " + file);
  std::vector<SiteSet> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ContractError(file + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.is_object()) j = j.at("sites");
    require(j.is_array(), file + ":" + std::to_string(lineno) + ": expected an array of sites");
    std::vector<LatticePoint> pts;
    for (const auto& p : j) {
      require(p.is_array() && static_cast<int>(p.size()) == d,
              file + ":" + std::to_string(lineno) + ": site with wrong dimension");
      LatticePoint x(d);
      for (int k = 0; k < d; ++k) x[k] = p[static_cast<std::size_t>(k)].get<std::int64_t>();
      pts.push_back(x);
    }
    out.emplace_back(d, pts);
  }
  return out;
}

void run(const CapacityOpts& o, Manifest& m) {
  std::vector<SiteSet> sets;
  if (o.set == "cube") {
    sets.push_back(SiteSet::cube(LatticePoint(o.d), o.r));
  } else if (o.set == "random") {
    RngStream rng(o.seed, 0);
    for (int s = 0; s < o.sets; ++s) {
      std::vector<LatticePoint> pts;
      const auto want = static_cast<std::size_t>(1 + rng.below(static_cast<std::uint64_t>(o.size)));
      while (pts.size() < want) {
        LatticePoint p(o.d);
        for (int j = 0; j < o.d; ++j)
          p[j] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * o.spread + 1))) - o.spread;
        pts.push_back(p);
        pts = SiteSet(o.d, pts).sites();
      }
      sets.emplace_back(o.d, pts);
    }
  } else {
    require(!o.file.empty(), "capacity: --set file needs --file");
    sets = read_sets(o.file, o.d);
  }
  const auto green = GreenFunction::standard(o.d);
  m.seed = o.seed;
  m.constants["green_crossover_radius"] = green->crossover_radius();
  m.constants["green_asymptote_constant"] = green->asymptote().constant;

  CsvWriter csv(o.out);
  csv.header({"set_id", "size [sites]", "cap_exact [capacity]", "cap_mc [capacity]", "se [capacity]",
              "ratio_to_volume_power [cap/|set|^(1-2/d)]"});
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    CapacityOptions eo;
    eo.max_sites = o.max_sites;
    const auto ex = capacity_exact(s, *green, eo);
    if (!ex.warning.empty()) std::fprintf(stderr, "set %zu: %s\n", i, ex.warning.c_str());
    std::string mc_cap, mc_se;
    if (o.trials > 0) {
      CapacityMcOptions mo;
      mo.trials_per_site = o.trials;
      mo.escape_radius = o.radius;
      mo.seed = o.seed;
      mo.first_stream = 1 + static_cast<std::uint64_t>(i) * s.size() * static_cast<std::uint64_t>(o.trials);
      const auto mc = capacity_mc(s, *green, mo);
      mc_cap = cell(mc.cap);
      mc_se = cell(mc.error_bar);
    }
    csv.row({cell(static_cast<std::int64_t>(i)), cell(static_cast<std::int64_t>(s.size())), cell(ex.cap), mc_cap, mc_se,
             cell(capacity_volume_ratio(s, ex.cap))});
  }
  m.add_output(o.out);
}

}  // namespace

void add_capacity(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<CapacityOpts>();
  auto* sub = app.add_subcommand("capacity", "Capacity of finite sets, exact and by escape simulation");
  sub->add_option("--d", o->d, "dimension")->check(CLI::Range(3, 8));
  sub->add_option("--set", o->set, "cube, random or file")->check(CLI::IsMember({"cube", "random", "file"}));
  sub->add_option("--r", o->r, "cube side")->check(CLI::PositiveNumber);
  sub->add_option("--file", o->file, "NDJSON set file, one set per line");
  sub->add_option("--sets", o->sets, "random sets")->check(CLI::PositiveNumber);
  sub->add_option("--size", o->size, "largest random set")->check(CLI::PositiveNumber);
  sub->add_option("--spread", o->spread, "random sites lie in [-spread, spread]^d")->check(CLI::NonNegativeNumber);
  sub->add_option("--trials", o->trials, "escape walks per site (0 skips Monte Carlo)")->check(CLI::NonNegativeNumber);
  sub->add_option("--radius", o->radius, "escape radius (default max(4 diam, 64))");
  sub->add_option("--seed", o->seed, "master seed");
  sub->add_option("--max-sites", o->max_sites, "dense solve envelope");
  sub->add_option("--out", o->out, "CSV output (stdout when omitted)");
  reg[sub] = [o](Manifest& m) { run(*o, m); };
}

}  // namespace rangelab::cli
