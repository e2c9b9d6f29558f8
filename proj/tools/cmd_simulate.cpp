#include <filesystem>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "rangelab/path_io.hpp"
#include "rangelab/range_stats.hpp"
#include "rangelab/walk.hpp"

namespace rangelab::cli {

namespace {

struct SimulateOpts {
  int d = 3;
  std::int64_t n = 1000;
  std::int64_t samples = 1;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  std::string out;
  std::string summary;
  std::string path_dir;
  std::string ndjson;
};

void run(const SimulateOpts& o, Manifest& m) {
  const auto vols = sample_range_volumes(o.d, o.n, o.samples, o.seed, o.first_stream);
  m.seed = o.seed;
  m.stream_range("walks", o.first_stream, static_cast<std::uint64_t>(o.samples));

  CsvWriter csv(o.out);
  csv.header({"seed", "stream_id", "d", "n [steps]", "range [sites]"});
  for (std::int64_t s = 0; s < o.samples; ++s)
    csv.row({cell(o.seed), cell(o.first_stream + static_cast<std::uint64_t>(s)), cell(o.d), cell(o.n),
             cell(vols[static_cast<std::size_t>(s)])});
  m.add_output(o.out);

  if (o.samples >= 2) {
    const auto rep = moment_report(o.d, o.n, vols);
    m.results["mean_range"] = rep.moments.mean;
    m.results["var_range"] = rep.moments.variance;
    if (!o.summary.empty()) {
      CsvWriter sum(o.summary);
      sum.header({"d", "n [steps]", "samples", "mean [sites]", "var [sites^2]", "skew", "se_mean [sites]",
                  "se_var [sites^2]"});
      sum.row({cell(o.d), cell(o.n), cell(o.samples), cell(rep.moments.mean), cell(rep.moments.variance),
               cell(rep.moments.skewness), cell(rep.moments.se_mean), cell(rep.moments.se_variance)});
      m.add_output(o.summary);
    }
  }

  if (!o.path_dir.empty() || !o.ndjson.empty()) {
    if (!o.path_dir.empty()) std::filesystem::create_directories(o.path_dir);
    for (std::int64_t s = 0; s < o.samples; ++s) {
      const auto stream = o.first_stream + static_cast<std::uint64_t>(s);
      RngStream rng(o.seed, stream);
      const WalkPath path = simulate_walk(o.d, o.n, rng);
      if (!o.path_dir.empty()) {
        const auto file = (std::filesystem::path(o.path_dir) / ("walk_" + std::to_string(stream) + ".rlw")).string();
        write_path(path, file);
        m.add_output(file);
      }
      if (s == 0 && !o.ndjson.empty()) {
        std::ofstream out(o.ndjson, std::ios::trunc);
        require(static_cast<bool>(out), "cannot write " + o.ndjson);
        write_path_ndjson(path, out);
        out.close();
        m.add_output(o.ndjson);
      }
    }
  }
}

}  // namespace

void add_simulate(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<SimulateOpts>();
  auto* sub = app.add_subcommand("simulate", "Simulate walks and record |R_n|");
  sub->add_option("--d", o->d, "dimension")->check(CLI::Range(3, 8));
  sub->add_option("--n", o->n, "steps per walk")->check(CLI::NonNegativeNumber);
  sub->add_option("--samples", o->samples, "number of walks")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "master seed");
  sub->add_option("--first-stream", o->first_stream, "stream id of the first walk");
  sub->add_option("--out", o->out, "per-walk CSV (stdout when omitted)");
  sub->add_option("--summary", o->summary, "moment summary CSV");
  sub->add_option("--path-dir", o->path_dir, "directory for binary path files");
  sub->add_option("--ndjson", o->ndjson, "NDJSON position dump of the first walk");
  reg[sub] = [o](Manifest& m) { run(*o, m); };
}

}  // namespace rangelab::cli
