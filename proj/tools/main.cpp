#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "commands.hpp"
#include "rangelab/errors.hpp"

namespace {

using namespace rangelab::cli;

const CLI::App* selected_leaf(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return selected_leaf(*sub);
  return &app;
}

std::string command_path(const CLI::App* leaf) {
  std::string path;
  for (const CLI::App* a = leaf; a != nullptr && a->get_parent() != nullptr; a = a->get_parent())
    path = path.empty() ? a->get_name() : a->get_name() + " " + path;
  return path;
}

// Every option of the leaf, given or defaulted.
json collect_flags(const CLI::App& leaf) {
  json flags = json::object();
  for (const auto* opt : leaf.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    const std::string key = opt->get_lnames().empty() ? opt->get_name() : "--" + opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1 || r.size() > 1) {
        flags[key] = r;
      } else {
        flags[key] = r.front();
      }
    } else {
      flags[key] = opt->get_default_str();
    }
  }
  return flags;
}

int replay(const std::string& path);

struct Invocation {
  int code = 0;
  Manifest manifest;
};

// Parses and runs one command line (arguments after the program name).
Invocation invoke(const std::vector<std::string>& args, bool write_manifest) {
  CLI::App app{"rangelab: range of simple random walk experiments"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(0, 1);
  int threads = 0;
  std::string replay_path, manifest_path;
  app.add_option("--threads", threads, "worker threads (sets RANGELAB_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_option("--replay", replay_path, "re-run a manifest and compare output digests");
  app.add_option("--manifest", manifest_path, "manifest path (default <first output>.manifest.json)");
  Registry reg;
  add_simulate(app, reg);
  add_green(app, reg);
  add_capacity(app, reg);
  add_folding(app, reg);
  add_deviation(app, reg);
  add_report(app, reg);

  Invocation inv;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    inv.code = app.exit(e);
    return inv;
  } catch (const CLI::CallForAllHelp& e) {
    inv.code = app.exit(e);
    return inv;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    inv.code = 2;
    return inv;
  }
  if (threads > 0) setenv("RANGELAB_THREADS", std::to_string(threads).c_str(), 1);
  if (!replay_path.empty()) {
    inv.code = replay(replay_path);
    return inv;
  }
  if (app.get_subcommands().empty()) {
    std::fprintf(stderr, "%s", app.help().c_str());
    inv.code = 2;
    return inv;
  }

  const CLI::App* leaf = selected_leaf(app);
  const auto it = reg.find(leaf);
  if (it == reg.end()) {
    std::fprintf(stderr, "%s: choose a subcommand\n", command_path(leaf).c_str());
    inv.code = 2;
    return inv;
  }
  auto& m = inv.manifest;
  m.subcommand = command_path(leaf);
  m.argv = args;
  m.flags = collect_flags(*leaf);
  try {
    it->second(m);
    if (write_manifest) m.write(manifest_path);
  } catch (const rangelab::ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    inv.code = 2;
  } catch (const rangelab::ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    inv.code = 3;
  }
  return inv;
}

// Re-runs a manifest's argv and compares every output digest.
int replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot read manifest %s\n", path.c_str());
    return 2;
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: manifest %s: %s\n", path.c_str(), e.what());
    return 2;
  }
  if (!j.contains("argv") || !j.contains("outputs")) {
    std::fprintf(stderr, "error: manifest %s lacks argv or outputs\n", path.c_str());
    return 2;
  }
  const auto args = j.at("argv").get<std::vector<std::string>>();
  const auto inv = invoke(args, false);
  if (inv.code != 0) return inv.code;
  int mismatches = 0;
  for (const auto& [file, digest] : j.at("outputs").items()) {
    const std::string now = sha256_file(file);
    const bool same = now == digest.get<std::string>();
    std::printf("%s %s\n", same ? "same" : "DIFFERENT", file.c_str());
    if (!same) ++mismatches;
  }
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return invoke(args, true).code;
  } catch (const rangelab::ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const rangelab::ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  }
}
