#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "rangelab/errors.hpp"

namespace rangelab::cli {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  require(!quoted, "unterminated quoted CSV field");
  out.push_back(cur);
  return out;
}

namespace {

struct ReportOpts {
  std::vector<std::string> manifests;
  std::string out;
};

// Reads RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> read_csv(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + file);
  std::vector<std::vector<std::string>> rows;
  std::string line, record;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    record += line;
    if (std::count(record.begin(), record.end(), '"') % 2 == 1) {
      record += "\r\n";
      continue;
    }
    rows.push_back(split_csv_line(record));
    record.clear();
  }
  require(record.empty(), file + ": unterminated quoted field");
  return rows;
}

std::string flag_or(const json& flags, const std::string& key, const std::string& fallback) {
  if (!flags.contains(key)) return fallback;
  const auto& v = flags.at(key);
  if (v.is_array()) return v.empty() ? fallback : v.front().get<std::string>();
  return v.is_string() ? v.get<std::string>() : v.dump();
}

struct Table {
  std::string source;
  std::string d;
  std::string n;
  std::vector<std::vector<std::string>> rows;
};

void run(const ReportOpts& o, Manifest& m) {
  require(!o.manifests.empty(), "report: no manifests given");
  std::string subcommand;
  std::vector<Table> tables;
  // validate everything before writing anything
  for (const auto& path : o.manifests) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot read manifest " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ContractError("manifest " + path + ": " + e.what());
    }
    require(j.contains("subcommand") && j.contains("outputs") && j.contains("flags"),
            "manifest " + path + " lacks subcommand, flags or outputs");
    const auto sub = j.at("subcommand").get<std::string>();
    require(sub != "report", "report: manifest " + path + " is itself a report");
    if (subcommand.empty()) {
      subcommand = sub;
    } else {
      require(sub == subcommand, "report: cannot join '" + sub + "' (" + path + ") with '" + subcommand +
                                     "'; all manifests must come from one subcommand");
    }
    // the primary table is the --out file
    const auto& flags = j.at("flags");
    const std::string table = flag_or(flags, "--out", "");
    require(!table.empty() && j.at("outputs").contains(table),
            "report: manifest " + path + " has no CSV output to join");
    const auto base = std::filesystem::path(path).parent_path();
    std::string file = table;
    if (!std::filesystem::exists(file) && !base.empty()) file = (base / std::filesystem::path(table).filename()).string();
    require(sha256_file(file) == j.at("outputs").at(table).get<std::string>(),
            "report: " + file + " does not match the digest in " + path);

    Table t{path, flag_or(flags, "--d", ""), flag_or(flags, "--n", ""), read_csv(file)};
    require(!t.rows.empty(), "report: " + file + " is empty");
    if (!tables.empty() && t.rows.front() != tables.front().rows.front())
      throw ContractError("report: " + file + " has a different column layout than " + tables.front().source);
    tables.push_back(std::move(t));
  }

  const auto& header = tables.front().rows.front();
  const bool has_d = std::find(header.begin(), header.end(), "d") != header.end();
  const bool has_n = std::find(header.begin(), header.end(), "n [steps]") != header.end();
  CsvWriter csv(o.out);
  std::vector<std::string> h = {"source", "subcommand"};
  if (!has_d) h.push_back("d");
  if (!has_n) h.push_back("n [steps]");
  h.insert(h.end(), header.begin(), header.end());
  csv.header(h);
  for (const auto& t : tables) {
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
      std::vector<std::string> row = {t.source, subcommand};
      if (!has_d) row.push_back(t.d);
      if (!has_n) row.push_back(t.n);
      row.insert(row.end(), t.rows[r].begin(), t.rows[r].end());
      csv.row(row);
    }
  }
  m.add_output(o.out);
  m.results["joined"] = tables.size();
  m.results["subcommand"] = subcommand;
}

}  // namespace

void add_report(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<ReportOpts>();
  auto* sub = app.add_subcommand("report", "Join the CSV tables of several manifests into one long table");
  sub->add_option("manifests", o->manifests, "manifest files")->required();
  sub->add_option("--out", o->out, "joined CSV (stdout when omitted)");
  reg[sub] = [o](Manifest& m) { run(*o, m); };
}

}  // namespace rangelab::cli
