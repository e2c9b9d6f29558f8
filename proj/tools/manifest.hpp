#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace rangelab::cli {

using json = nlohmann::json;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& file);

/// RFC 4180 CSV writer to a file or stdout. Doubles are printed with 17
/// significant digits so re-runs compare byte for byte.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& file);
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cells);
  bool to_stdout() const noexcept { return file_.empty(); }

 private:
  std::string file_;
  std::unique_ptr<std::ofstream> out_;
};

std::string cell(double v);
std::string cell(std::int64_t v);
inline std::string cell(int v) { return cell(static_cast<std::int64_t>(v)); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

/// Everything needed to re-run a command and check its outputs.
struct Manifest {
  std::string subcommand;
  std::vector<std::string> argv;  // arguments after the program name
  json flags = json::object();
  std::uint64_t seed = 0;
  json streams = json::object();   // name -> [first, last]
  json constants = json::object();
  json results = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add_output(const std::string& file) {
    if (!file.empty()) outputs.push_back(file);
  }
  void stream_range(const std::string& name, std::uint64_t first, std::uint64_t count) {
    streams[name] = json::array({first, count == 0 ? first : first + count - 1});
  }
  /// Writes the manifest next to the first output (<file>.manifest.json), or to
  /// `path` when given. Does nothing when every output went to stdout.
  void write(const std::string& path = "") const;
};

std::string manifest_path_for(const std::string& output);

}  // namespace rangelab::cli
