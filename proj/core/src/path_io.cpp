#include "rangelab/path_io.hpp"

#include <fstream>
#include <ostream>

#include "json.hpp"
#include "rangelab/errors.hpp"
#include "rangelab/util.hpp"

namespace rangelab {

void write_path(const WalkPath& path, const std::string& file) {
  const nlohmann::json header = {{"d", path.dim()},
                                 {"n", path.steps()},
                                 {"seed", path.seed()},
                                 {"stream_id", path.stream_id()},
                                 {"format_version", kPathFormatVersion}};
  write_framed_file(file, "RLWP", header.dump(), [&](std::ostream& os) {
    os.write(reinterpret_cast<const char*>(path.packed().data()), static_cast<std::streamsize>(path.packed().size()));
  });
}

WalkPath read_path(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ContractError("cannot open path file " + file);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(read_frame_header(in, "RLWP", file));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(file + ": malformed header: " + e.what());
  }
  const int version = header.value("format_version", 0);
  if (version != kPathFormatVersion)
    throw ContractError(file + ": unsupported path format version " + std::to_string(version));
  const int d = header.at("d").get<int>();
  const auto n = header.at("n").get<std::int64_t>();
  require(n >= 0, file + ": negative step count");
  std::vector<std::uint8_t> packed(static_cast<std::size_t>((n + 1) / 2));
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!in) throw ContractError(file + ": truncated step payload");
  WalkPath w(d, header.at("seed").get<std::uint64_t>(), header.at("stream_id").get<std::uint64_t>());
  w.reserve(n);
  for (std::int64_t k = 0; k < n; ++k) {
    const std::uint8_t b = packed[static_cast<std::size_t>(k >> 1)];
    const int c = (k & 1) ? (b >> 4) : (b & 0x0F);
    require(c < 2 * d, file + ": step code out of range at step " + std::to_string(k));
    w.push_code(c);
  }
  return w;
}

void write_path_ndjson(const WalkPath& path, std::ostream& out) {
  LatticePoint p(path.dim());
  auto emit = [&](std::int64_t k) {
    out << "{\"k\":" << k << ",\"x\":[";
    for (int j = 0; j < path.dim(); ++j) out << (j ? "," : "") << p[j];
    out << "]}\n";
  };
  emit(0);
  for (std::int64_t k = 0; k < path.steps(); ++k) {
    const int c = path.code(k);
    p[code_axis(c)] += code_sign(c);
    emit(k + 1);
  }
}

}  // namespace rangelab
