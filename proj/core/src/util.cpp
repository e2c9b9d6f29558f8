#include "rangelab/util.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rangelab/errors.hpp"

namespace rangelab {

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t h) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

void write_framed_file(const std::string& file, const char magic[4], const std::string& header_json,
                       const std::function<void(std::ostream&)>& payload) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot open " + file + " for writing");
  out.write(magic, 4);
  const auto len = static_cast<std::uint32_t>(header_json.size());
  unsigned char lenbuf[4] = {static_cast<unsigned char>(len), static_cast<unsigned char>(len >> 8),
                             static_cast<unsigned char>(len >> 16), static_cast<unsigned char>(len >> 24)};
  out.write(reinterpret_cast<const char*>(lenbuf), 4);
  out.write(header_json.data(), static_cast<std::streamsize>(header_json.size()));
  payload(out);
  if (!out) throw ResourceError("write to " + file + " failed");
}

std::string read_frame_header(std::istream& in, const char magic[4], const std::string& file) {
  char m[4];
  unsigned char lenbuf[4];
  in.read(m, 4);
  if (!in || std::memcmp(m, magic, 4) != 0) throw ContractError(file + ": bad magic, not a " + std::string(magic, 4) + " file");
  in.read(reinterpret_cast<char*>(lenbuf), 4);
  const std::uint32_t len = lenbuf[0] | (lenbuf[1] << 8) | (lenbuf[2] << 16) | (std::uint32_t(lenbuf[3]) << 24);
  if (!in || len > (1u << 20)) throw ContractError(file + ": corrupt header length");
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw ContractError(file + ": truncated header");
  return header;
}

}  // namespace rangelab
