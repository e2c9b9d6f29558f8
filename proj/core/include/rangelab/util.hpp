#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace rangelab {

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t h = 0xCBF29CE484222325ULL) noexcept;
std::string hex64(std::uint64_t v);

/// Binary container: 4-byte magic, u32 header length, JSON header, payload.
void write_framed_file(const std::string& file, const char magic[4], const std::string& header_json,
                       const std::function<void(std::ostream&)>& payload);
/// Reads magic and header, leaves the stream at the payload.
std::string read_frame_header(std::istream& in, const char magic[4], const std::string& file);

}  // namespace rangelab
