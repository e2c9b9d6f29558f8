#pragma once

#include <iosfwd>
#include <string>

#include "rangelab/walk.hpp"

namespace rangelab {

inline constexpr int kPathFormatVersion = 1;

/// Binary path file: JSON header {d, n, seed, stream_id, format_version}
/// followed by the packed 4-bit step codes.
void write_path(const WalkPath& path, const std::string& file);
WalkPath read_path(const std::string& file);

/// One JSON object per line: {"k": k, "x": [..]} for k = 0..n.
void write_path_ndjson(const WalkPath& path, std::ostream& out);

}  // namespace rangelab
