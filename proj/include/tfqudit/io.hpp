#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tfqudit/types.hpp"

namespace tfq::io {

// Tag files
// ---------
// CSV:    optional "# duration_s=<seconds>" comment line, a "channel,time_ps"
//         header, then one record per line.
// Binary: little-endian.
//           offset 0   8 bytes  magic "TFQTAGS1"
//           offset 8   f64      acquisition duration in seconds
//           offset 16  u64      record count
//           offset 24  records, 9 bytes each: u8 channel, u64 time_ps
// Records need not be grouped by channel; each channel is sorted on read.

inline constexpr std::string_view tag_magic = "TFQTAGS1";

enum class TagFormat { csv, binary };

using TagSet = std::map<std::uint8_t, TagStream>;

/// Reads either format, detected by the magic header. A CSV file without a
/// duration comment gets the last tag time (rounded up to 1 ps) as duration.
TagSet read_tags(const std::filesystem::path& path);

void write_tags(const std::filesystem::path& path, const std::vector<TagStream>& streams,
                TagFormat format);

// Matrix files
// ------------
// Line 1: JSON object {"d":..., "basis_pair":"TT", "duration":<s>, "format":"dense"|"sparse"}
// dense:  d lines of d comma-separated counts
// sparse: lines "i,j,count" for nonzero entries

enum class MatrixFormat { dense, sparse };

CoincidenceMatrix read_matrix(const std::filesystem::path& path);
CoincidenceMatrix parse_matrix(std::string_view text);
std::string format_matrix(const CoincidenceMatrix& m, MatrixFormat format);
void write_matrix(const std::filesystem::path& path, const CoincidenceMatrix& m,
                  MatrixFormat format);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

}  // namespace tfq::io
