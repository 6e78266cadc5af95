#pragma once

#include "tsd/network.hpp"
#include "tsd/pam.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tsd::io {

/// Malformed or truncated file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor file: "TSR1", order (u64), extents (u64 each), column-major f64
// payload. Mask file: "TSM1", order, extents, count M, M strictly increasing
// u64 offsets. Network file: "TSN1", order, then G_1, C_1, ..., G_N, C_N as
// embedded tensor records. All integers and reals little-endian.

void write_tensor(std::ostream& os, const DenseTensor& t);
[[nodiscard]] DenseTensor read_tensor(std::istream& is);
void write_tensor(const std::filesystem::path& path, const DenseTensor& t);
[[nodiscard]] DenseTensor read_tensor(const std::filesystem::path& path);

void write_mask(std::ostream& os, const ObservationMask& mask);
[[nodiscard]] ObservationMask read_mask(std::istream& is);
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);
[[nodiscard]] ObservationMask read_mask(const std::filesystem::path& path);

void write_network(std::ostream& os, const TSNetwork& net);
[[nodiscard]] TSNetwork read_network(std::istream& is);
void write_network(const std::filesystem::path& path, const TSNetwork& net);
[[nodiscard]] TSNetwork read_network(const std::filesystem::path& path);

/// JSON object {"R1": [...], "R2": [...], "L": [...]}.
[[nodiscard]] RankProfile parse_profile_json(const std::string& text);
[[nodiscard]] RankProfile read_profile(const std::filesystem::path& path);
[[nodiscard]] std::string profile_to_json(const RankProfile& p);

/// One line per entry: comma-separated 0-based indices, then the value.
void dump_csv(std::ostream& os, const DenseTensor& t);

}  // namespace tsd::io
