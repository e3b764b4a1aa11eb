#pragma once

#include <filesystem>
#include <iosfwd>

#include "mobelcov/nn/policy_network.hpp"

namespace mobelcov::nn {

// Binary layout (little-endian host order): magic "MOBCKPT1", u32 version,
// architecture tag, u64 seed, i32 groups, i32 channels, u32 parameter count,
// then per parameter: name, i64 rows, i64 cols, rows*cols raw doubles
// (column-major). Strings are a u32 length followed by bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const PolicyNetwork& net);
PolicyNetwork read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork& net);
PolicyNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace mobelcov::nn
