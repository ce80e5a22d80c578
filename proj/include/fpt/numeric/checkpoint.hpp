#pragma once

#include <filesystem>
#include <string>

#include "fpt/numeric/param_store.hpp"

namespace fpt::checkpoint {

inline constexpr char kMagic[] = "FPTCKPT1";

// Layout (all integers unsigned 64-bit little-endian):
//   "FPTCKPT1" | tensor count | per tensor, in name order:
//   name byte length | UTF-8 name | rank | extents... | float64 LE row-major data
std::string serialize(const ParamStore& params);
ParamStore deserialize(const std::string& bytes);

void save(const std::filesystem::path& path, const ParamStore& params);
ParamStore load(const std::filesystem::path& path);

}  // namespace fpt::checkpoint
