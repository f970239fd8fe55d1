#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fdp/spectral.hpp"

namespace fdp {

/**
 * Binary layout (little-endian):
 *   "FDPG" | u32 version=1 | u32 ndim | u32 size[ndim] | u32 channels
 *   | f64 (lo, hi)[ndim] | f64 values[prod(size) * channels]
 */
void write_grid(std::ostream& os, const GridFunction& f);
GridFunction read_grid(std::istream& is);
void save_grid(const std::filesystem::path& path, const GridFunction& f);
GridFunction load_grid(const std::filesystem::path& path);

/// Several grid functions back to back in one file (dataset shards, sample dumps).
void save_grids(const std::filesystem::path& path, const std::vector<GridFunction>& fs);
std::vector<GridFunction> load_grids(const std::filesystem::path& path);

/// 1D single-channel CSV: one function per row, comma-separated grid values.
void save_csv(const std::filesystem::path& path, const std::vector<GridFunction>& fs);
std::vector<GridFunction> load_csv(const std::filesystem::path& path, double lo = -1.0, double hi = 1.0);

}  // namespace fdp
