#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fdp/spectral.hpp"

namespace fdp::cli {

struct CurveSet {
  std::vector<GridFunction> curves;
  std::string color;
};

/// Overlay of 1D curves (channel 0) on shared axes, drawn in order.
void write_curves_svg(const std::filesystem::path& path, const std::vector<CurveSet>& sets, const std::string& title);

}  // namespace fdp::cli
