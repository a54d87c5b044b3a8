#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sthrn/skeleton.hpp"

namespace sthrn {

struct PlotOptions {
  double figure_width = 120.0;
  double figure_height = 200.0;
  double margin = 10.0;
  double stroke_width = 2.0;
};

/// Stroke color of chain `c`: spine black, then right/left arm yellow/green,
/// right/left leg cyan/violet, in the order the chains of each role appear.
std::string chain_color(const SkeletonTopology& topo, std::size_t c);

/// One stick figure per frame, side by side, front view (x right, y up).
/// All figures share one scale so relative sizes are preserved.
std::string render_svg(const std::vector<Frame>& joints, const std::vector<std::size_t>& labels,
                       const SkeletonTopology& topo, const PlotOptions& options = {});

}  // namespace sthrn
