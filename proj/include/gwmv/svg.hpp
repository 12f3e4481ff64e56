#pragma once

#include "gwmv/types.hpp"

#include <array>
#include <string>

namespace gwmv {

/// Piecewise-linear approximation of viridis; t is clamped to [0, 1].
std::array<unsigned char, 3> viridis(double t);

struct ScatterStyle {
  int width = 480;
  int height = 480;
  double radius = 2.5;
  std::string title;
};

/// Self-contained SVG of the first two columns of `points`, colored by
/// `color` (min-max scaled). Empty `color` draws every point in one color.
std::string scatter_svg(const Matrix& points, const Vector& color, const ScatterStyle& style = {});

}  // namespace gwmv
