#include "gwmv/svg.hpp"

#include "gwmv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace gwmv {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::array<unsigned char, 3> viridis(double t) {
  static constexpr double stops[][3] = {
      {68, 1, 84}, {72, 40, 120}, {62, 74, 137}, {49, 104, 142}, {38, 130, 142},
      {31, 158, 137}, {53, 183, 121}, {109, 205, 89}, {180, 222, 44}, {253, 231, 37},
  };
  constexpr int last = 9;
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0) * last;
  const int k = std::min(static_cast<int>(t), last - 1);
  const double f = t - k;
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<unsigned char>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  return rgb;
}

std::string scatter_svg(const Matrix& points, const Vector& color, const ScatterStyle& style) {
  if (points.cols() < 1) throw InvalidInput("scatter plot needs at least one coordinate column");
  if (color.size() != 0 && color.size() != points.rows())
    throw InvalidInput("scatter plot color vector must match the point count");
  const Index n = points.rows();
  const double pad = 24.0;
  const double top = style.title.empty() ? pad : pad + 16.0;
  const double w = style.width - 2 * pad;
  const double h = style.height - top - pad;

  auto range = [&](Index c) {
    if (n == 0 || c >= points.cols()) return std::pair<double, double>{-1.0, 1.0};
    double lo = points.col(c).minCoeff(), hi = points.col(c).maxCoeff();
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
    return std::pair<double, double>{lo, hi};
  };
  // Equal scale on both axes so the plot does not distort distances.
  auto [x0, x1] = range(0);
  auto [y0, y1] = range(1);
  const double span = std::max((x1 - x0) / w, (y1 - y0) / h);
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);

  double c0 = 0.0, c1 = 1.0;
  if (color.size() > 0) {
    c0 = color.minCoeff();
    c1 = color.maxCoeff();
    if (c1 - c0 < 1e-300) c1 = c0 + 1.0;
  }

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      style.width, style.height);
  if (!style.title.empty())
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
                       style.width / 2, pad, xml_escape(style.title));
  for (Index i = 0; i < n; ++i) {
    const double px = pad + 0.5 * w + (points(i, 0) - cx) / span;
    const double py = top + 0.5 * h - (points.cols() > 1 ? (points(i, 1) - cy) / span : 0.0);
    const auto rgb = viridis(color.size() > 0 ? (color(i) - c0) / (c1 - c0) : 0.5);
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n", px, py,
                       style.radius, rgb[0], rgb[1], rgb[2]);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace gwmv
