#include "sthrn/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sthrn/errors.hpp"

namespace sthrn {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

}  // namespace

std::string chain_color(const SkeletonTopology& topo, std::size_t c) {
  std::size_t arms = 0, legs = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (topo.chains[i].role == ChainRole::arm) ++arms;
    if (topo.chains[i].role == ChainRole::leg) ++legs;
  }
  switch (topo.chains[c].role) {
    case ChainRole::spine:
      return "#000000";
    case ChainRole::arm:
      return arms == 0 ? "#e6c700" : arms == 1 ? "#2ca02c" : "#808080";
    case ChainRole::leg:
      return legs == 0 ? "#17becf" : legs == 1 ? "#8a2be2" : "#808080";
  }
  return "#808080";
}

std::string render_svg(const std::vector<Frame>& joints, const std::vector<std::size_t>& labels,
                       const SkeletonTopology& topo, const PlotOptions& o) {
  if (joints.empty()) throw EmptyInput("nothing to plot");
  if (labels.size() != joints.size()) throw DimensionMismatch("one label per plotted frame is required");
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  for (const auto& frame : joints) {
    if (frame.size() != topo.joints.size()) {
      throw DimensionMismatch("frame has " + std::to_string(frame.size()) + " joints, topology has " +
                              std::to_string(topo.joints.size()));
    }
    for (const auto& p : frame) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
  }
  const double inner_w = o.figure_width - 2.0 * o.margin;
  const double inner_h = o.figure_height - 2.0 * o.margin;
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double scale = std::min(inner_w / span_x, inner_h / span_y);
  const double off_x = o.margin + 0.5 * (inner_w - scale * span_x);
  const double off_y = o.margin + 0.5 * (inner_h - scale * span_y);

  const double width = o.figure_width * static_cast<double>(joints.size());
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(o.figure_height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(o.figure_height) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(o.figure_height)
      << "\" fill=\"#ffffff\"/>\n";
  for (std::size_t f = 0; f < joints.size(); ++f) {
    const double base = o.figure_width * static_cast<double>(f);
    const auto px = [&](const Vec3& p) { return base + off_x + scale * (p.x() - min_x); };
    const auto py = [&](const Vec3& p) { return off_y + scale * (max_y - p.y()); };
    out << "<g class=\"figure\" data-frame=\"" << labels[f] << "\">\n";
    for (std::size_t c = 0; c < topo.chains.size(); ++c) {
      const auto& chain = topo.chains[c];
      if (chain.joints.size() < 2) continue;
      out << "<polyline fill=\"none\" stroke=\"" << chain_color(topo, c) << "\" stroke-width=\"" << num(o.stroke_width)
          << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\" points=\"";
      for (std::size_t m = 0; m < chain.joints.size(); ++m) {
        const Vec3& p = joints[f][chain.joints[m]];
        if (m > 0) out << ' ';
        out << num(px(p)) << ',' << num(py(p));
      }
      out << "\"/>\n";
    }
    out << "<text x=\"" << num(base + o.figure_width / 2.0) << "\" y=\"" << num(o.figure_height - 2.0)
        << "\" font-size=\"8\" text-anchor=\"middle\">" << labels[f] << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace sthrn
