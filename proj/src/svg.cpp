#include "qclmi/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>

#include "qclmi/csv.hpp"

namespace qclmi {

namespace {

constexpr double kWidth = 860, kHeight = 540;
constexpr double kLeft = 64, kRight = 16, kTop = 20, kBottom = 48;

std::string num(double v, const char* spec = "%.2f") {
  std::array<char, 40> buf;
  const int n = std::snprintf(buf.data(), buf.size(), spec, v);
  return std::string(buf.data(), static_cast<size_t>(n));
}

struct Scale {
  double lo = 0.0, hi = 1.0, px0 = 0.0, px1 = 1.0;
  double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

void pad_range(double& lo, double& hi) {
  if (hi <= lo) {
    const double mid = lo;
    lo = mid - 0.5;
    hi = mid + 0.5;
    return;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void draw_axes(std::string& svg, const Scale& sx, const Scale& sy, const std::string& xlabel,
               const std::string& ylabel) {
  svg += "<rect x='" + num(kLeft) + "' y='" + num(kTop) + "' width='" +
         num(kWidth - kLeft - kRight) + "' height='" + num(kHeight - kTop - kBottom) +
         "' fill='none' stroke='#444' stroke-width='1'/>\n";
  const int ticks = 6;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = sx.lo + (sx.hi - sx.lo) * i / ticks;
    const double px = sx(fx);
    svg += "<line x1='" + num(px) + "' y1='" + num(kHeight - kBottom) + "' x2='" + num(px) +
           "' y2='" + num(kHeight - kBottom + 5) + "' stroke='#444'/>\n";
    svg += "<text x='" + num(px) + "' y='" + num(kHeight - kBottom + 19) +
           "' font-size='12' text-anchor='middle' fill='#222'>" + num(fx, "%.3g") + "</text>\n";
    const double fy = sy.lo + (sy.hi - sy.lo) * i / ticks;
    const double py = sy(fy);
    svg += "<line x1='" + num(kLeft - 5) + "' y1='" + num(py) + "' x2='" + num(kLeft) + "' y2='" +
           num(py) + "' stroke='#444'/>\n";
    svg += "<text x='" + num(kLeft - 8) + "' y='" + num(py + 4) +
           "' font-size='12' text-anchor='end' fill='#222'>" + num(fy, "%.3g") + "</text>\n";
  }
  svg += "<text x='" + num((kLeft + kWidth - kRight) / 2) + "' y='" + num(kHeight - 10) +
         "' font-size='13' text-anchor='middle' fill='#222'>" + xlabel + "</text>\n";
  svg += "<text x='16' y='" + num((kTop + kHeight - kBottom) / 2) +
         "' font-size='13' text-anchor='middle' fill='#222' transform='rotate(-90 16 " +
         num((kTop + kHeight - kBottom) / 2) + ")'>" + ylabel + "</text>\n";
}

struct Curve {
  std::string label;
  std::string stroke;
  std::string dash;  // empty for solid
  std::vector<std::pair<double, double>> pts;
};

void draw_curves(std::string& svg, const Scale& sx, const Scale& sy,
                 const std::vector<Curve>& curves) {
  for (const auto& c : curves) {
    svg += "<polyline fill='none' stroke='" + c.stroke + "' stroke-width='1.8'";
    if (!c.dash.empty()) svg += " stroke-dasharray='" + c.dash + "'";
    svg += " points='";
    for (const auto& [x, y] : c.pts) svg += num(sx(x)) + "," + num(sy(y)) + " ";
    svg += "'/>\n";
  }
  // legend, top-right inside the frame
  double ly = kTop + 16;
  for (const auto& c : curves) {
    const double lx = kWidth - kRight - 150;
    svg += "<line x1='" + num(lx) + "' y1='" + num(ly - 4) + "' x2='" + num(lx + 26) + "' y2='" +
           num(ly - 4) + "' stroke='" + c.stroke + "' stroke-width='1.8'";
    if (!c.dash.empty()) svg += " stroke-dasharray='" + c.dash + "'";
    svg += "/>\n";
    svg += "<text x='" + num(lx + 32) + "' y='" + num(ly) + "' font-size='12' fill='#222'>" +
           c.label + "</text>\n";
    ly += 16;
  }
}

std::string svg_open() {
  return "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth, "%.0f") + "' height='" +
         num(kHeight, "%.0f") + "' viewBox='0 0 " + num(kWidth, "%.0f") + " " +
         num(kHeight, "%.0f") + "'>\n<rect width='100%' height='100%' fill='white'/>\n";
}

}  // namespace

std::string render_entropy_svg(const EntropySeries& series) {
  if (series.empty()) throw EmptyInput("entropy series has no records");

  struct Spec {
    const char* label;
    std::optional<double> EntropyRecord::*field;
    const char* stroke;
    const char* dash;
  };
  // Quantum solid, classical dashed, overlays dotted.
  const std::array<Spec, 4> primary = {{
      {"I_q", &EntropyRecord::i_q, "#1f5fbf", ""},
      {"I_cl", &EntropyRecord::i_cl, "#c4432b", "7 5"},
      {"I_ref", &EntropyRecord::i_ref, "#5b5b5b", "2 4"},
      {"Icl_ref", &EntropyRecord::icl_ref, "#b08a3e", "2 4"},
  }};
  const std::array<Spec, 2> fallback = {{
      {"S1_q", &EntropyRecord::s1_q, "#1f5fbf", ""},
      {"S1_cl", &EntropyRecord::s1_cl, "#c4432b", "7 5"},
  }};

  std::vector<Curve> curves;
  auto collect = [&](const Spec& sp) {
    Curve c{sp.label, sp.stroke, sp.dash, {}};
    for (const auto& r : series.records)
      if ((r.*sp.field).has_value()) c.pts.emplace_back(r.t, *(r.*sp.field));
    if (c.pts.size() >= 2) curves.push_back(std::move(c));
  };
  for (const auto& sp : primary) collect(sp);
  if (curves.empty())
    for (const auto& sp : fallback) collect(sp);
  if (curves.empty()) throw EmptyInput("no plottable entropy columns");

  double xlo = curves[0].pts.front().first, xhi = xlo;
  double ylo = 0.0, yhi = 0.0;
  for (const auto& c : curves)
    for (const auto& [x, y] : c.pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  pad_range(ylo, yhi);
  if (xhi <= xlo) pad_range(xlo, xhi);

  const Scale sx{xlo, xhi, kLeft, kWidth - kRight};
  const Scale sy{ylo, yhi, kHeight - kBottom, kTop};
  std::string svg = svg_open();
  draw_axes(svg, sx, sy, "t", "mutual information");
  draw_curves(svg, sx, sy, curves);
  svg += "</svg>\n";
  return svg;
}

std::string render_section_svg(const std::vector<SectionPoint>& points) {
  if (points.empty()) throw EmptyInput("section has no points");
  static const std::array<const char*, 10> palette = {
      "#1f5fbf", "#c4432b", "#2e8540", "#7d4cb8", "#b8860b",
      "#0e7490", "#b83280", "#556b2f", "#8b3a3a", "#36454f"};

  double xlo = points[0].q2, xhi = xlo, ylo = points[0].p2, yhi = ylo;
  for (const auto& p : points) {
    xlo = std::min(xlo, p.q2);
    xhi = std::max(xhi, p.q2);
    ylo = std::min(ylo, p.p2);
    yhi = std::max(yhi, p.p2);
  }
  pad_range(xlo, xhi);
  pad_range(ylo, yhi);
  // Equal aspect: widen the shorter data range.
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double ux = (xhi - xlo) / pw, uy = (yhi - ylo) / ph;
  if (ux > uy) {
    const double mid = (ylo + yhi) / 2, half = ux * ph / 2;
    ylo = mid - half;
    yhi = mid + half;
  } else {
    const double mid = (xlo + xhi) / 2, half = uy * pw / 2;
    xlo = mid - half;
    xhi = mid + half;
  }

  const Scale sx{xlo, xhi, kLeft, kWidth - kRight};
  const Scale sy{ylo, yhi, kHeight - kBottom, kTop};
  std::string svg = svg_open();
  draw_axes(svg, sx, sy, "q2", "p2");
  for (const auto& p : points) {
    const char* color = palette[static_cast<size_t>(p.seed_index) % palette.size()];
    svg += "<circle cx='" + num(sx(p.q2)) + "' cy='" + num(sy(p.p2)) +
           "' r='1.5' fill='" + color + "'/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace qclmi
