#include "opcert/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

namespace opcert {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Panel {
  double x0, y0, w, h;  // pixel box
  double lo_x, hi_x, lo_y, hi_y;

  double px(double x) const { return x0 + (x - lo_x) / (hi_x - lo_x) * w; }
  double py(double y) const { return y0 + h - (y - lo_y) / (hi_y - lo_y) * h; }
};

void axes(std::string& svg, const Panel& p, const std::string& title) {
  svg += "<rect x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0) + "\" width=\"" + fmt(p.w) +
         "\" height=\"" + fmt(p.h) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt(p.x0 + 4) + "\" y=\"" + fmt(p.y0 - 6) +
         "\" font-family=\"monospace\" font-size=\"12\">" + title + "</text>\n";
}

}  // namespace

std::string render_plots(const Json& report) {
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" "
      "height=\"600\">\n<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";

  // eigenvalue ladder
  {
    Panel p{60, 40, 660, 140, 0, 1, -1, 1};
    std::vector<double> eigs;
    if (report.contains("spectrum") && report["spectrum"].contains("eigenvalues"))
      for (const auto& v : report["spectrum"]["eigenvalues"]) eigs.push_back(v.get<double>());
    axes(svg, p, "eigenvalue ladder");
    if (eigs.empty()) {
      std::cerr << "plots: no spectrum section, ladder left empty\n";
    } else {
      p.lo_x = 0;
      p.hi_x = static_cast<double>(eigs.size());
      auto [mn, mx] = std::minmax_element(eigs.begin(), eigs.end());
      p.lo_y = std::min(*mn, 0.0) - 0.5;
      p.hi_y = *mx + 0.5;
      for (size_t i = 0; i < eigs.size(); ++i) {
        const double x = p.px(static_cast<double>(i) + 0.5);
        const double y = p.py(eigs[i]);
        svg += "<line x1=\"" + fmt(x - 3) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(x + 3) +
               "\" y2=\"" + fmt(y) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
      }
    }
  }

  // singular-value decay (log10)
  {
    Panel p{60, 230, 660, 140, 0, 1, -16, 1};
    std::vector<double> sv;
    if (report.contains("singular_values"))
      for (const auto& v : report["singular_values"]) sv.push_back(v.get<double>());
    axes(svg, p, "singular-value decay (log10)");
    if (sv.empty()) {
      std::cerr << "plots: no singular_values section, decay panel left empty\n";
    } else {
      p.hi_x = static_cast<double>(sv.size());
      std::string pts;
      for (size_t i = 0; i < sv.size(); ++i) {
        const double ly = std::log10(std::max(sv[i], 1e-16));
        pts += fmt(p.px(static_cast<double>(i) + 0.5)) + "," + fmt(p.py(ly)) + " ";
      }
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  }

  // counting-function staircase
  {
    Panel p{60, 420, 660, 140, 0, 1, 0, 1};
    std::vector<double> lam;
    std::vector<double> cnt;
    if (report.contains("counting")) {
      for (const auto& v : report["counting"]["lambdas"]) lam.push_back(v.get<double>());
      for (const auto& v : report["counting"]["counts"]) cnt.push_back(v.get<double>());
    }
    axes(svg, p, "counting function");
    if (lam.empty()) {
      std::cerr << "plots: no counting section, staircase left empty\n";
    } else {
      p.hi_x = lam.back() * 1.05;
      p.hi_y = std::max(1.0, cnt.back() * 1.05);
      std::string pts = fmt(p.px(0)) + "," + fmt(p.py(0)) + " ";
      double prev = 0.0;
      for (size_t i = 0; i < lam.size(); ++i) {
        pts += fmt(p.px(lam[i])) + "," + fmt(p.py(prev)) + " ";
        pts += fmt(p.px(lam[i])) + "," + fmt(p.py(cnt[i])) + " ";
        prev = cnt[i];
      }
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  }

  svg += "</svg>\n";
  return svg;
}

void emit_plot(const Json& report, const std::string& path) {
  write_text_atomic(path, render_plots(report));
}

}  // namespace opcert
