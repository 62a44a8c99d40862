#include "cprnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cprnet {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string num(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

constexpr const char* kCoopColor = "#2e8b57";
constexpr const char* kDefectColor = "#c0392b";
constexpr const char* kAvgColor = "#2563eb";

struct Frame {
  double x0, y0, w, h;      // plot area in pixels
  double xmin, xmax, ymin, ymax;
  double sx(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double sy(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void polyline(std::ostringstream& out, const Frame& f,
              const std::vector<std::pair<double, double>>& pts, const char* color) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
  for (auto [x, y] : pts) out << px(f.sx(x)) << ',' << px(f.sy(y)) << ' ';
  out << "\"/>\n";
  for (auto [x, y] : pts) {
    out << "<circle cx=\"" << px(f.sx(x)) << "\" cy=\"" << px(f.sy(y))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }
}

void ssd_inset(std::ostringstream& out, const SSDReport& ssd, double x0, double y0) {
  const double w = 130.0, h = 74.0;
  out << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\"" << px(w)
      << "\" height=\"" << px(h)
      << "\" fill=\"white\" stroke=\"#888\" stroke-width=\"1\" opacity=\"0.9\"/>\n";
  const double cx = x0 + w * 0.5;
  const double maxabs =
      std::max({std::abs(ssd.c1), std::abs(ssd.c2), std::abs(ssd.c3), 1e-12});
  const double scale = (w * 0.5 - 30.0) / maxabs;
  const char* names[3] = {"C1", "C2", "C3"};
  const double values[3] = {ssd.c1, ssd.c2, ssd.c3};
  out << "<line x1=\"" << px(cx) << "\" y1=\"" << px(y0 + 4) << "\" x2=\"" << px(cx)
      << "\" y2=\"" << px(y0 + h - 16) << "\" stroke=\"#bbb\" stroke-width=\"1\"/>\n";
  for (int i = 0; i < 3; ++i) {
    const double y = y0 + 8 + 18.0 * i;
    const double len = values[i] * scale;
    const double bar_x = len >= 0 ? cx : cx + len;
    out << "<rect x=\"" << px(bar_x) << "\" y=\"" << px(y) << "\" width=\""
        << px(std::abs(len)) << "\" height=\"10\" fill=\""
        << (values[i] > 0 ? kCoopColor : kDefectColor) << "\"/>\n";
    out << "<text x=\"" << px(x0 + 4) << "\" y=\"" << px(y + 9)
        << "\" font-family=\"monospace\" font-size=\"10\">" << names[i] << "</text>\n";
    out << "<text x=\"" << px(x0 + w - 4) << "\" y=\"" << px(y + 9)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"9\">"
        << num(values[i], 3) << "</text>\n";
  }
  out << "<text x=\"" << px(x0 + 4) << "\" y=\"" << px(y0 + h - 5)
      << "\" font-family=\"monospace\" font-size=\"10\">"
      << (ssd.is_ssd ? "SSD" : "not an SSD") << "</text>\n";
}

}  // namespace

std::string schelling_svg(const MetaGameTable& table, const SSDReport* ssd,
                          const EquilibriumSet* equilibria, const std::string& title) {
  const bool total = table.param == Parameterisation::TotalCooperators;
  const int n = table.n_agents;
  const int x_hi = total ? n : n - 1;

  double ymin = 0.0, ymax = 1e-9;
  bool have_any = false;
  auto scan = [&](const std::vector<MetaCell>& cells) {
    for (const MetaCell& c : cells) {
      if (c.feasible && c.has_data()) {
        ymin = have_any ? std::min(ymin, c.mean()) : c.mean();
        ymax = have_any ? std::max(ymax, c.mean()) : c.mean();
        have_any = true;
      }
    }
  };
  scan(table.coop);
  scan(table.defect);
  const double pad = std::max((ymax - ymin) * 0.15, 1e-6);
  ymin -= pad;
  ymax += pad;

  const double width = 480, height = 360;
  Frame f{60, 42, width - 84, height - 86, -0.35, x_hi + 0.35, ymin, ymax};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"monospace\" font-size=\"13\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << px(f.x0) << "\" y1=\"" << px(f.y0 + f.h) << "\" x2=\""
      << px(f.x0 + f.w) << "\" y2=\"" << px(f.y0 + f.h)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << px(f.x0) << "\" y1=\"" << px(f.y0) << "\" x2=\"" << px(f.x0)
      << "\" y2=\"" << px(f.y0 + f.h) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int x = 0; x <= x_hi; ++x) {
    out << "<text x=\"" << px(f.sx(x)) << "\" y=\"" << px(f.y0 + f.h + 16)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" << x
        << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << px(f.x0 - 6) << "\" y=\"" << px(f.sy(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" << num(y, 2)
        << "</text>\n";
  }
  out << "<text x=\"" << px(f.x0 + f.w / 2) << "\" y=\"" << px(height - 8)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
      << (total ? "total cooperators" : "other cooperators") << "</text>\n";

  // equilibrium shading under the payoff lines
  if (equilibria != nullptr && total) {
    for (int x : equilibria->equilibria) {
      std::vector<double> ys;
      if (x >= 1 && table.coop[static_cast<size_t>(x)].has_data()) ys.push_back(table.r_c(x));
      if (x <= n - 1 && table.defect[static_cast<size_t>(x)].has_data()) ys.push_back(table.r_d(x));
      if (ys.empty()) continue;
      const double lo = *std::min_element(ys.begin(), ys.end());
      const double hi = *std::max_element(ys.begin(), ys.end());
      const double cy = (f.sy(lo) + f.sy(hi)) / 2.0;
      const double ry = std::max((f.sy(lo) - f.sy(hi)) / 2.0 + 12.0, 14.0);
      out << "<ellipse cx=\"" << px(f.sx(x)) << "\" cy=\"" << px(cy)
          << "\" rx=\"16\" ry=\"" << px(ry)
          << "\" fill=\"" << kAvgColor << "\" opacity=\"0.2\"/>\n";
    }
  }

  std::vector<std::pair<double, double>> coop_pts, defect_pts, avg_pts;
  const int x_lo_coop = total ? 1 : 0;
  for (int x = x_lo_coop; x <= x_hi; ++x) {
    if (table.coop[static_cast<size_t>(x)].has_data()) coop_pts.emplace_back(x, table.r_c(x));
  }
  const int x_hi_defect = total ? n - 1 : n - 1;
  for (int x = 0; x <= x_hi_defect; ++x) {
    if (table.defect[static_cast<size_t>(x)].has_data()) defect_pts.emplace_back(x, table.r_d(x));
  }
  if (total && table.complete()) {
    for (int x = 0; x <= n; ++x) avg_pts.emplace_back(x, table.r_avg(x));
  }
  polyline(out, f, avg_pts, kAvgColor);
  polyline(out, f, coop_pts, kCoopColor);
  polyline(out, f, defect_pts, kDefectColor);

  // legend
  const double lx = f.x0 + f.w - 150, ly = f.y0 + 6;
  const char* labels[3] = {"R_c (cooperate)", "R_d (defect)", "R_avg"};
  const char* colors[3] = {kCoopColor, kDefectColor, kAvgColor};
  const int legend_n = total ? 3 : 2;
  for (int i = 0; i < legend_n; ++i) {
    out << "<rect x=\"" << px(lx) << "\" y=\"" << px(ly + 14.0 * i) << "\" width=\"10\" "
        << "height=\"10\" fill=\"" << colors[i] << "\"/>\n";
    out << "<text x=\"" << px(lx + 14) << "\" y=\"" << px(ly + 14.0 * i + 9)
        << "\" font-family=\"monospace\" font-size=\"10\">" << labels[i] << "</text>\n";
  }

  if (ssd != nullptr) ssd_inset(out, *ssd, f.x0 + 6, f.y0 + 4);
  out << "</svg>\n";
  return out.str();
}

std::string heatmap_svg(const Heatmap& heatmap, const std::string& title) {
  const size_t n_kinds = heatmap.kinds.size();
  const size_t n_rates = heatmap.rates.size();
  const double cell_w = 64, cell_h = 30, left = 96, top = 56;
  const double width = left + cell_w * static_cast<double>(n_rates) + 16;
  const double height = top + cell_h * static_cast<double>(n_kinds) + 30;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << px(width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"monospace\" font-size=\"13\">" << title << "</text>\n";

  for (size_t ri = 0; ri < n_rates; ++ri) {
    out << "<text x=\"" << px(left + cell_w * (ri + 0.5)) << "\" y=\"" << px(top - 8)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">"
        << num(heatmap.rates[ri], 3) << "</text>\n";
  }
  for (size_t ki = 0; ki < n_kinds; ++ki) {
    out << "<text x=\"" << px(left - 6) << "\" y=\"" << px(top + cell_h * (ki + 0.5) + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
        << to_string(heatmap.kinds[ki]) << "</text>\n";
    for (size_t ri = 0; ri < n_rates; ++ri) {
      const HeatmapCell& cell = heatmap.cells[ki][ri];
      std::string fill = "#dddddd";
      std::string text = "n/a";
      if (!cell.missing) {
        const double u = std::clamp(cell.mean_restraint / 100.0, 0.0, 1.0);
        const int r = static_cast<int>(std::lround(255 + (31 - 255) * u));
        const int g = static_cast<int>(std::lround(255 + (119 - 255) * u));
        const int b = static_cast<int>(std::lround(255 + (180 - 255) * u));
        char color[8];
        std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
        fill = color;
        text = num(cell.mean_restraint, 1);
      }
      const double x = left + cell_w * static_cast<double>(ri);
      const double y = top + cell_h * static_cast<double>(ki);
      out << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(cell_w)
          << "\" height=\"" << px(cell_h) << "\" fill=\"" << fill
          << "\" stroke=\"#666\" stroke-width=\"0.5\"/>\n";
      out << "<text x=\"" << px(x + cell_w / 2) << "\" y=\"" << px(y + cell_h / 2 + 4)
          << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" << text
          << "</text>\n";
    }
  }
  out << "<text x=\"" << px(left) << "\" y=\"" << px(height - 10)
      << "\" font-family=\"monospace\" font-size=\"10\">"
      << "mean restraint % per regeneration rate</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace cprnet
