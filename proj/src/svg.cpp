#include "sbmvi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sbmvi::svg {

namespace {

constexpr int kWidth = 480;
constexpr int kHeight = 320;
constexpr int kLeft = 60, kRight = 20, kTop = 30, kBottom = 45;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

void header(std::ostringstream& os, int w, int h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

void labels(std::ostringstream& os, const std::string& title, const std::string& xl,
            const std::string& yl) {
  os << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << kHeight / 2 << ")\">" << escape(yl) << "</text>\n";
}

// hsv-ish ramp from dark blue (0) to yellow (1).
std::string ramp(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68 + v * (253 - 68)));
  const int g = static_cast<int>(std::lround(1 + v * (231 - 1)));
  const int b = static_cast<int>(std::lround(84 + v * (37 - 84)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_lines(const LineChart& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : chart.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      const double sd = s.sd.empty() || !std::isfinite(s.sd[i]) ? 0.0 : s.sd[i];
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - sd);
      y1 = std::max(y1, s.mean[i] + sd);
    }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  header(os, kWidth, kHeight);
  labels(os, chart.title, chart.x_label, chart.y_label);
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 14 << "\" text-anchor=\"middle\">"
       << fmt(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 4 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
       << fmt(yv) << "</text>\n";
  }
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kPalette[k % 8];
    if (!s.sd.empty()) {
      std::ostringstream upper, lower;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.mean[i])) continue;
        const double sd = std::isfinite(s.sd[i]) ? s.sd[i] : 0.0;
        upper << px(s.x[i]) << ',' << py(s.mean[i] + sd) << ' ';
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        if (!std::isfinite(s.mean[i])) continue;
        const double sd = std::isfinite(s.sd[i]) ? s.sd[i] : 0.0;
        lower << px(s.x[i]) << ',' << py(s.mean[i] - sd) << ' ';
      }
      os << "<polygon points=\"" << upper.str() << lower.str() << "\" fill=\"" << color
         << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.mean[i])) os << px(s.x[i]) << ',' << py(s.mean[i]) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 12 + 14 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight - 110 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << kWidth - kRight - 95 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/><text x=\"" << kWidth - kRight - 90 << "\" y=\"" << ly << "\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_heatmap(const Heatmap& map) {
  const std::size_t cols = map.x_ticks.size(), rows = map.y_ticks.size();
  const double pw = kWidth - kLeft - kRight - 40, ph = kHeight - kTop - kBottom;
  const double cw = cols ? pw / static_cast<double>(cols) : pw;
  const double ch = rows ? ph / static_cast<double>(rows) : ph;
  std::ostringstream os;
  header(os, kWidth, kHeight);
  labels(os, map.title, map.x_label, map.y_label);
  for (std::size_t r = 0; r < rows; ++r) {
    // Row 0 sits at the bottom.
    const double y = kTop + ph - static_cast<double>(r + 1) * ch;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = map.values[r * cols + c];
      if (!std::isfinite(v)) continue;
      os << "<rect x=\"" << kLeft + static_cast<double>(c) * cw << "\" y=\"" << y
         << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\"" << ramp(v)
         << "\"><title>" << fmt(map.x_ticks[c]) << ", " << fmt(map.y_ticks[r]) << ": " << fmt(v)
         << "</title></rect>\n";
    }
    os << "<text x=\"" << kLeft - 4 << "\" y=\"" << y + ch / 2 + 4 << "\" text-anchor=\"end\">"
       << fmt(map.y_ticks[r]) << "</text>\n";
  }
  for (std::size_t c = 0; c < cols; ++c)
    os << "<text x=\"" << kLeft + (static_cast<double>(c) + 0.5) * cw << "\" y=\""
       << kTop + ph + 14 << "\" text-anchor=\"middle\">" << fmt(map.x_ticks[c]) << "</text>\n";
  const double bx = kWidth - kRight - 20;
  for (int i = 0; i < 20; ++i)
    os << "<rect x=\"" << bx << "\" y=\"" << kTop + ph * (1.0 - (i + 1) / 20.0) << "\" width=\"12\" height=\""
       << ph / 20.0 + 0.5 << "\" fill=\"" << ramp((i + 0.5) / 20.0) << "\"/>\n";
  os << "<text x=\"" << bx + 6 << "\" y=\"" << kTop - 4 << "\" text-anchor=\"middle\">1</text>\n"
     << "<text x=\"" << bx + 6 << "\" y=\"" << kTop + ph + 14 << "\" text-anchor=\"middle\">0</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string render_raster(const std::string& title, const std::vector<std::vector<int>>& rows,
                          int k) {
  const std::size_t nodes = rows.empty() ? 0 : rows.front().size();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = nodes ? pw / static_cast<double>(nodes) : pw;
  const double ch = rows.empty() ? ph : ph / static_cast<double>(rows.size());
  std::ostringstream os;
  header(os, kWidth, kHeight);
  labels(os, title, "node", "trial");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    // Run-length encode each row to keep the file small.
    std::size_t start = 0;
    for (std::size_t j = 1; j <= nodes; ++j) {
      if (j < nodes && rows[r][j] == rows[r][start]) continue;
      const int label = std::clamp(rows[r][start], 0, std::max(0, k - 1));
      os << "<rect x=\"" << kLeft + static_cast<double>(start) * cw << "\" y=\""
         << kTop + static_cast<double>(r) * ch << "\" width=\""
         << static_cast<double>(j - start) * cw << "\" height=\"" << ch << "\" fill=\""
         << kPalette[label % 8] << "\"/>\n";
      start = j;
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_panels(const std::vector<std::string>& panels, int panel_width,
                          int panel_height) {
  std::ostringstream os;
  const int w = panel_width * static_cast<int>(panels.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << panel_height << "\">\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    std::string body = panels[i];
    const auto open = body.find("<svg");
    if (open != std::string::npos) body.insert(open + 4, " x=\"" + std::to_string(panel_width * static_cast<int>(i)) + "\"");
    os << body;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sbmvi::svg
