#pragma once

#include <string>
#include <vector>

namespace sbmvi::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> sd;  // empty for no band
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Lines with a shaded mean +/- sd band per series.
std::string render_lines(const LineChart& chart);

// Row-major matrix of values in [0, 1]; NaN cells are drawn blank.
struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x_ticks;  // columns
  std::vector<double> y_ticks;  // rows
  std::vector<double> values;
};

std::string render_heatmap(const Heatmap& map);

/// One row per trial, one column per node; cell color is the class index.
std::string render_raster(const std::string& title, const std::vector<std::vector<int>>& rows,
                          int k);

/// Charts placed side by side.
std::string render_panels(const std::vector<std::string>& panels, int panel_width,
                          int panel_height);

}  // namespace sbmvi::svg
