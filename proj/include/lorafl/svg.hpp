#pragma once

#include <string>
#include <vector>

namespace lorafl {

struct LineSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BarSeries {
  std::string label;
  std::string color;
  std::vector<double> values;  // one per group
};

// Accuracy-vs-round style line chart; one polyline per series.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<LineSeries>& series);

// Grouped bar chart on a log10 vertical axis (cost-vs-rank style).
std::string render_bar_chart(const std::string& title,
                             const std::vector<std::string>& group_labels,
                             const std::vector<BarSeries>& series,
                             const std::string& y_label);

void write_svg(const std::string& path, const std::string& svg);

}  // namespace lorafl
