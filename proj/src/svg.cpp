#include "lorafl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lorafl/errors.hpp"
#include "lorafl/io.hpp"

namespace lorafl {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 140;  // legend gutter
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n"
     << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << escape(title) << "</text>\n";
}

void axis_labels(std::ostringstream& os, const std::string& x_label,
                 const std::string& y_label) {
  os << "<text x=\"" << (kMarginLeft + (kWidth - kMarginLeft - kMarginRight) / 2)
     << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << escape(x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        "transform=\"rotate(-90 18 "
     << kHeight / 2 << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<LineSeries>& series) {
  if (series.empty()) throw ValidationError("render_line_chart: no series");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw ValidationError("render_line_chart: malformed series");
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) {
    return kMarginTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
  };

  std::ostringstream os;
  open_svg(os, title);

  // frame + ticks
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
     << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double yv = ymin + (ymax - ymin) * t / 5.0;
    const double yy = py(yv);
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << fmt(yy) << "\" x2=\""
       << kMarginLeft << "\" y2=\"" << fmt(yy) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(yy + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(yv) << "</text>\n";
    const double xv = xmin + (xmax - xmin) * t / 5.0;
    const double xx = px(xv);
    os << "<line x1=\"" << fmt(xx) << "\" y1=\"" << kMarginTop + plot_h
       << "\" x2=\"" << fmt(xx) << "\" y2=\"" << kMarginTop + plot_h + 4
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt(xx) << "\" y=\"" << kMarginTop + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(xv) << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) os << ' ';
      os << fmt(px(series[s].x[i])) << ',' << fmt(py(series[s].y[i]));
    }
    os << "\"/>\n";
    const double ly = kMarginTop + 14.0 * double(s) + 10;
    os << "<line x1=\"" << kWidth - kMarginRight + 10 << "\" y1=\"" << fmt(ly)
       << "\" x2=\"" << kWidth - kMarginRight + 30 << "\" y2=\"" << fmt(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n"
       << "<text x=\"" << kWidth - kMarginRight + 35 << "\" y=\"" << fmt(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(series[s].label) << "</text>\n";
  }

  axis_labels(os, x_label, y_label);
  os << "</svg>\n";
  return os.str();
}

std::string render_bar_chart(const std::string& title,
                             const std::vector<std::string>& group_labels,
                             const std::vector<BarSeries>& series,
                             const std::string& y_label) {
  if (series.empty() || group_labels.empty())
    throw ValidationError("render_bar_chart: empty input");
  for (const auto& s : series)
    if (s.values.size() != group_labels.size())
      throw ValidationError("render_bar_chart: series/group size mismatch");

  double vmax = 0.0, vmin = 1e300;
  for (const auto& s : series)
    for (double v : s.values) {
      if (v <= 0.0) throw ValidationError("render_bar_chart: log axis needs v > 0");
      vmax = std::max(vmax, v);
      vmin = std::min(vmin, v);
    }
  const double lmin = std::floor(std::log10(vmin));
  const double lmax = std::ceil(std::log10(vmax));

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto py = [&](double v) {
    return kMarginTop + plot_h -
           (std::log10(v) - lmin) / (lmax - lmin) * plot_h;
  };

  std::ostringstream os;
  open_svg(os, title);
  os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
     << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = int(lmin); d <= int(lmax); ++d) {
    const double yy = py(std::pow(10.0, d));
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << fmt(yy) << "\" x2=\""
       << kMarginLeft << "\" y2=\"" << fmt(yy) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(yy + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
       << d << "</text>\n";
  }

  const double group_w = plot_w / double(group_labels.size());
  const double bar_w = group_w * 0.8 / double(series.size());
  for (std::size_t g = 0; g < group_labels.size(); ++g) {
    const double gx = kMarginLeft + group_w * double(g) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = series[s].values[g];
      const double top = py(v);
      os << "<rect class=\"bar\" x=\"" << fmt(gx + bar_w * double(s)) << "\" y=\""
         << fmt(top) << "\" width=\"" << fmt(bar_w) << "\" height=\""
         << fmt(kMarginTop + plot_h - top) << "\" fill=\"" << series[s].color
         << "\"/>\n";
    }
    os << "<text x=\"" << fmt(gx + group_w * 0.4) << "\" y=\""
       << kMarginTop + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(group_labels[g]) << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const double ly = kMarginTop + 16.0 * double(s) + 10;
    os << "<rect x=\"" << kWidth - kMarginRight + 10 << "\" y=\"" << fmt(ly - 8)
       << "\" width=\"12\" height=\"12\" fill=\"" << series[s].color << "\"/>\n"
       << "<text x=\"" << kWidth - kMarginRight + 28 << "\" y=\"" << fmt(ly + 2)
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << escape(series[s].label) << "</text>\n";
  }

  axis_labels(os, "rank", y_label);
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::string& path, const std::string& svg) {
  write_text_file(path, svg);
}

}  // namespace lorafl
