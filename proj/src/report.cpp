#include "featpipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "featpipe/csv.hpp"
#include "featpipe/error.hpp"

namespace featpipe::report {

void write_text(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string svg_open(int width, int height) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\""
    << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  return o.str();
}

std::string text(double x, double y, std::string_view body, std::string_view anchor = "middle",
                 int size = 12, std::string_view extra = "") {
  std::ostringstream o;
  o << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" font-family=\"sans-serif\" font-size=\""
    << size << "\" text-anchor=\"" << anchor << "\"" << extra << '>' << xml_escape(body) << "</text>\n";
  return o.str();
}

// "Nice" tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

std::string tick_label(double v) {
  std::string s = csv::format_double(std::round(v * 1e6) / 1e6);
  return s;
}

struct Frame {
  double left = 70, right = 170, top = 40, bottom = 60;
  double width = 640, height = 400;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string axes(const Frame& f, const std::string& title, const std::string& x_label,
                 const std::string& y_label) {
  std::ostringstream o;
  o << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << fixed(f.left) << "\" y1=\"" << fixed(f.height - f.bottom) << "\" x2=\""
    << fixed(f.width - f.right) << "\" y2=\"" << fixed(f.height - f.bottom) << "\"/>\n"
    << "<line x1=\"" << fixed(f.left) << "\" y1=\"" << fixed(f.top) << "\" x2=\"" << fixed(f.left)
    << "\" y2=\"" << fixed(f.height - f.bottom) << "\"/>\n";
  for (double t : ticks(f.x0, f.x1)) {
    o << "<line x1=\"" << fixed(f.px(t)) << "\" y1=\"" << fixed(f.height - f.bottom) << "\" x2=\""
      << fixed(f.px(t)) << "\" y2=\"" << fixed(f.height - f.bottom + 5) << "\"/>\n";
  }
  for (double t : ticks(f.y0, f.y1)) {
    o << "<line x1=\"" << fixed(f.left - 5) << "\" y1=\"" << fixed(f.py(t)) << "\" x2=\""
      << fixed(f.left) << "\" y2=\"" << fixed(f.py(t)) << "\"/>\n";
  }
  o << "</g>\n";
  for (double t : ticks(f.x0, f.x1)) o << text(f.px(t), f.height - f.bottom + 18, tick_label(t));
  for (double t : ticks(f.y0, f.y1)) o << text(f.left - 8, f.py(t) + 4, tick_label(t), "end");
  o << text(f.width / 2 - (f.right - f.left) / 2, 24, title, "middle", 14);
  o << text((f.left + f.width - f.right) / 2, f.height - 15, x_label);
  o << text(18, (f.top + f.height - f.bottom) / 2, y_label, "middle", 12,
            " transform=\"rotate(-90 18 " + fixed((f.top + f.height - f.bottom) / 2) + ")\"");
  return o.str();
}

}  // namespace

std::string learning_curve_csv(std::span<const LearningCurvePoint> points) {
  std::ostringstream o;
  o << "method,fraction,n_images,n_features,accuracy,seed\n";
  for (const auto& p : points) {
    o << csv::escape(p.method) << ',' << csv::format_double(p.fraction) << ',' << p.n_images << ','
      << p.n_features << ',' << csv::format_double(p.accuracy) << ',' << p.seed << '\n';
  }
  return o.str();
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream o;
  o << "actual,predicted,count\n";
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t p = 0; p < 2; ++p) {
      o << csv::escape(m.classes()[a]) << ',' << csv::escape(m.classes()[p]) << ',' << m.count(a, p) << '\n';
    }
  }
  return o.str();
}

std::vector<Series> learning_curve_series(std::span<const LearningCurvePoint> points) {
  std::vector<Series> out;
  for (const auto& p : points) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Series& s) { return s.name == p.method; });
    if (it == out.end()) {
      out.push_back({p.method, {}});
      it = out.end() - 1;
    }
    it->points.emplace_back(p.fraction, p.accuracy);
  }
  return out;
}

std::string line_chart_svg(std::span<const Series> series, const ChartOptions& options) {
  Frame f;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax - xmin <= 0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  std::tie(f.x0, f.x1) = options.x_range.value_or(std::pair{xmin, xmax});
  std::tie(f.y0, f.y1) = options.y_range.value_or(std::pair{ymin, ymax});

  std::ostringstream o;
  o << svg_open(static_cast<int>(f.width), static_cast<int>(f.height));
  o << axes(f, options.title, options.x_label, options.y_label);
  std::size_t index = 0;
  double legend_y = f.top + 10;
  for (const auto& s : series) {
    const char* color = kPalette[index++ % std::size(kPalette)];
    if (!s.points.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < s.points.size(); ++k) {
        const auto [x, y] = s.points[k];
        if (k) o << ' ';
        if (options.step && k) o << fixed(f.px(x)) << ',' << fixed(f.py(s.points[k - 1].second)) << ' ';
        o << fixed(f.px(x)) << ',' << fixed(f.py(y));
      }
      o << "\"/>\n";
    }
    const double lx = f.width - f.right + 15;
    o << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(legend_y) << "\" x2=\"" << fixed(lx + 20)
      << "\" y2=\"" << fixed(legend_y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << text(lx + 26, legend_y + 4, s.name, "start");
    legend_y += 18;
  }
  o << "</svg>\n";
  return o.str();
}

std::string confusion_svg(const ConfusionMatrix& m) {
  constexpr double cell = 110, left = 120, top = 60;
  const double width = left + 3 * cell + 20;
  const double height = top + 3 * cell + 60;
  std::ostringstream o;
  o << svg_open(static_cast<int>(width), static_cast<int>(height));
  o << text(left + 1.5 * cell, 28, "Confusion Matrix", "middle", 14);

  auto box = [&](std::size_t col, std::size_t row, const char* fill, const std::string& big,
                 const std::string& small, const std::string& smaller = "") {
    const double x = left + static_cast<double>(col) * cell;
    const double y = top + static_cast<double>(row) * cell;
    o << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" width=\"" << fixed(cell)
      << "\" height=\"" << fixed(cell) << "\" fill=\"" << fill << "\" stroke=\"black\"/>\n";
    o << text(x + cell / 2, y + cell / 2 - 6, big, "middle", 16, " font-weight=\"bold\"");
    o << text(x + cell / 2, y + cell / 2 + 14, small);
    if (!smaller.empty()) o << text(x + cell / 2, y + cell / 2 + 30, smaller, "middle", 11, " fill=\"#a00\"");
  };
  auto rate = [](std::optional<double> r) { return r ? format_percent(*r) : std::string("NaN%"); };
  auto miss = [](std::optional<double> r) { return r ? format_percent(1.0 - *r) : std::string("NaN%"); };

  // Rows are actual classes, columns predicted classes.
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t p = 0; p < 2; ++p) {
      box(p, a, a == p ? "#bfe8bf" : "#f4c2c2", std::to_string(m.count(a, p)),
          format_percent(m.cell_share(a, p)));
    }
    box(2, a, "#e6e6e6", rate(m.row_rate(a)), miss(m.row_rate(a)));
  }
  for (std::size_t p = 0; p < 2; ++p) box(p, 2, "#e6e6e6", rate(m.column_rate(p)), miss(m.column_rate(p)));
  box(2, 2, "#c6d9f1", format_percent(m.accuracy()), format_percent(1.0 - m.accuracy()),
      std::to_string(m.correct()) + "/" + std::to_string(m.total()));

  for (std::size_t c = 0; c < 2; ++c) {
    o << text(left + (static_cast<double>(c) + 0.5) * cell, top + 3 * cell + 20, m.classes()[c]);
    o << text(left - 8, top + (static_cast<double>(c) + 0.5) * cell + 4, m.classes()[c], "end");
  }
  o << text(left + 1.5 * cell, height - 12, "Predicted class");
  o << text(18, top + 1.5 * cell, "Actual class", "middle", 12,
            " transform=\"rotate(-90 18 " + fixed(top + 1.5 * cell) + ")\"");
  o << "</svg>\n";
  return o.str();
}

std::string histogram_csv(const FeatureStats& stats) {
  std::ostringstream o;
  o << "bin_lower,bin_upper,count\n";
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    const long bin = stats.first_bin + static_cast<long>(i);
    o << csv::format_double(stats.bin_lower(bin)) << ',' << csv::format_double(stats.bin_upper(bin)) << ','
      << stats.counts[i] << '\n';
  }
  return o.str();
}

std::string histogram_svg(const FeatureStats& stats, double lo, double hi, const std::string& title) {
  Frame f;
  f.right = 30;
  f.x0 = lo;
  f.x1 = hi;
  std::size_t peak = 1;
  for (auto c : stats.counts) peak = std::max(peak, c);
  f.y0 = 0;
  f.y1 = static_cast<double>(peak);
  std::ostringstream o;
  o << svg_open(static_cast<int>(f.width), static_cast<int>(f.height));
  o << axes(f, title, "feature value", "count");
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    const long bin = stats.first_bin + static_cast<long>(i);
    const double a = std::max(lo, stats.bin_lower(bin));
    const double b = std::min(hi, stats.bin_upper(bin));
    if (b <= a || stats.counts[i] == 0) continue;
    const double y = f.py(static_cast<double>(stats.counts[i]));
    o << "<rect x=\"" << fixed(f.px(a)) << "\" y=\"" << fixed(y) << "\" width=\"" << fixed(f.px(b) - f.px(a))
      << "\" height=\"" << fixed(f.py(0) - y) << "\" fill=\"#1f77b4\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace featpipe::report
