#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pngdyn/error.hpp"

namespace pngdyn {

// Minimal self-contained SVG line plots (no external assets). Plots are a
// pure view: they are always rendered from data already persisted as CSV.

enum class LineStyle { solid, dashed, dotted };

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  LineStyle style = LineStyle::solid;
  std::string color;  // empty -> palette
};

class LinePlot {
 public:
  LinePlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void set_log_x(bool v) { log_x_ = v; }
  void set_log_y(bool v) { log_y_ = v; }

  void add_series(Series s) { series_.push_back(std::move(s)); }

  // horizontal reference (e.g. an equilibrium level)
  void add_hline(double y, const std::string& color = "#555555") {
    hlines_.push_back({y, color});
  }

  // straight guide line between two data-space points (slope references)
  void add_guide(double x0, double y0, double x1, double y1,
                 const std::string& color = "#555555") {
    guides_.push_back({x0, y0, x1, y1, color});
  }

  void render(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open SVG for writing: " + path);
    f << render_string();
  }

  std::string render_string() const {
    double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
    auto fold = [&](double x, double y) {
      if (log_x_ && !(x > 0)) return;
      if (log_y_ && !(y > 0)) return;
      const double tx = log_x_ ? std::log10(x) : x;
      const double ty = log_y_ ? std::log10(y) : y;
      if (!std::isfinite(tx) || !std::isfinite(ty)) return;
      xmin = std::min(xmin, tx);
      xmax = std::max(xmax, tx);
      ymin = std::min(ymin, ty);
      ymax = std::max(ymax, ty);
    };
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) fold(s.x[i], s.y[i]);
    for (const auto& h : hlines_) fold(log_x_ ? 1.0 : 0.0, h.y);
    for (const auto& g : guides_) {
      fold(g.x0, g.y0);
      fold(g.x1, g.y1);
    }
    if (!(xmax >= xmin)) {  // nothing plottable
      xmin = 0;
      xmax = 1;
      ymin = 0;
      ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;

    const double w = 760, h = 480, ml = 70, mr = 160, mt = 40, mb = 55;
    auto px = [&](double x) {
      const double t = log_x_ ? std::log10(x) : x;
      return ml + (t - xmin) / (xmax - xmin) * (w - ml - mr);
    };
    auto py = [&](double y) {
      const double t = log_y_ ? std::log10(y) : y;
      return h - mb - (t - ymin) / (ymax - ymin) * (h - mt - mb);
    };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << " " << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>"
        << title_ << "</text>\n";
    // axes
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='"
        << h - mb << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<text x='" << (ml + (w - mr)) / 2 << "' y='" << h - 14
        << "' text-anchor='middle' font-size='12'>" << x_label_ << "</text>\n";
    out << "<text x='18' y='" << (mt + h - mb) / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 18 "
        << (mt + h - mb) / 2 << ")'>" << y_label_ << "</text>\n";
    // ticks
    emit_ticks(out, xmin, xmax, log_x_, true, px, py, ml, mt, mb, h, w, mr);
    emit_ticks(out, ymin, ymax, log_y_, false, px, py, ml, mt, mb, h, w, mr);

    for (const auto& hl : hlines_) {
      if (log_y_ && !(hl.y > 0)) continue;
      out << "<line x1='" << ml << "' y1='" << py(hl.y) << "' x2='" << w - mr << "' y2='"
          << py(hl.y) << "' stroke='" << hl.color
          << "' stroke-dasharray='2,4' stroke-width='1.2'/>\n";
    }
    for (const auto& g : guides_) {
      out << "<line x1='" << px(g.x0) << "' y1='" << py(g.y0) << "' x2='" << px(g.x1)
          << "' y2='" << py(g.y1) << "' stroke='" << g.color
          << "' stroke-dasharray='6,3' stroke-width='1.2'/>\n";
    }

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    int color_idx = 0;
    double legend_y = mt + 10;
    for (const auto& s : series_) {
      const std::string color =
          s.color.empty() ? palette[color_idx++ % 8] : s.color;
      std::string dash;
      if (s.style == LineStyle::dashed) dash = " stroke-dasharray='8,4'";
      if (s.style == LineStyle::dotted) dash = " stroke-dasharray='2,3'";
      out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5'" << dash
          << " points='";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (log_x_ && !(s.x[i] > 0)) continue;
        if (log_y_ && !(s.y[i] > 0)) continue;
        out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
      out << "'/>\n";
      if (!s.label.empty()) {
        out << "<line x1='" << w - mr + 8 << "' y1='" << legend_y << "' x2='"
            << w - mr + 34 << "' y2='" << legend_y << "' stroke='" << color
            << "' stroke-width='1.5'" << dash << "/>\n";
        out << "<text x='" << w - mr + 40 << "' y='" << legend_y + 4
            << "' font-size='11'>" << s.label << "</text>\n";
        legend_y += 16;
      }
    }
    out << "</svg>\n";
    return out.str();
  }

 private:
  struct HLine {
    double y;
    std::string color;
  };
  struct Guide {
    double x0, y0, x1, y1;
    std::string color;
  };

  template <typename PX, typename PY>
  void emit_ticks(std::ostringstream& out, double lo, double hi, bool log_axis,
                  bool is_x, PX px, PY py, double ml, double mt, double mb, double h,
                  double w, double mr) const {
    std::vector<double> ticks;
    if (log_axis) {
      for (int e = static_cast<int>(std::floor(lo)); e <= static_cast<int>(std::ceil(hi)); ++e)
        if (e >= lo - 1e-9 && e <= hi + 1e-9) ticks.push_back(std::pow(10.0, e));
    } else {
      const double span = hi - lo;
      const double step = std::pow(10.0, std::floor(std::log10(span / 4)));
      const double mult = span / step > 8 ? 2.0 : 1.0;
      for (double v = std::ceil(lo / (step * mult)) * step * mult; v <= hi + 1e-12;
           v += step * mult)
        ticks.push_back(v);
    }
    for (double v : ticks) {
      std::ostringstream lbl;
      if (log_axis) {
        lbl << "1e" << static_cast<int>(std::round(std::log10(v)));
      } else {
        lbl.precision(4);
        lbl << v;
      }
      if (is_x) {
        const double x = px(v);
        out << "<line x1='" << x << "' y1='" << h - mb << "' x2='" << x << "' y2='"
            << h - mb + 5 << "' stroke='black'/>\n";
        out << "<text x='" << x << "' y='" << h - mb + 18
            << "' text-anchor='middle' font-size='10'>" << lbl.str() << "</text>\n";
      } else {
        const double y = py(v);
        out << "<line x1='" << ml - 5 << "' y1='" << y << "' x2='" << ml << "' y2='" << y
            << "' stroke='black'/>\n";
        out << "<text x='" << ml - 8 << "' y='" << y + 3
            << "' text-anchor='end' font-size='10'>" << lbl.str() << "</text>\n";
      }
    }
  }

  std::string title_, x_label_, y_label_;
  bool log_x_ = false, log_y_ = false;
  std::vector<Series> series_;
  std::vector<HLine> hlines_;
  std::vector<Guide> guides_;
};

}  // namespace pngdyn
