#include "idslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace idslab {

namespace {

constexpr double kWidth = 860.0, kHeight = 560.0;
constexpr double kLeft = 70.0, kRight = 40.0, kTop = 48.0, kBottom = 56.0;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') {
      out += "&amp;";
    } else if (c == '<') {
      out += "&lt;";
    } else if (c == '>') {
      out += "&gt;";
    } else {
      out += c;
    }
  }
  return out;
}

std::string header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) +
         "\" font-family=\"monospace\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

std::string text_at(double x, double y, const std::string& s, const std::string& anchor = "start") {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor + "\">" +
         escape(s) + "</text>\n";
}

std::string title_line(const std::string& title) {
  return title.empty() ? "" : text_at(kWidth / 2, 24, title, "middle");
}

// Diverging three-stop color ramp (low blue, mid near-white, high red).
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int stops[3][3] = {{49, 54, 149}, {247, 247, 247}, {165, 0, 38}};
  const int lo = t < 0.5 ? 0 : 1;
  const double u = t < 0.5 ? t * 2.0 : (t - 0.5) * 2.0;
  char buf[10];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[lo][0] + u * (stops[lo + 1][0] - stops[lo][0]))),
                static_cast<int>(std::lround(stops[lo][1] + u * (stops[lo + 1][1] - stops[lo][1]))),
                static_cast<int>(std::lround(stops[lo][2] + u * (stops[lo + 1][2] - stops[lo][2]))));
  return buf;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

const char* const kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v, double pix_lo, double pix_hi) const {
    double t = log ? std::log10(v) : v;
    double l = log ? std::log10(lo) : lo;
    double h = log ? std::log10(hi) : hi;
    if (h == l) return (pix_lo + pix_hi) / 2.0;
    return pix_lo + (t - l) / (h - l) * (pix_hi - pix_lo);
  }
};

std::string axis_ticks(const Axis& ax, bool vertical) {
  std::string out;
  const double l = ax.log ? std::log10(ax.lo) : ax.lo;
  const double h = ax.log ? std::log10(ax.hi) : ax.hi;
  for (int i = 0; i <= 4; ++i) {
    const double t = l + (h - l) * i / 4.0;
    const double v = ax.log ? std::pow(10.0, t) : t;
    if (vertical) {
      const double y = ax.map(v, kHeight - kBottom, kTop);
      out += "<line x1=\"" + fmt(kLeft - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft) +
             "\" y2=\"" + fmt(y) + "\" stroke=\"#333333\"/>\n";
      out += text_at(kLeft - 8, y + 4, fmt(v), "end");
    } else {
      const double x = ax.map(v, kLeft, kWidth - kRight);
      out += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kHeight - kBottom) + "\" x2=\"" + fmt(x) +
             "\" y2=\"" + fmt(kHeight - kBottom + 4) + "\" stroke=\"#333333\"/>\n";
      out += text_at(x, kHeight - kBottom + 18, fmt(v), "middle");
    }
  }
  return out;
}

std::string frame() {
  return "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
         fmt(kWidth - kLeft - kRight) + "\" height=\"" + fmt(kHeight - kTop - kBottom) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
}

}  // namespace

std::string render_sweep_svg(const Table& t, const std::string& title,
                             std::optional<double> value_cap) {
  if (t.columns.size() < 3 || t.rows.empty())
    throw std::invalid_argument("sweep plot: need a nonempty (x, eps, value) table");
  std::vector<double> xs_raw, es_raw;
  for (const auto& r : t.rows) {
    xs_raw.push_back(r[0]);
    es_raw.push_back(r[1]);
  }
  const auto xs = sorted_unique(std::move(xs_raw));
  const auto es = sorted_unique(std::move(es_raw));
  const int nx = static_cast<int>(xs.size()), ne = static_cast<int>(es.size());

  // Dense value lattice; cells without a row stay at the minimum.
  double vmin = t.rows[0][2], vmax = t.rows[0][2];
  for (const auto& r : t.rows) {
    vmin = std::min(vmin, r[2]);
    vmax = std::max(vmax, r[2]);
  }
  if (value_cap) {
    vmin = -*value_cap;
    vmax = *value_cap;
  } else if (vmin == vmax) {
    vmax = vmin + 1.0;
  }
  std::vector<double> grid(static_cast<std::size_t>(nx) * ne, vmin);
  const auto index_of = [](const std::vector<double>& v, double x) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  for (const auto& r : t.rows)
    grid[static_cast<std::size_t>(index_of(xs, r[0])) * ne + index_of(es, r[1])] = r[2];

  const int sx = std::max(1, (nx + 239) / 240), se = std::max(1, (ne + 239) / 240);
  const double plot_w = kWidth - kLeft - kRight - 70.0;  // reserve room for the colorbar
  const double plot_h = kHeight - kTop - kBottom;
  const double cw = plot_w / ((nx + sx - 1) / sx), ch = plot_h / ((ne + se - 1) / se);

  std::string out = header() + title_line(title);
  int ci = 0;
  for (int i = 0; i < nx; i += sx, ++ci) {
    int cj = 0;
    for (int j = 0; j < ne; j += se, ++cj) {
      const double v = std::clamp(grid[static_cast<std::size_t>(i) * ne + j], vmin, vmax);
      const double tt = (v - vmin) / (vmax - vmin);
      // eps increases upward
      out += "<rect x=\"" + fmt(kLeft + ci * cw) + "\" y=\"" + fmt(kHeight - kBottom - (cj + 1) * ch) +
             "\" width=\"" + fmt(cw + 0.5) + "\" height=\"" + fmt(ch + 0.5) + "\" fill=\"" +
             ramp_color(tt) + "\"/>\n";
    }
  }

  // Index-spaced tick labels on both axes.
  for (int k = 0; k <= 4; ++k) {
    const int i = (nx - 1) * k / 4;
    const int j = (ne - 1) * k / 4;
    out += text_at(kLeft + (i / sx + 0.5) * cw, kHeight - kBottom + 18, fmt(xs[i]), "middle");
    out += text_at(kLeft - 8, kHeight - kBottom - (j / se + 0.5) * ch + 4, fmt(es[j]), "end");
  }
  out += text_at(kLeft + plot_w / 2, kHeight - 16, t.columns[0], "middle");
  out += text_at(16, kTop - 10, t.columns[1]);

  // Colorbar.
  const double bar_x = kWidth - kRight - 50.0;
  for (int k = 0; k < 32; ++k) {
    out += "<rect x=\"" + fmt(bar_x) + "\" y=\"" + fmt(kHeight - kBottom - (k + 1) * plot_h / 32) +
           "\" width=\"18\" height=\"" + fmt(plot_h / 32 + 0.5) + "\" fill=\"" +
           ramp_color((k + 0.5) / 32.0) + "\"/>\n";
  }
  out += text_at(bar_x + 24, kHeight - kBottom, fmt(vmin));
  out += text_at(bar_x + 24, kTop + 12, fmt(vmax));
  out += text_at(bar_x + 24, (kTop + kHeight - kBottom) / 2, fmt((vmin + vmax) / 2));
  out += "</svg>\n";
  return out;
}

std::string render_curves_svg(const std::vector<CurveSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label, bool log_x,
                              bool log_y) {
  Axis ax{0.0, 1.0, log_x}, ay{0.0, 1.0, log_y};
  bool first = true;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if ((log_x && !(x > 0.0)) || (log_y && !(y > 0.0))) continue;
      if (first) {
        ax.lo = ax.hi = x;
        ay.lo = ay.hi = y;
        first = false;
      }
      ax.lo = std::min(ax.lo, x);
      ax.hi = std::max(ax.hi, x);
      ay.lo = std::min(ay.lo, y);
      ay.hi = std::max(ay.hi, y);
    }
  }
  if (first) throw std::invalid_argument("curve plot: no drawable points");
  if (ay.lo == ay.hi) {
    ay.lo = log_y ? ay.lo / 2.0 : ay.lo - 1.0;
    ay.hi = log_y ? ay.hi * 2.0 : ay.hi + 1.0;
  }
  if (ax.lo == ax.hi) {
    ax.lo = log_x ? ax.lo / 2.0 : ax.lo - 1.0;
    ax.hi = log_x ? ax.hi * 2.0 : ax.hi + 1.0;
  }

  std::string out = header() + title_line(title) + frame();
  out += axis_ticks(ax, false) + axis_ticks(ay, true);
  out += text_at(kLeft + (kWidth - kLeft - kRight) / 2, kHeight - 16, x_label, "middle");
  out += text_at(16, kTop - 10, y_label);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kSeriesColors[k % (sizeof kSeriesColors / sizeof *kSeriesColors)];
    std::string pts;
    int drawn = 0;
    for (const auto& [x, y] : series[k].points) {
      if ((log_x && !(x > 0.0)) || (log_y && !(y > 0.0))) continue;
      pts += fmt(ax.map(x, kLeft, kWidth - kRight)) + "," +
             fmt(ay.map(y, kHeight - kBottom, kTop)) + " ";
      ++drawn;
    }
    if (drawn == 1) {
      const std::size_t comma = pts.find(',');
      out += "<circle cx=\"" + pts.substr(0, comma) + "\" cy=\"" +
             pts.substr(comma + 1, pts.size() - comma - 2) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
    } else if (drawn > 1) {
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    }
    out += "<rect x=\"" + fmt(kWidth - kRight - 170) + "\" y=\"" + fmt(kTop + 8 + 18.0 * k) +
           "\" width=\"12\" height=\"4\" fill=\"" + color + "\"/>\n";
    out += text_at(kWidth - kRight - 152, kTop + 14 + 18.0 * k, series[k].name);
  }
  out += "</svg>\n";
  return out;
}

std::string render_bound_margin_svg(const std::vector<BoundReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("margin plot: no reports");
  double max_abs = 0.0;
  for (const auto& r : reports) max_abs = std::max(max_abs, std::abs(r.margin));
  if (max_abs == 0.0) max_abs = 1.0;

  const double zero_x = kLeft + 0.35 * (kWidth - kLeft - kRight);
  const double span = kWidth - kRight - zero_x;
  const double row_h = std::min(40.0, (kHeight - kTop - kBottom) / reports.size());

  std::string out = header() + title_line("bound margins (rhs - lhs)");
  out += "<line x1=\"" + fmt(zero_x) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(zero_x) +
         "\" y2=\"" + fmt(kHeight - kBottom) + "\" stroke=\"#333333\"/>\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    const double y = kTop + k * row_h + row_h * 0.2;
    const double len = std::abs(r.margin) / max_abs * (r.margin >= 0 ? span : zero_x - kLeft);
    const double x0 = r.margin >= 0 ? zero_x : zero_x - len;
    out += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(std::max(len, 1.0)) +
           "\" height=\"" + fmt(row_h * 0.6) + "\" fill=\"" + (r.pass ? "#2a9d4e" : "#c23030") +
           "\"/>\n";
    out += text_at(kLeft, y + row_h * 0.45, r.id + "  margin=" + fmt(r.margin));
  }
  out += "</svg>\n";
  return out;
}

std::string render_plot(const Table& t, PlotKind kind, const std::string& title) {
  if (kind == PlotKind::Sweep) return render_sweep_svg(t, title);
  if (kind == PlotKind::Cdf) {
    if (t.columns.size() < 2 || t.rows.empty())
      throw std::invalid_argument("cdf plot: need (x, y...) columns");
    std::vector<CurveSeries> series(t.columns.size() - 1);
    for (std::size_t c = 1; c < t.columns.size(); ++c) series[c - 1].name = t.columns[c];
    for (const auto& r : t.rows)
      for (std::size_t c = 1; c < t.columns.size(); ++c)
        series[c - 1].points.emplace_back(r[0], r[c]);
    return render_curves_svg(series, title, t.columns[0], "value");
  }
  // BoundMargin from a bare (index, margin, pass) table.
  if (t.columns.size() < 3 || t.rows.empty())
    throw std::invalid_argument("margin plot: need (index, margin, pass) columns");
  std::vector<BoundReport> reports;
  for (const auto& r : t.rows) {
    BoundReport b;
    b.id = "check " + fmt(r[0]);
    b.margin = r[1];
    b.pass = r[2] != 0.0;
    reports.push_back(std::move(b));
  }
  return render_bound_margin_svg(reports);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void emit_plot(const Table& t, PlotKind kind, const std::string& path, const std::string& title) {
  write_text_file(path, render_plot(t, kind, title));
}

void emit_bound_margin_plot(const std::vector<BoundReport>& reports, const std::string& path) {
  write_text_file(path, render_bound_margin_svg(reports));
}

}  // namespace idslab
