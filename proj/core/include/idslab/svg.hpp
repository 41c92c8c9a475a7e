#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idslab/averaging.hpp"
#include "idslab/table.hpp"

namespace idslab {

// All renderers produce self-contained SVG documents with deterministic
// bytes for identical inputs (fixed canvas, fixed decimal formatting).

// Heatmap of a three-column (x, eps, value) table (column names are used as
// axis labels). The eps axis is laid out by grid index, so log-spaced grids
// come out log-scaled; when value_cap is given the color scale is clamped to
// [-cap, cap]. Grids wider than ~240 cells per axis are strided.
std::string render_sweep_svg(const Table& t, const std::string& title,
                             std::optional<double> value_cap = std::nullopt);

struct CurveSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Line plot of one or more series; log axes drop nonpositive coordinates.
std::string render_curves_svg(const std::vector<CurveSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label,
                              bool log_x = false, bool log_y = false);

// Horizontal margin bars, one per report, green for pass and red for fail.
std::string render_bound_margin_svg(const std::vector<BoundReport>& reports);

enum class PlotKind { Sweep, Cdf, BoundMargin };

// Table-driven dispatch: Sweep expects (x, eps, value); Cdf draws each
// column after the first as a curve against column 0; BoundMargin expects
// (index, margin, pass) and renders anonymous bars.
std::string render_plot(const Table& t, PlotKind kind, const std::string& title);

void emit_plot(const Table& t, PlotKind kind, const std::string& path,
               const std::string& title = "");
void emit_bound_margin_plot(const std::vector<BoundReport>& reports, const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace idslab
