#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "backstep/diagnostics.hpp"
#include "backstep/kernel.hpp"
#include "backstep/simulate.hpp"

namespace backstep {

/// Writes `content` to `path` through a sibling temporary file and a
/// rename, so readers never observe a partially written file. Throws
/// std::runtime_error on I/O failure (the temporary is removed).
void write_atomic(const std::filesystem::path& path, std::string_view content);

// "x,y,value" rows over the field's triangle, row-major in x, 17 significant digits.
std::string kernel_csv(const KernelField& field);

// "t,x,u,u_hat,u_tilde" rows for every `frame_stride`-th stored frame
// (the last frame is always included).
std::string trace_csv(const ClosedLoopTrace& trace, int frame_stride);

/// signals.csv: t, U_ctrl, y, l2_u, sup_u, l2_err, h4_u, lyap_U..lyap_S.
/// When `lyapunov` is empty the lyap_* columns hold nan.
std::string signals_csv(const ClosedLoopTrace& trace, const std::vector<LyapunovSample>& lyapunov);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;  // columns[c][row]

    const std::vector<double>& column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line plot. With log_y, nonpositive and non-finite
/// points are dropped.
std::string svg_line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                          const std::vector<PlotSeries>& series, bool log_y);

/// Heat map of values[frame][node] over (t, x), diverging colour scale
/// symmetric about zero.
std::string svg_heatmap(std::string_view title, const std::vector<double>& times,
                        const std::vector<double>& xs, const std::vector<std::vector<double>>& values);

}  // namespace backstep
