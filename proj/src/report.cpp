#include "backstep/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "backstep/errors.hpp"

namespace backstep {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw std::runtime_error("cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move " + tmp.string() + " into place");
    }
}

std::string kernel_csv(const KernelField& field) {
    const auto& grid = field.grid();
    std::string out = "x,y,value\n";
    out.reserve(grid.node_count() * 64);
    for (int i = 0; i <= grid.n(); ++i)
        for (int j = grid.row_begin(i); j <= grid.row_end(i); ++j)
            // "+ 0.0" folds -0 (diagonal data at the origin) into 0.
            out += fmt::format("{:.17g},{:.17g},{:.17g}\n", grid.coord(i), grid.coord(j), field(i, j) + 0.0);
    return out;
}

std::string trace_csv(const ClosedLoopTrace& trace, int frame_stride) {
    require(frame_stride >= 1, "trace_csv: frame_stride must be >= 1");
    std::string out = "t,x,u,u_hat,u_tilde\n";
    const std::size_t frames = trace.frames();
    for (std::size_t k = 0; k < frames; ++k) {
        if (k % static_cast<std::size_t>(frame_stride) != 0 && k + 1 != frames) continue;
        const auto& u = trace.u[k];
        for (int i = 0; i <= trace.n; ++i)
            out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", trace.times[k], u.x(i), u[i],
                               trace.u_hat[k][i], trace.u_tilde[k][i]);
    }
    return out;
}

std::string signals_csv(const ClosedLoopTrace& trace, const std::vector<LyapunovSample>& lyapunov) {
    require(lyapunov.empty() || lyapunov.size() == trace.frames(),
            "signals_csv: Lyapunov series does not match the trace");
    std::string out = "t,U_ctrl,y,l2_u,sup_u,l2_err,h4_u,lyap_U,lyap_V,lyap_W,lyap_S\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < trace.frames(); ++k) {
        const auto nu = norms(trace.u[k]);
        const auto ne = norms(trace.u_tilde[k]);
        LyapunovSample s{trace.times[k], nan, nan, nan, nan, nan, nan};
        if (!lyapunov.empty()) s = lyapunov[k];
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                           trace.times[k], trace.control[k], trace.measurement[k], nu.l2, nu.sup, ne.l2,
                           nu.h4, s.U_val, s.V_val, s.W_val, s.S_val);
    }
    return out;
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return columns[c];
    throw ContractError("CSV has no column '" + std::string(name) + "'");
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open " + path.string());
    CsvTable table;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path.string() + ": empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    table.columns.resize(table.header.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            require(c < table.columns.size(), fmt::format("{}: too many fields on row {}", path.string(), row));
            // strtod accepts the "nan" written for absent values.
            table.columns[c++].push_back(std::strtod(cell.c_str(), nullptr));
        }
        require(c == table.columns.size(), fmt::format("{}: too few fields on row {}", path.string(), row));
    }
    return table;
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(std::string_view s) {
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

std::string svg_open(std::string_view title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
        kWidth, kHeight, (kLeft + kWidth - kRight) / 2, escape(title));
}

std::vector<double> linear_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

}  // namespace

std::string svg_line_plot(std::string_view title, std::string_view x_label, std::string_view y_label,
                          const std::vector<PlotSeries>& series, bool log_y) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    std::vector<std::vector<std::pair<double, double>>> pts(series.size());
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        const std::size_t count = std::min(sr.x.size(), sr.y.size());
        const std::size_t step = std::max<std::size_t>(1, count / 2000);
        for (std::size_t i = 0; i < count; ++i) {
            if (i % step != 0 && i + 1 != count) continue;
            double y = sr.y[i];
            if (!std::isfinite(sr.x[i]) || !std::isfinite(y)) continue;
            if (log_y) {
                if (y <= 0.0) continue;
                y = std::log10(y);
            }
            pts[s].emplace_back(sr.x[i], y);
            xmin = std::min(xmin, sr.x[i]);
            xmax = std::max(xmax, sr.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }

    std::string svg = svg_open(title);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
        svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no finite data</text>\n</svg>\n",
                           kLeft + pw / 2, kTop + ph / 2);
        return svg;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymin -= log_y ? 1.0 : std::max(1.0, std::abs(ymin)) * 0.5;
        ymax += log_y ? 1.0 : std::max(1.0, std::abs(ymax)) * 0.5;
    }
    if (log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
    }
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    for (double t : linear_ticks(xmin, xmax)) {
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px(t),
                           kTop, kTop + ph);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(t),
                           kTop + ph + 16, t);
    }
    std::vector<double> yticks;
    if (log_y) {
        const int decades = static_cast<int>(ymax - ymin);
        const int every = std::max(1, decades / 8);
        for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); d += every) yticks.push_back(d);
    } else {
        yticks = linear_ticks(ymin, ymax);
    }
    for (double t : yticks) {
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft,
                           py(t), kLeft + pw);
        const std::string label = log_y ? fmt::format("1e{:g}", t) : fmt::format("{:g}", t);
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, py(t) + 4,
                           label);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                       kHeight - 14, escape(x_label));
    svg += fmt::format(
        "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}{2}</text>\n",
        kTop + ph / 2, escape(y_label), log_y ? " (log scale)" : "");

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = kPalette[s % std::size(kPalette)];
        std::string points;
        for (const auto& [x, y] : pts[s]) points += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour,
                           points);
        const double ly = kTop + 14 + 18.0 * static_cast<double>(s);
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           kLeft + pw + 10, ly, kLeft + pw + 30, colour);
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + pw + 35, ly + 4,
                           escape(series[s].label));
    }
    svg += "</svg>\n";
    return svg;
}

std::string svg_heatmap(std::string_view title, const std::vector<double>& times, const std::vector<double>& xs,
                        const std::vector<std::vector<double>>& values) {
    require(values.size() == times.size(), "svg_heatmap: one row of values per time is required");
    std::string svg = svg_open(title);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    if (times.empty() || xs.size() < 2) return svg + "</svg>\n";

    const std::size_t cols = std::min<std::size_t>(times.size(), 160);
    const std::size_t rows = std::min<std::size_t>(xs.size(), 65);
    auto pick = [](std::size_t k, std::size_t count, std::size_t total) {
        return count == 1 ? 0 : k * (total - 1) / (count - 1);
    };
    double vmax = 0.0;
    for (const auto& row : values)
        for (double v : row)
            if (std::isfinite(v)) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) vmax = 1.0;

    const double cw = pw / static_cast<double>(cols);
    const double ch = ph / static_cast<double>(rows);
    for (std::size_t a = 0; a < cols; ++a) {
        const auto& row = values[pick(a, cols, times.size())];
        for (std::size_t b = 0; b < rows; ++b) {
            const double v = row[pick(b, rows, xs.size())];
            const double s = std::isfinite(v) ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
            // blue (-) through white to red (+)
            const int r = s < 0 ? static_cast<int>(255 * (1 + s)) : 255;
            const int g = static_cast<int>(255 * (1 - std::abs(s)));
            const int bl = s > 0 ? static_cast<int>(255 * (1 - s)) : 255;
            svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                               "fill=\"#{:02x}{:02x}{:02x}\"/>\n",
                               kLeft + static_cast<double>(a) * cw, kTop + ph - static_cast<double>(b + 1) * ch,
                               cw + 0.3, ch + 0.3, r, g, bl);
        }
    }
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    const double t0 = times.front(), t1 = times.back() > t0 ? times.back() : t0 + 1.0;
    for (double t : linear_ticks(t0, t1))
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n",
                           kLeft + (t - t0) / (t1 - t0) * pw, kTop + ph + 16, t);
    for (double x : linear_ticks(xs.front(), xs.back()))
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", kLeft - 6,
                           kTop + ph - (x - xs.front()) / (xs.back() - xs.front()) * ph + 4, x);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>\n", kLeft + pw / 2, kHeight - 14);
    svg += fmt::format("<text x=\"30\" y=\"{}\" text-anchor=\"middle\">x</text>\n", kTop + ph / 2);

    // colour bar
    const double bx = kLeft + pw + 30;
    for (int k = 0; k < 50; ++k) {
        const double s = 1.0 - 2.0 * k / 49.0;
        const int r = s < 0 ? static_cast<int>(255 * (1 + s)) : 255;
        const int g = static_cast<int>(255 * (1 - std::abs(s)));
        const int bl = s > 0 ? static_cast<int>(255 * (1 - s)) : 255;
        svg += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"18\" height=\"{:.2f}\" fill=\"#{:02x}{:02x}{:02x}\"/>\n",
                           bx, kTop + ph * k / 50.0, ph / 50.0 + 0.3, r, g, bl);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", bx + 22, kTop + 10, vmax);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">0</text>\n", bx + 22, kTop + ph / 2 + 4);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", bx + 22, kTop + ph, -vmax);
    svg += "</svg>\n";
    return svg;
}

}  // namespace backstep
