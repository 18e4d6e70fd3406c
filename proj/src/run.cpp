#include "backstep/run.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "backstep/diagnostics.hpp"
#include "backstep/errors.hpp"
#include "backstep/report.hpp"
#include "backstep/volterra.hpp"

namespace backstep {

namespace fs = std::filesystem;

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::kernel_solve: return "kernel_solve";
        case Scenario::open_loop: return "open_loop";
        case Scenario::closed_loop: return "closed_loop";
        case Scenario::linear_closed_loop: return "linear_closed_loop";
        case Scenario::verify_suite: return "verify_suite";
        case Scenario::sweep: return "sweep";
    }
    return "unknown";
}

Scenario scenario_for(SimMode mode) {
    switch (mode) {
        case SimMode::open_loop: return Scenario::open_loop;
        case SimMode::closed_loop: return Scenario::closed_loop;
        case SimMode::linear_closed_loop: return Scenario::linear_closed_loop;
    }
    return Scenario::closed_loop;
}

std::string format_manifest(const RunManifest& m) {
    std::string out = fmt::format("run_id = {}\nscenario = {}\nstatus = {}\nconfig = config\n", m.run_id,
                                  to_string(m.scenario), m.status);
    for (const auto& o : m.outputs) out += fmt::format("output = {}\n", o);
    return out;
}

fs::path output_root() {
    const char* env = std::getenv("BACKSTEP_OUT");
    if (env != nullptr && *env != '\0') return fs::path(env);
    return fs::path("runs");
}

fs::path create_run_directory(const fs::path& root, std::string& run_id) {
    fs::create_directories(root);
    const std::string base = run_id;
    for (int attempt = 1;; ++attempt) {
        if (attempt > 1) run_id = fmt::format("{}-{}", base, attempt);
        const fs::path dir = root / run_id;
        // create_directory reports false when the directory already existed.
        if (fs::create_directory(dir)) return dir;
    }
}

namespace {

std::vector<std::vector<double>> frames_of(const CsvTable& trace, std::string_view column,
                                           std::vector<double>& times, std::vector<double>& xs) {
    const auto& t = trace.column("t");
    const auto& x = trace.column("x");
    const auto& v = trace.column(column);
    times.clear();
    xs.clear();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (rows.empty() || t[i] != times.back()) {
            times.push_back(t[i]);
            rows.emplace_back();
        }
        rows.back().push_back(v[i]);
        if (rows.size() == 1) xs.push_back(x[i]);
    }
    return rows;
}

std::string plot_label(std::string_view column) {
    if (column == "U_ctrl") return "control U(t) = u(1,t)";
    if (column == "y") return "measurement y(t) = u_x(1,t)";
    if (column == "l2_u") return "L2 norm of u";
    if (column == "sup_u") return "sup norm of u";
    if (column == "l2_err") return "L2 norm of u_tilde";
    if (column == "h4_u") return "H4 norm of u";
    if (column == "lyap_U") return "Lyapunov U";
    if (column == "lyap_V") return "Lyapunov V";
    if (column == "lyap_W") return "Lyapunov W";
    if (column == "lyap_S") return "Lyapunov S = U + V + W";
    return std::string(column);
}

double decay_rate_on(const std::vector<double>& times, const std::vector<double>& values) {
    const double hi = std::min(0.3, times.back());
    return fit_decay(times, values, 0.05, hi).rate;
}

}  // namespace

std::vector<std::string> render_plots(const fs::path& run_dir, const std::vector<PlotSpec>& plots) {
    std::vector<std::string> written;
    const fs::path signals_path = run_dir / "signals.csv";
    if (fs::exists(signals_path) && !plots.empty()) {
        const CsvTable signals = read_csv(signals_path);
        for (const auto& p : plots) {
            const std::string name = fmt::format("signal_{}.svg", p.column);
            write_atomic(run_dir / name,
                         svg_line_plot(plot_label(p.column), "t", p.column,
                                       {{p.column, signals.column("t"), signals.column(p.column)}}, p.log_scale));
            written.push_back(name);
        }
    }
    const fs::path trace_path = run_dir / "trace.csv";
    if (fs::exists(trace_path)) {
        const CsvTable trace = read_csv(trace_path);
        std::vector<double> times, xs;
        const std::pair<const char*, const char*> maps[] = {
            {"u", "plant state u(x,t)"}, {"u_hat", "observer state u_hat(x,t)"},
            {"u_tilde", "estimation error u_tilde(x,t)"}};
        for (const auto& [column, title] : maps) {
            const auto rows = frames_of(trace, column, times, xs);
            const std::string name = fmt::format("heatmap_{}.svg", column);
            write_atomic(run_dir / name, svg_heatmap(title, times, xs, rows));
            written.push_back(name);
        }
    }
    return written;
}

SimulationOutcome run_simulation(const RunConfig& config, const fs::path& root, bool keep_trace) {
    const SimConfig sim = config.to_sim_config();
    SimulationOutcome out;
    out.manifest.run_id = make_run_id(config);
    out.manifest.scenario = scenario_for(config.mode);
    out.manifest.config_snapshot = format_config(config);

    const double lambda = config.mode == SimMode::open_loop ? 0.0 : sim.nonlinearity.lambda();
    KernelSet kernels = KernelSet::solve(lambda, sim.n, SolveOptions{sim.kernel_tol, sim.kernel_max_iter});

    std::optional<ClosedLoopTrace> trace;
    try {
        trace = simulate(sim, kernels);
    } catch (const BlowUpError& e) {
        out.blew_up = true;
        out.message = e.what();
        out.manifest.status = fmt::format("blow-up at t={}", e.time());
        if (e.partial_trace()) trace = *e.partial_trace();
    }

    out.directory = create_run_directory(root, out.manifest.run_id);
    auto emit = [&](const std::string& name, const std::string& content) {
        write_atomic(out.directory / name, content);
        out.manifest.outputs.push_back(name);
    };
    emit("config", out.manifest.config_snapshot);
    if (config.mode != SimMode::open_loop) {
        emit("kernel_k.csv", kernel_csv(kernels.k));
        emit("kernel_p.csv", kernel_csv(kernels.p));
    }
    if (trace && trace->frames() > 0) {
        std::vector<LyapunovSample> lyap;
        if (config.lyapunov && config.mode != SimMode::open_loop && trace->frames() >= 5)
            lyap = lyapunov_series(*trace, kernels);
        emit("trace.csv", trace_csv(*trace, config.trace_stride));
        emit("signals.csv", signals_csv(*trace, lyap));
        for (auto& name : render_plots(out.directory, config.plots)) out.manifest.outputs.push_back(name);
    }
    write_atomic(out.directory / "manifest.txt", format_manifest(out.manifest));

    if (keep_trace) {
        out.trace = std::move(trace);
        out.kernels = std::move(kernels);
    }
    return out;
}

std::vector<double> parse_range(std::string_view text) {
    auto number = [](std::string_view s) {
        const std::string str(s);
        char* end = nullptr;
        const double v = std::strtod(str.c_str(), &end);
        require(!str.empty() && end == str.c_str() + str.size() && std::isfinite(v),
                fmt::format("range: '{}' is not a number", s));
        return v;
    };
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return {number(text)};
    const auto c2 = text.find(':', c1 + 1);
    require(c2 != std::string_view::npos, fmt::format("range '{}' is not start:stop:step", text));
    const double start = number(text.substr(0, c1));
    const double stop = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    require(step > 0.0 && stop >= start, fmt::format("range '{}' needs step > 0 and stop >= start", text));
    std::vector<double> values;
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long k = 0; k <= count; ++k) values.push_back(start + static_cast<double>(k) * step);
    return values;
}

fs::path run_sweep(const RunConfig& base, const std::vector<double>& lambdas, SimMode mode, const fs::path& root,
                   unsigned threads, std::vector<SweepRow>* rows_out) {
    require(!lambdas.empty(), "sweep: no lambda values");
    // Validate every member up front so a bad value fails before any work starts.
    std::vector<RunConfig> configs;
    for (double lambda : lambdas) {
        RunConfig c = base;
        c.nonlinearity = "linear";
        c.lambda = lambda;
        c.mode = mode;
        c.to_sim_config();
        configs.push_back(std::move(c));
    }

    RunConfig id_source = base;
    id_source.mode = mode;
    std::string sweep_id = "sweep-" + make_run_id(id_source);
    const fs::path sweep_dir = create_run_directory(root, sweep_id);

    std::vector<SweepRow> rows(configs.size());
    std::atomic<std::size_t> next{0};
    const double predicted = 2.0 * std::numbers::pi * std::numbers::pi;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            SweepRow& row = rows[i];
            row.lambda = configs[i].lambda;
            row.predicted_rate = predicted;
            try {
                const auto outcome = run_simulation(configs[i], sweep_dir, true);
                row.run_dir = outcome.directory.filename().string();
                if (outcome.blew_up) {
                    row.status = outcome.manifest.status;
                    continue;
                }
                const auto& trace = *outcome.trace;
                std::vector<double> err, u;
                for (std::size_t k = 0; k < trace.frames(); ++k) {
                    const double e = norms(apply_transform(TransformKind::R, outcome.kernels->r, trace.u_tilde[k])).l2;
                    const double l = norms(trace.u[k]).l2;
                    err.push_back(e * e);
                    u.push_back(l * l);
                }
                row.u_rate = decay_rate_on(trace.times, u);
                if (mode != SimMode::open_loop) {
                    row.gamma_tilde_rate = decay_rate_on(trace.times, err);
                    row.relative_deviation = (row.gamma_tilde_rate - predicted) / predicted;
                } else {
                    row.gamma_tilde_rate = std::nan("");
                    row.relative_deviation = std::nan("");
                }
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::string csv = "lambda,run_dir,gamma_tilde_rate,predicted_rate,relative_deviation,u_rate,status\n";
    for (const auto& r : rows)
        csv += fmt::format("{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.lambda, r.run_dir, r.gamma_tilde_rate,
                           r.predicted_rate, r.relative_deviation, r.u_rate, r.status);
    write_atomic(sweep_dir / "summary.csv", csv);
    write_atomic(sweep_dir / "summary.svg",
                 [&] {
                     PlotSeries fitted{"fitted", {}, {}}, target{"2 pi^2", {}, {}};
                     for (const auto& r : rows) {
                         fitted.x.push_back(r.lambda);
                         fitted.y.push_back(r.gamma_tilde_rate);
                         target.x.push_back(r.lambda);
                         target.y.push_back(predicted);
                     }
                     return svg_line_plot("decay rate of |R[u_tilde]|^2 against lambda", "lambda", "rate",
                                          {fitted, target}, false);
                 }());
    RunManifest manifest;
    manifest.run_id = sweep_id;
    manifest.scenario = Scenario::sweep;
    manifest.config_snapshot = format_config(id_source);
    write_atomic(sweep_dir / "config", manifest.config_snapshot);
    manifest.outputs = {"config", "summary.csv", "summary.svg"};
    for (const auto& r : rows)
        if (!r.run_dir.empty()) manifest.outputs.push_back(r.run_dir + "/");
    for (const auto& r : rows)
        if (r.status != "ok") manifest.status = "partial";
    write_atomic(sweep_dir / "manifest.txt", format_manifest(manifest));
    if (rows_out) *rows_out = rows;
    return sweep_dir;
}

}  // namespace backstep
