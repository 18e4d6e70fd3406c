// Command-line front end: kernel dumps, simulation runs, the acceptance
// suite, lambda sweeps and plot regeneration.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "backstep/acceptance.hpp"
#include "backstep/config.hpp"
#include "backstep/diagnostics.hpp"
#include "backstep/errors.hpp"
#include "backstep/kernel.hpp"
#include "backstep/report.hpp"
#include "backstep/run.hpp"

namespace fs = std::filesystem;
using namespace backstep;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowUp = 3;

struct ConfigOptions {
    std::string scenario;
    std::string config_path;
    std::vector<std::string> overrides;
    long long seed = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scenario", scenario, "built-in scenario: fhn-paper, linear10, linear10-open");
        cmd->add_option("--config", config_path, "key = value config file (see --show-schema)");
        cmd->add_option("--set", overrides, "override one key, e.g. --set t_final=2 (repeatable)");
        cmd->add_option("--seed", seed, "seed for random:amp initial profiles");
    }

    // Without --scenario or --config the run starts from `fallback`.
    RunConfig build(std::string_view fallback = "fhn-paper") const {
        if (!scenario.empty() && !config_path.empty())
            throw ContractError("--scenario and --config are mutually exclusive");
        RunConfig c = !config_path.empty() ? load_config(config_path)
                      : !scenario.empty()  ? builtin_scenario(scenario)
                                           : builtin_scenario(fallback);
        for (const auto& o : overrides) apply_override(c, o);
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        return c;
    }
};

fs::path resolve_root(const std::string& out_root) { return out_root.empty() ? output_root() : fs::path(out_root); }

void print_schema() {
    std::size_t wk = 3, wd = 7;
    for (const auto& k : config_schema()) {
        wk = std::max(wk, k.key.size());
        wd = std::max(wd, k.default_value.size());
    }
    std::cout << fmt::format("{:<{}}  {:<{}}  {}\n", "key", wk, "default", wd, "meaning");
    for (const auto& k : config_schema())
        std::cout << fmt::format("{:<{}}  {:<{}}  {}\n", k.key, wk, k.default_value, wd, k.meaning);
}

int cmd_solve_kernel(double lambda, const std::string& kind_text, int n, const std::string& out, double tol,
                     int max_iter) {
    if (kind_text.size() != 1) throw ContractError("--kind must be one of k, l, p, r");
    const KernelKind kind = kernel_kind_from_letter(kind_text[0]);
    const TriangularGrid grid(n, orientation_of(kind));
    const auto field = solve_kernel(lambda, kind, grid, SolveOptions{tol, max_iter});
    const fs::path path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_atomic(path, kernel_csv(field));
    std::cout << fmt::format("{} lambda={:g} n={} -> {}\n", to_string(kind), lambda, n, path.string());
    if (n >= 4) {
        const auto res = kernel_residual(field);
        std::cout << fmt::format("residual: interior {:.3e}, edge {:.3e}, diagonal {:.3e}\n", res.interior_sup,
                                 res.boundary_sup, res.diagonal_sup);
    }
    return 0;
}

int cmd_simulate(const ConfigOptions& opts, const std::string& out_root, bool print_only) {
    const RunConfig config = opts.build();
    if (print_only) {
        std::cout << format_config(config);
        return 0;
    }
    const auto outcome = run_simulation(config, resolve_root(out_root));
    std::cout << fmt::format("run {} ({}) -> {}\n", outcome.manifest.run_id, to_string(outcome.manifest.scenario),
                             outcome.directory.string());
    for (const auto& o : outcome.manifest.outputs) std::cout << "  " << o << '\n';
    if (outcome.blew_up) {
        std::cerr << "blow-up: " << outcome.message << " (partial artifacts kept)\n";
        return kExitBlowUp;
    }
    return 0;
}

int cmd_verify(const std::string& out_root) {
    RunManifest manifest;
    manifest.scenario = Scenario::verify_suite;
    const RunConfig defaults;
    manifest.run_id = "verify-" + make_run_id(defaults);
    std::string report;
    const auto results = run_acceptance([&](const CriterionResult& r) {
        const auto line = format_result(r);
        std::cout << line << std::endl;
        report += line + '\n';
    });
    int passed = 0;
    for (const auto& r : results) passed += r.passed ? 1 : 0;
    const auto summary = fmt::format("{}/{} criteria passed", passed, results.size());
    std::cout << summary << '\n';
    report += summary + '\n';

    const fs::path dir = create_run_directory(resolve_root(out_root), manifest.run_id);
    manifest.config_snapshot = format_config(defaults);
    write_atomic(dir / "config", manifest.config_snapshot);
    write_atomic(dir / "acceptance.txt", report);
    manifest.outputs = {"config", "acceptance.txt"};
    manifest.status = passed == static_cast<int>(results.size()) ? "ok" : "failed";
    write_atomic(dir / "manifest.txt", format_manifest(manifest));
    return passed == static_cast<int>(results.size()) ? 0 : kExitFailure;
}

int cmd_sweep(const ConfigOptions& opts, const std::string& range, const std::string& mode_text, unsigned threads,
              const std::string& out_root) {
    const RunConfig base = opts.build("linear10");
    const SimMode mode = sim_mode_from_string(mode_text);
    const auto lambdas = parse_range(range);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> rows;
    const auto dir = run_sweep(base, lambdas, mode, resolve_root(out_root), threads, &rows);
    std::cout << fmt::format("sweep -> {}\n", dir.string());
    std::cout << "lambda  gamma_tilde_rate  2pi^2     deviation  status\n";
    bool ok = true;
    for (const auto& r : rows) {
        std::cout << fmt::format("{:<7g} {:<17.4f} {:<9.4f} {:>+8.3f}%  {}\n", r.lambda, r.gamma_tilde_rate,
                                 r.predicted_rate, 100.0 * r.relative_deviation, r.status);
        ok = ok && r.status == "ok";
    }
    return ok ? 0 : kExitBlowUp;
}

int cmd_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    if (!fs::is_directory(dir)) throw ContractError("report: '" + run_dir + "' is not a directory");
    const RunConfig config = load_config((dir / "config").string());
    for (const auto& name : render_plots(dir, config.plots)) std::cout << "wrote " << (dir / name).string() << '\n';

    const fs::path signals_path = dir / "signals.csv";
    if (!fs::exists(signals_path)) return 0;
    const CsvTable signals = read_csv(signals_path);
    const auto& t = signals.column("t");
    if (t.empty()) return 0;
    std::cout << fmt::format("frames {}, t in [{:g}, {:g}]\n", t.size(), t.front(), t.back());
    for (std::string_view col : {"l2_u", "sup_u", "l2_err", "lyap_S"}) {
        const auto& v = signals.column(col);
        std::string line = fmt::format("{:<7} start {:.4e} end {:.4e}", col, v.front(), v.back());
        try {
            const auto fit = fit_decay(t, v, std::min(0.05, t.back()), t.back());
            line += fmt::format("  decay rate {:.4f} (r2 {:.5f}) on [{:g}, {:g}]", fit.rate, fit.r_squared,
                                std::min(0.05, t.back()), t.back());
        } catch (const ContractError&) {
            line += "  (no decay fit: nonpositive, absent or too few values)";
        }
        std::cout << line << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Backstepping output-feedback boundary stabilization of 1-D semilinear parabolic PDEs"};
    app.require_subcommand(1);
    std::string out_root;
    app.add_option("--out-root", out_root, "output root for run directories (default: $BACKSTEP_OUT or ./runs)");

    auto* solve = app.add_subcommand("solve-kernel", "solve one kernel and dump it as x,y,value CSV");
    double lambda = 0.0;
    std::string kind;
    int n = 128;
    std::string out;
    double tol = 1e-10;
    int max_iter = 200;
    solve->add_option("--lambda", lambda, "reaction coefficient")->required();
    solve->add_option("--kind", kind, "k, l, p or r")->required();
    solve->add_option("--n", n, "grid subdivisions")->check(CLI::PositiveNumber);
    solve->add_option("--out", out, "CSV path")->required();
    solve->add_option("--tol", tol, "successive-approximation tolerance");
    solve->add_option("--max-iter", max_iter, "iteration cap");

    auto* sim = app.add_subcommand("simulate", "run one simulation into a fresh run directory");
    ConfigOptions sim_opts;
    sim_opts.attach(sim);
    bool print_config = false;
    bool show_schema = false;
    sim->add_flag("--print-config", print_config, "print the resolved config snapshot and exit");
    sim->add_flag("--show-schema", show_schema, "print config keys with defaults and exit");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite; exit 0 iff every criterion passes");

    auto* sweep = app.add_subcommand("sweep", "one run per lambda plus summary.csv of fitted decay rates");
    ConfigOptions sweep_opts;
    sweep_opts.attach(sweep);
    std::string range;
    std::string mode = "linear_closed_loop";
    unsigned threads = 0;
    sweep->add_option("--lambda", range, "start:stop:step (stop inclusive) or a single value")->required();
    sweep->add_option("--mode", mode, "open_loop, closed_loop or linear_closed_loop");
    sweep->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");

    auto* report = app.add_subcommand("report", "regenerate plots of a run directory and summarize its signals");
    std::string run_dir;
    report->add_option("run_dir", run_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve_kernel(lambda, kind, n, out, tol, max_iter);
        if (*sim) {
            if (show_schema) {
                print_schema();
                return 0;
            }
            return cmd_simulate(sim_opts, out_root, print_config);
        }
        if (*verify) return cmd_verify(out_root);
        if (*sweep) return cmd_sweep(sweep_opts, range, mode, threads, out_root);
        if (*report) return cmd_report(run_dir);
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
