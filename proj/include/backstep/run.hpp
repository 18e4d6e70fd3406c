#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "backstep/config.hpp"
#include "backstep/simulate.hpp"

namespace backstep {

enum class Scenario { kernel_solve, open_loop, closed_loop, linear_closed_loop, verify_suite, sweep };

std::string_view to_string(Scenario scenario);
Scenario scenario_for(SimMode mode);

struct RunManifest {
    std::string run_id;
    Scenario scenario = Scenario::closed_loop;
    std::string config_snapshot;       // written verbatim as the run's `config` file
    std::vector<std::string> outputs;  // file names relative to the run directory
    std::string status = "ok";
};

std::string format_manifest(const RunManifest& manifest);

// $BACKSTEP_OUT when set and non-empty, else ./runs.
std::filesystem::path output_root();

/// Creates <root>/<run_id>, appending -2, -3, ... when the directory already
/// exists; `run_id` is updated to the name actually used.
std::filesystem::path create_run_directory(const std::filesystem::path& root, std::string& run_id);

struct SimulationOutcome {
    RunManifest manifest;
    std::filesystem::path directory;
    bool blew_up = false;
    std::string message;
    // Filled when requested (and on success or partial blow-up).
    std::optional<ClosedLoopTrace> trace;
    std::optional<KernelSet> kernels;
};

/// Validates the config, simulates, and writes config, the controller and
/// observer kernels (closed loop only), trace.csv, signals.csv, the
/// configured signal plots, the u / u_hat / u_tilde heat
/// maps and manifest.txt into a fresh run directory under `root`. A blow-up
/// keeps every artifact that could be produced from the partial trace and
/// is reported through `blew_up`, not by throwing.
SimulationOutcome run_simulation(const RunConfig& config, const std::filesystem::path& root,
                                 bool keep_trace = false);

/// Regenerates the SVG plots of an existing run directory from its CSV
/// files. Returns the names of the files written.
std::vector<std::string> render_plots(const std::filesystem::path& run_dir, const std::vector<PlotSpec>& plots);

struct SweepRow {
    double lambda = 0.0;
    std::string run_dir;
    double gamma_tilde_rate = 0.0;  // fitted rate of |R[u_tilde]|_2^2 on [0.05, 0.3]
    double predicted_rate = 0.0;    // 2 pi^2
    double relative_deviation = 0.0;
    double u_rate = 0.0;            // fitted rate of |u|_2^2 on [0.05, 0.3]
    std::string status = "ok";
};

/// One run per lambda (nonlinearity = linear) in `mode`, fanned out over
/// `threads` workers, each run in its own directory under a sweep directory
/// that also receives summary.csv. Returns the sweep directory.
std::filesystem::path run_sweep(const RunConfig& base, const std::vector<double>& lambdas, SimMode mode,
                                const std::filesystem::path& root, unsigned threads,
                                std::vector<SweepRow>* rows_out = nullptr);

// Parses "start:stop:step" (stop inclusive) or a single value.
std::vector<double> parse_range(std::string_view text);

}  // namespace backstep
