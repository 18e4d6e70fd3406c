#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "backstep/simulate.hpp"

namespace backstep {

/// Initial-profile recipe:
///   zero            the zero field
///   sine:a1,a2,...  sum_m a_m sin(m pi x)
///   random:amp      seeded_smooth_field(n, seed, amp)
struct ProfileSpec {
    enum class Kind { zero, sine, random };
    Kind kind = Kind::zero;
    std::vector<double> values;  // sine amplitudes, or {amp} for random

    static ProfileSpec parse(std::string_view text);
    std::string to_string() const;
    StateField sample(int n, std::uint64_t seed) const;

    bool operator==(const ProfileSpec&) const = default;
};

// Columns of signals.csv, in file order.
inline constexpr std::array<std::string_view, 11> kSignalColumns = {
    "t", "U_ctrl", "y", "l2_u", "sup_u", "l2_err", "h4_u", "lyap_U", "lyap_V", "lyap_W", "lyap_S"};

struct PlotSpec {
    std::string column;  // a signals.csv column
    bool log_scale = false;

    bool operator==(const PlotSpec&) const = default;
};

/// Every parameter of a run. The flat key/value text produced by
/// format_config() is the run's `config` snapshot; parse_config() of that
/// text gives back an identical RunConfig.
struct RunConfig {
    int n = 128;
    double dt = 1e-4;
    double t_final = 1.0;
    SimMode mode = SimMode::closed_loop;
    std::string nonlinearity = "fhn";   // fhn | fisher | linear | poly
    double lambda = 10.0;               // linear only
    std::vector<double> coefficients;   // poly only: c1, c2, ... of sum c_k u^k
    ProfileSpec initial_u{ProfileSpec::Kind::sine, {0.4}};
    ProfileSpec initial_u_hat{};
    std::uint64_t seed = 20240607;
    double kernel_tol = 1e-10;
    int kernel_max_iter = 200;
    int frame_stride = 0;
    int trace_stride = 50;  // frames between trace.csv snapshots
    bool lyapunov = true;
    std::vector<PlotSpec> plots = {{"l2_u", true},  {"sup_u", true},  {"l2_err", true},
                                   {"U_ctrl", false}, {"y", false},    {"lyap_S", true}};

    bool operator==(const RunConfig&) const = default;

    Nonlinearity make_nonlinearity() const;
    // Builds and validates the simulation config.
    SimConfig to_sim_config() const;
};

struct ConfigKeyDoc {
    std::string_view key;
    std::string_view default_value;
    std::string_view meaning;
};

// Schema with defaults, in snapshot order.
const std::vector<ConfigKeyDoc>& config_schema();

/// Parses `key = value` lines; '#' starts a comment. Keys absent from the
/// text keep their defaults. Unknown keys, duplicate keys and malformed
/// values raise ContractError naming the line and key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Applies one "key=value" override on top of an existing config.
void apply_override(RunConfig& config, std::string_view assignment);

std::string format_config(const RunConfig& config);

// Built-in scenarios: fhn-paper, linear10, linear10-open.
RunConfig builtin_scenario(std::string_view name);
std::vector<std::string_view> builtin_scenario_names();

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

// "<UTC timestamp>-<8 hex digits of the snapshot hash>".
std::string make_run_id(const RunConfig& config);

}  // namespace backstep
