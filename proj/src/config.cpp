#include "backstep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "backstep/errors.hpp"

namespace backstep {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    require(ec == std::errc() && ptr == end && std::isfinite(v),
            fmt::format("{}: '{}' is not a finite number", key, text));
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
    Int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    require(ec == std::errc() && ptr == end, fmt::format("{}: '{}' is not an integer", key, text));
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ContractError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    if (text.empty()) return out;
    for (auto part : split(text, ',')) out.push_back(parse_double(key, part));
    return out;
}

std::string format_list(const std::vector<double>& values) {
    return fmt::format("{}", fmt::join(values, ","));
}

using Setter = void (*)(RunConfig&, std::string_view);
using Getter = std::string (*)(const RunConfig&);

struct Field {
    std::string_view key;
    std::string_view meaning;
    Setter set;
    Getter get;
};

// Shortest round-trip representation ("{}") keeps snapshots exact.
const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"n", "spatial subdivisions (>= 16)",
         [](RunConfig& c, std::string_view v) { c.n = parse_int<int>("n", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.n); }},
        {"dt", "time step",
         [](RunConfig& c, std::string_view v) { c.dt = parse_double("dt", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.dt); }},
        {"t_final", "horizon, a multiple of dt",
         [](RunConfig& c, std::string_view v) { c.t_final = parse_double("t_final", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.t_final); }},
        {"mode", "open_loop | closed_loop | linear_closed_loop",
         [](RunConfig& c, std::string_view v) {
             try {
                 c.mode = sim_mode_from_string(v);
             } catch (const ContractError& e) {
                 throw ContractError(std::string("mode: ") + e.what());
             }
         },
         [](const RunConfig& c) { return std::string(to_string(c.mode)); }},
        {"nonlinearity", "fhn | fisher | linear | poly",
         [](RunConfig& c, std::string_view v) {
             require(v == "fhn" || v == "fisher" || v == "linear" || v == "poly",
                     fmt::format("nonlinearity: unknown '{}' (expected fhn, fisher, linear or poly)", v));
             c.nonlinearity = std::string(v);
         },
         [](const RunConfig& c) { return c.nonlinearity; }},
        {"lambda", "reaction coefficient of nonlinearity=linear",
         [](RunConfig& c, std::string_view v) { c.lambda = parse_double("lambda", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.lambda); }},
        {"coefficients", "c1,c2,... of nonlinearity=poly (sum c_k u^k)",
         [](RunConfig& c, std::string_view v) { c.coefficients = parse_list("coefficients", v); },
         [](const RunConfig& c) { return format_list(c.coefficients); }},
        {"initial_u", "zero | sine:a1,a2,... | random:amp",
         [](RunConfig& c, std::string_view v) {
             try {
                 c.initial_u = ProfileSpec::parse(v);
             } catch (const ContractError& e) {
                 throw ContractError(std::string("initial_u: ") + e.what());
             }
         },
         [](const RunConfig& c) { return c.initial_u.to_string(); }},
        {"initial_u_hat", "zero | sine:a1,a2,... | random:amp",
         [](RunConfig& c, std::string_view v) {
             try {
                 c.initial_u_hat = ProfileSpec::parse(v);
             } catch (const ContractError& e) {
                 throw ContractError(std::string("initial_u_hat: ") + e.what());
             }
         },
         [](const RunConfig& c) { return c.initial_u_hat.to_string(); }},
        {"seed", "seed of random:amp profiles",
         [](RunConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("seed", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.seed); }},
        {"kernel_tol", "successive-approximation tolerance",
         [](RunConfig& c, std::string_view v) { c.kernel_tol = parse_double("kernel_tol", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.kernel_tol); }},
        {"kernel_max_iter", "successive-approximation iteration cap",
         [](RunConfig& c, std::string_view v) { c.kernel_max_iter = parse_int<int>("kernel_max_iter", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.kernel_max_iter); }},
        {"frame_stride", "steps between stored frames (0 = automatic)",
         [](RunConfig& c, std::string_view v) { c.frame_stride = parse_int<int>("frame_stride", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.frame_stride); }},
        {"trace_stride", "stored frames between trace.csv snapshots",
         [](RunConfig& c, std::string_view v) { c.trace_stride = parse_int<int>("trace_stride", v); },
         [](const RunConfig& c) { return fmt::format("{}", c.trace_stride); }},
        {"lyapunov", "compute lyap_* columns (true | false)",
         [](RunConfig& c, std::string_view v) { c.lyapunov = parse_bool("lyapunov", v); },
         [](const RunConfig& c) { return std::string(c.lyapunov ? "true" : "false"); }},
        {"plots", "signals to plot: column[:log],...",
         [](RunConfig& c, std::string_view v) {
             c.plots.clear();
             if (v.empty()) return;
             for (auto item : split(v, ',')) {
                 PlotSpec p;
                 auto colon = item.find(':');
                 p.column = std::string(trim(item.substr(0, colon)));
                 if (colon != std::string_view::npos) {
                     require(trim(item.substr(colon + 1)) == "log",
                             fmt::format("plots: unknown option in '{}' (only ':log')", item));
                     p.log_scale = true;
                 }
                 require(std::find(kSignalColumns.begin() + 1, kSignalColumns.end(), p.column) !=
                             kSignalColumns.end(),
                         fmt::format("plots: '{}' is not a signals.csv column", p.column));
                 c.plots.push_back(std::move(p));
             }
         },
         [](const RunConfig& c) {
             std::string out;
             for (std::size_t i = 0; i < c.plots.size(); ++i) {
                 if (i) out += ',';
                 out += c.plots[i].column;
                 if (c.plots[i].log_scale) out += ":log";
             }
             return out;
         }},
    };
    return table;
}

const Field& find_field(std::string_view key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ContractError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

ProfileSpec ProfileSpec::parse(std::string_view text) {
    text = trim(text);
    ProfileSpec p;
    if (text == "zero") return p;
    const auto colon = text.find(':');
    require(colon != std::string_view::npos,
            fmt::format("profile '{}' is not zero, sine:a1,... or random:amp", text));
    const auto head = trim(text.substr(0, colon));
    const auto body = trim(text.substr(colon + 1));
    if (head == "sine") {
        p.kind = Kind::sine;
        p.values = parse_list("sine", body);
        require(!p.values.empty(), "sine: at least one amplitude is required");
    } else if (head == "random") {
        p.kind = Kind::random;
        p.values = {parse_double("random", body)};
    } else {
        throw ContractError(fmt::format("unknown profile kind '{}'", head));
    }
    return p;
}

std::string ProfileSpec::to_string() const {
    switch (kind) {
        case Kind::zero: return "zero";
        case Kind::sine: return "sine:" + format_list(values);
        case Kind::random: return "random:" + format_list(values);
    }
    return "zero";
}

StateField ProfileSpec::sample(int n, std::uint64_t seed) const {
    switch (kind) {
        case Kind::zero: return StateField(n);
        case Kind::sine: return sine_series(n, values);
        case Kind::random: return seeded_smooth_field(n, seed, values.at(0));
    }
    return StateField(n);
}

Nonlinearity RunConfig::make_nonlinearity() const {
    if (nonlinearity == "fhn") return Nonlinearity::fitzhugh_nagumo();
    if (nonlinearity == "fisher") return Nonlinearity::fisher();
    if (nonlinearity == "linear") {
        require(lambda != 0.0, "lambda: must be nonzero");
        return Nonlinearity::linear(lambda);
    }
    if (nonlinearity == "poly") {
        try {
            return Nonlinearity::polynomial(coefficients);
        } catch (const ContractError& e) {
            throw ContractError(std::string("coefficients: ") + e.what());
        }
    }
    throw ContractError(fmt::format("nonlinearity: unknown '{}'", nonlinearity));
}

SimConfig RunConfig::to_sim_config() const {
    require(n >= 16, "n: must be >= 16");
    require(trace_stride >= 1, "trace_stride: must be >= 1");
    SimConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = t_final;
    c.nonlinearity = make_nonlinearity();
    c.initial_u = initial_u.sample(n, seed);
    c.initial_u_hat = initial_u_hat.sample(n, seed);
    c.mode = mode;
    c.kernel_tol = kernel_tol;
    c.kernel_max_iter = kernel_max_iter;
    c.frame_stride = frame_stride;
    c.validate();
    return c;
}

const std::vector<ConfigKeyDoc>& config_schema() {
    static const std::vector<ConfigKeyDoc> docs = [] {
        static const RunConfig defaults;
        static std::vector<std::string> values;
        for (const auto& f : fields()) values.push_back(f.get(defaults));
        std::vector<ConfigKeyDoc> out;
        for (std::size_t i = 0; i < fields().size(); ++i)
            out.push_back({fields()[i].key, values[i], fields()[i].meaning});
        return out;
    }();
    return docs;
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string_view::npos, fmt::format("line {}: expected key = value", line_no));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const Field* field = nullptr;
        try {
            field = &find_field(key);
        } catch (const ContractError& e) {
            throw ContractError(fmt::format("line {}: {}", line_no, e.what()));
        }
        require(!seen.contains(key),
                fmt::format("line {}: key '{}' already set on line {}", line_no, key, seen.find(key)->second));
        seen.emplace(std::string(key), line_no);
        try {
            field->set(config, value);
        } catch (const ContractError& e) {
            throw ContractError(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    require(eq != std::string_view::npos,
            fmt::format("override '{}' is not of the form key=value", assignment));
    find_field(trim(assignment.substr(0, eq))).set(config, trim(assignment.substr(eq + 1)));
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) out += fmt::format("{} = {}\n", f.key, f.get(config));
    return out;
}

RunConfig builtin_scenario(std::string_view name) {
    RunConfig c;
    if (name == "fhn-paper") return c;
    if (name == "linear10" || name == "linear10-open") {
        c.nonlinearity = "linear";
        c.lambda = 10.0;
        c.mode = name == "linear10" ? SimMode::linear_closed_loop : SimMode::open_loop;
        c.initial_u = name == "linear10" ? ProfileSpec{ProfileSpec::Kind::sine, {1.0, 1.0}}
                                         : ProfileSpec{ProfileSpec::Kind::sine, {1.0}};
        return c;
    }
    throw ContractError(fmt::format("unknown scenario '{}' (expected fhn-paper, linear10 or linear10-open)", name));
}

std::vector<std::string_view> builtin_scenario_names() { return {"fhn-paper", "linear10", "linear10-open"}; }

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string make_run_id(const RunConfig& config) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    return fmt::format("{}-{:08x}", stamp, fnv1a(format_config(config)) & 0xffffffffULL);
}

}  // namespace backstep
