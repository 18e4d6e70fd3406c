#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "backstep/errors.hpp"
#include "backstep/report.hpp"
#include "backstep/run.hpp"

using namespace backstep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

bool well_formed_svg(const std::string& svg) {
    if (svg.rfind("<svg", 0) != 0 || svg.find("</svg>\n") != svg.size() - 7) return false;
    long depth = 0;
    for (char c : svg) {
        if (c == '<') ++depth;
        if (c == '>') --depth;
        if (depth < 0 || depth > 1) return false;
    }
    return depth == 0;
}

RunConfig short_run() {
    RunConfig c = builtin_scenario("linear10");
    c.n = 32;
    c.dt = 1e-3;
    c.t_final = 0.02;
    c.trace_stride = 5;
    return c;
}

}  // namespace

TEST_CASE("atomic write replaces the file and leaves no temporary") {
    TempDir dir("backstep_report_atomic");
    const auto p = dir.path / "a.txt";
    write_atomic(p, "first");
    write_atomic(p, "second");
    CHECK(slurp(p) == "second");
    CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);
    CHECK_THROWS_AS(write_atomic(dir.path / "missing" / "b.txt", "x"), std::runtime_error);
}

TEST_CASE("kernel csv") {
    const auto k = solve_kernel(5.0, KernelKind::controller_k, TriangularGrid(16, Orientation::lower));
    const auto csv = kernel_csv(k);
    CHECK(csv.rfind("x,y,value\n0,0,0\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == k.grid().node_count() + 1);

    TempDir dir("backstep_report_kernel");
    write_atomic(dir.path / "k.csv", csv);
    const auto table = read_csv(dir.path / "k.csv");
    CHECK(table.column("value").back() == k(16, 16));  // 17 digits round-trip exactly
    CHECK_THROWS_AS(table.column("nope"), ContractError);
}

TEST_CASE("read_csv rejects ragged rows") {
    TempDir dir("backstep_report_ragged");
    write_atomic(dir.path / "r.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv(dir.path / "r.csv"), ContractError);
    write_atomic(dir.path / "e.csv", "");
    CHECK_THROWS_AS(read_csv(dir.path / "e.csv"), ContractError);
}

TEST_CASE("trace and signal csv layouts") {
    const auto sim = short_run().to_sim_config();
    const auto trace = simulate(sim);
    REQUIRE(trace.frames() == 21);

    const auto tcsv = trace_csv(trace, 7);
    // frames 0, 7, 14 and the last one (20)
    CHECK(std::count(tcsv.begin(), tcsv.end(), '\n') == 1 + 4 * 33);
    CHECK(tcsv.rfind("t,x,u,u_hat,u_tilde\n", 0) == 0);
    CHECK_THROWS_AS(trace_csv(trace, 0), ContractError);

    TempDir dir("backstep_report_signals");
    write_atomic(dir.path / "signals.csv", signals_csv(trace, {}));
    const auto table = read_csv(dir.path / "signals.csv");
    REQUIRE(table.header.size() == kSignalColumns.size());
    for (std::size_t c = 0; c < kSignalColumns.size(); ++c) CHECK(table.header[c] == kSignalColumns[c]);
    CHECK(table.column("t").size() == 21);
    CHECK(std::isnan(table.column("lyap_S").front()));
    CHECK(table.column("U_ctrl")[5] == trace.control[5]);
}

TEST_CASE("svg plots are well formed") {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(i * 0.1);
        y.push_back(std::exp(-i * 0.1));
    }
    CHECK(well_formed_svg(svg_line_plot("a < b & c", "t", "y", {{"decay", x, y}}, true)));
    CHECK(well_formed_svg(svg_line_plot("linear", "t", "y", {{"decay", x, y}}, false)));
    CHECK(well_formed_svg(svg_line_plot("empty", "t", "y", {{"none", {}, {}}}, true)));
    const std::vector<double> nans(3, std::nan(""));
    CHECK(svg_line_plot("nan", "t", "y", {{"nan", {0, 1, 2}, nans}}, true).find("no finite data") != std::string::npos);

    const std::vector<double> xs{0.0, 0.5, 1.0};
    const std::vector<std::vector<double>> rows{{0.0, 1.0, 0.0}, {0.0, -0.5, 0.0}};
    CHECK(well_formed_svg(svg_heatmap("u", {0.0, 0.1}, xs, rows)));
    CHECK_THROWS_AS(svg_heatmap("u", {0.0}, xs, rows), ContractError);
}

TEST_CASE("run ranges") {
    CHECK(parse_range("2:12:2") == std::vector<double>{2, 4, 6, 8, 10, 12});
    CHECK(parse_range("0:1:0.25").size() == 5);
    CHECK(parse_range("7") == std::vector<double>{7});
    CHECK_THROWS_AS(parse_range("1:0:1"), ContractError);
    CHECK_THROWS_AS(parse_range("1:2"), ContractError);
    CHECK_THROWS_AS(parse_range("a:b:c"), ContractError);
}

TEST_CASE("run directories never collide") {
    TempDir dir("backstep_run_dirs");
    std::string id = "same";
    const auto first = create_run_directory(dir.path, id);
    CHECK(id == "same");
    const auto second = create_run_directory(dir.path, id);
    CHECK(id == "same-2");
    CHECK(first != second);
}

TEST_CASE("output root honours the environment") {
    setenv("BACKSTEP_OUT", "/tmp/somewhere", 1);
    CHECK(output_root() == fs::path("/tmp/somewhere"));
    setenv("BACKSTEP_OUT", "", 1);
    CHECK(output_root() == fs::path("runs"));
    unsetenv("BACKSTEP_OUT");
}

TEST_CASE("a run writes every artifact and is reproducible") {
    TempDir dir("backstep_run_sim");
    const auto a = run_simulation(short_run(), dir.path, true);
    const auto b = run_simulation(short_run(), dir.path);
    REQUIRE_FALSE(a.blew_up);
    CHECK(a.directory != b.directory);
    CHECK(a.trace.has_value());
    CHECK_FALSE(b.trace.has_value());
    for (const char* name : {"config", "kernel_k.csv", "kernel_p.csv", "trace.csv", "signals.csv", "manifest.txt", "signal_l2_u.svg",
                             "signal_lyap_S.svg", "heatmap_u.svg", "heatmap_u_hat.svg", "heatmap_u_tilde.svg"}) {
        CAPTURE(name);
        CHECK(fs::exists(a.directory / name));
    }
    CHECK(slurp(a.directory / "trace.csv") == slurp(b.directory / "trace.csv"));
    CHECK(slurp(a.directory / "signals.csv") == slurp(b.directory / "signals.csv"));
    CHECK(slurp(a.directory / "kernel_k.csv") == slurp(b.directory / "kernel_k.csv"));
    CHECK(read_csv(a.directory / "kernel_p.csv").column("value").size() == TriangularGrid(32, Orientation::upper).node_count());
    CHECK(parse_config(slurp(a.directory / "config")) == short_run());

    const auto manifest = slurp(a.directory / "manifest.txt");
    CHECK(manifest.find("scenario = linear_closed_loop") != std::string::npos);
    CHECK(manifest.find("status = ok") != std::string::npos);
    CHECK(manifest.find("output = trace.csv") != std::string::npos);
    CHECK(well_formed_svg(slurp(a.directory / "heatmap_u_tilde.svg")));

    // plots regenerate from the CSVs alone
    fs::remove(a.directory / "signal_y.svg");
    const auto written = render_plots(a.directory, short_run().plots);
    CHECK(std::find(written.begin(), written.end(), "signal_y.svg") != written.end());
    CHECK(fs::exists(a.directory / "signal_y.svg"));
}

TEST_CASE("a blow-up keeps the partial artifacts") {
    TempDir dir("backstep_run_blowup");
    RunConfig c;
    c.n = 64;
    c.nonlinearity = "poly";
    c.coefficients = {1.0, 0.0, 50.0};
    c.initial_u = ProfileSpec::parse("sine:5");
    const auto out = run_simulation(c, dir.path);
    CHECK(out.blew_up);
    CHECK(out.manifest.status.rfind("blow-up at t=", 0) == 0);
    CHECK(fs::exists(out.directory / "trace.csv"));
    CHECK(slurp(out.directory / "manifest.txt").find("blow-up") != std::string::npos);
}

TEST_CASE("open-loop runs carry no kernels") {
    TempDir dir("backstep_run_open");
    RunConfig c = builtin_scenario("linear10-open");
    c.n = 32;
    c.dt = 1e-3;
    c.t_final = 0.01;
    const auto out = run_simulation(c, dir.path);
    CHECK_FALSE(fs::exists(out.directory / "kernel_k.csv"));
    CHECK(out.manifest.scenario == Scenario::open_loop);
    CHECK(std::isnan(read_csv(out.directory / "signals.csv").column("lyap_S").back()));
}

TEST_CASE("invalid run configs fail before any directory is made") {
    TempDir dir("backstep_run_invalid");
    RunConfig c;
    c.n = 8;
    CHECK_THROWS_AS(run_simulation(c, dir.path), ContractError);
    CHECK(fs::is_empty(dir.path));
    CHECK_THROWS_AS(run_sweep(c, {1.0, 2.0}, SimMode::linear_closed_loop, dir.path, 1), ContractError);
    CHECK(fs::is_empty(dir.path));
}

TEST_CASE("lambda sweep recovers the predicted error decay rate") {
    TempDir dir("backstep_run_sweep");
    RunConfig base = builtin_scenario("linear10");
    base.t_final = 0.3;
    base.lyapunov = false;
    base.trace_stride = 1000;
    std::vector<SweepRow> rows;
    const auto sweep = run_sweep(base, {4.0, 8.0, 12.0}, SimMode::linear_closed_loop, dir.path, 2, &rows);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CAPTURE(r.lambda);
        CHECK(r.status == "ok");
        CHECK(r.gamma_tilde_rate == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(0.01));
        CHECK(fs::exists(sweep / r.run_dir / "manifest.txt"));
    }
    const auto summary = read_csv(sweep / "summary.csv");
    CHECK(summary.column("lambda") == std::vector<double>{4.0, 8.0, 12.0});
    CHECK(fs::exists(sweep / "summary.svg"));
    CHECK(slurp(sweep / "manifest.txt").find("scenario = sweep") != std::string::npos);
}
