#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "backstep/diagnostics.hpp"
#include "backstep/errors.hpp"
#include "backstep/simulate.hpp"

using namespace backstep;
using std::numbers::pi;

namespace {

StateField sine(int n, std::vector<double> modes) { return sine_series(n, modes); }

SimConfig linear_config(int n, double dt, double t_final, double lambda = 10.0) {
    SimConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = t_final;
    c.nonlinearity = Nonlinearity::linear(lambda);
    c.initial_u = sine(n, {1.0, 1.0});
    c.initial_u_hat = StateField(n);
    c.mode = SimMode::linear_closed_loop;
    return c;
}

SimConfig fhn_config(double amplitude) {
    SimConfig c;
    c.initial_u = sine(c.n, {amplitude});
    c.initial_u_hat = StateField(c.n);
    return c;
}

double sup_diff(const StateField& a, const StateField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sup_norm(const StateField& a) { return sup_diff(a, StateField(a.n())); }

// Smooth profile with u(1) = 0.3.
StateField smooth_with_end(int n) {
    auto u = StateField::from_function(n, [](double x) { return 0.3 * std::sin(0.5 * pi * x) + 0.2 * std::sin(3.0 * pi * x); });
    u[n] = 0.3;
    return u;
}

}  // namespace

TEST_CASE("boundary flux is exact for quadratics") {
    const auto v = StateField::from_function(32, [](double x) { return 3.0 * x * x - x; });
    CHECK(boundary_flux(v) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("Crank-Nicolson unit response carries the boundary value") {
    const CrankNicolson cn(64, 1e-3);
    const auto& b = cn.unit_right_response();
    CHECK(b.front() == 0.0);
    CHECK(b.back() == 1.0);
    for (std::size_t i = 1; i + 1 < b.size(); ++i) CHECK(b[i] >= -1e-12);
    CHECK_THROWS_AS(CrankNicolson(64, 0.0), ContractError);
}

TEST_CASE("plant step from rest stays at rest") {
    const StateField zero(64);
    CHECK(step_plant(zero, 0.0, Nonlinearity::fitzhugh_nagumo(), 1e-3) == zero);
}

TEST_CASE("heat equation mode decays at rate pi^2") {
    auto h = StateField::from_function(128, [](double x) { return std::sin(pi * x); });
    h[128] = 0.0;
    for (int k = 0; k < 100; ++k) h = step_plant(h, 0.0, Nonlinearity::zero(), 1e-3);
    CHECK(h[64] == doctest::Approx(std::exp(-pi * pi * 0.1)).epsilon(1e-3));
}

TEST_CASE("heat equation L2 norm at t = 0.1") {
    auto h = StateField::from_function(128, [](double x) { return std::sin(pi * x); });
    h[128] = 0.0;
    for (int k = 0; k < 1000; ++k) h = step_plant(h, 0.0, Nonlinearity::zero(), 1e-4);
    CHECK(norms(h).l2 == doctest::Approx(std::exp(-pi * pi * 0.1) / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("the equilibrium u = 1 is held with matching boundary data") {
    // FitzHugh-Nagumo vanishes at u = 1.
    auto u = StateField::from_function(64, [](double) { return 1.0; });
    const auto f = Nonlinearity::fitzhugh_nagumo();
    for (int k = 0; k < 1000; ++k) u = step_plant(u, BoundaryValues{1.0, 1.0}, f, 1e-3);
    double dev = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dev = std::max(dev, std::abs(u[i] - 1.0));
    CHECK(dev <= 1e-12);
}

TEST_CASE("observer step reduces to a plant step") {
    const int n = 128;
    const auto u = smooth_with_end(n);
    const auto f = Nonlinearity::linear(5.0);
    const auto gain = observer_gain(solve_kernel(5.0, KernelKind::observer_p, TriangularGrid(n, Orientation::upper)));

    SUBCASE("exactly with a zero gain") {
        GainVector zero_gain;
        zero_gain.samples.assign(n + 1, 0.0);
        CHECK(step_observer(u, 123.0, 0.3, zero_gain, f, 1e-4) == step_plant(u, 0.3, f, 1e-4));
    }
    SUBCASE("to second order in dt with zero estimation error") {
        auto gap = [&](double dt) {
            return sup_diff(step_observer(u, boundary_flux(u), 0.3, gain, f, dt), step_plant(u, 0.3, f, dt));
        };
        const double coarse = gap(1e-4);
        const double fine = gap(5e-5);
        CHECK(coarse <= 1e-5);
        CHECK(coarse / fine >= 3.0);
    }
    SUBCASE("contract errors") {
        auto wrong = gain;
        wrong.kind = GainKind::filtered_pbar;
        CHECK_THROWS_AS(step_observer(u, 0.0, 0.3, wrong, f, 1e-4), ContractError);
        CHECK_THROWS_AS(step_observer(StateField(64), 0.0, 0.0, gain, f, 1e-4), ContractError);
    }
}

TEST_CASE("zero data stays exactly zero in closed loop") {
    SimConfig c = fhn_config(0.0);
    c.t_final = 0.05;
    const auto trace = simulate(c);
    for (std::size_t k = 0; k < trace.frames(); ++k) {
        CHECK(sup_norm(trace.u[k]) == 0.0);
        CHECK(sup_norm(trace.u_hat[k]) == 0.0);
        CHECK(trace.control[k] == 0.0);
    }
}

TEST_CASE("open loop grows for lambda above pi^2") {
    SimConfig c = linear_config(128, 1e-4, 1.0);
    c.mode = SimMode::open_loop;
    c.initial_u = sine(128, {1.0});
    const auto trace = simulate(c);
    const double ratio = norms(trace.u.back()).l2 / norms(trace.u.front()).l2;
    CHECK(ratio == doctest::Approx(std::exp(10.0 - pi * pi)).epsilon(2e-3));
    for (double U : trace.control) CHECK(U == 0.0);
    for (const auto& uh : trace.u_hat) CHECK(sup_norm(uh) == 0.0);
}

TEST_CASE("closed loop stabilizes the unstable linear plant") {
    const auto trace = simulate(linear_config(128, 1e-4, 0.3));
    std::vector<double> err, u;
    for (std::size_t k = 0; k < trace.frames(); ++k) {
        err.push_back(norms(trace.u_tilde[k]).l2);
        u.push_back(norms(trace.u[k]).l2);
    }
    const auto fit = fit_decay(trace.times, err, 0.05, 0.3);
    CHECK(fit.rate >= 0.8 * pi * pi);
    CHECK(fit.r_squared >= 0.99);
    // The plant norm follows the cascaded error and settles more slowly.
    for (std::size_t k = 501; k < u.size(); ++k) REQUIRE(u[k] <= u[k - 1]);
    CHECK(u.back() < 0.3 * u.front());
    CHECK(trace_invariant_defect(trace) <= 1e-12);
}

TEST_CASE("FitzHugh-Nagumo closed loop converges") {
    const auto trace = simulate(fhn_config(0.4));
    CHECK(trace.frames() == 10001);
    CHECK(trace.times.back() == doctest::Approx(1.0));
    // regression values frozen from the reference build
    CHECK(sup_norm(trace.u.back()) == doctest::Approx(3.506e-6).epsilon(0.01));
    CHECK(trace_invariant_defect(trace) <= 1e-12);
}

TEST_CASE("FitzHugh-Nagumo closed loop from amplitude 3 still converges") {
    // u f_NL(u) = -u^2 (1-u)^2 <= 0, so large data is not expelled.
    const auto trace = simulate(fhn_config(3.0));
    CHECK(sup_norm(trace.u.back()) == doctest::Approx(2.775e-5).epsilon(0.01));
}

TEST_CASE("trace invariants") {
    SimConfig c = fhn_config(0.4);
    c.t_final = 0.01;
    c.initial_u_hat = sine(c.n, {0.1, 0.2});
    const auto trace = simulate(c);
    for (std::size_t k = 0; k < trace.frames(); ++k) {
        CHECK(trace.u[k].front() == 0.0);
        CHECK(trace.u_hat[k].front() == 0.0);
        CHECK(trace.u[k].back() == trace.control[k]);
        CHECK(trace.u_hat[k].back() == trace.control[k]);
        CHECK(trace.u_tilde[k] == trace.u[k] - trace.u_hat[k]);
        CHECK(trace.measurement[k] == boundary_flux(trace.u[k]));
    }
}

TEST_CASE("linear mode ignores the nonlinear remainder") {
    SimConfig a = linear_config(64, 1e-4, 0.02);
    a.mode = SimMode::closed_loop;
    SimConfig b = linear_config(64, 1e-4, 0.02);
    b.nonlinearity = Nonlinearity::polynomial({10.0, 3.0});
    const auto ta = simulate(a);
    const auto tb = simulate(b);
    REQUIRE(ta.frames() == tb.frames());
    for (std::size_t k = 0; k < ta.frames(); ++k) CHECK(ta.u[k] == tb.u[k]);
}

TEST_CASE("frame stride") {
    SimConfig c = linear_config(32, 1e-3, 0.1);
    c.frame_stride = 10;
    const auto trace = simulate(c);
    CHECK(trace.frames() == 11);
    CHECK(trace.frame_dt == doctest::Approx(1e-2));
    c.frame_stride = 0;
    CHECK(c.effective_stride() == 1);
    c.t_final = 30.0;
    CHECK(c.effective_stride() == 10);
}

TEST_CASE("refinement in time and space") {
    SUBCASE("second order in dt") {
        std::vector<StateField> r;
        for (double dt : {4e-4, 2e-4, 1e-4}) r.push_back(simulate(linear_config(64, dt, 0.1)).u.back());
        CHECK(sup_diff(r[0], r[1]) / sup_diff(r[1], r[2]) >= 3.0);
    }
    SUBCASE("second order in h") {
        std::vector<StateField> r;
        for (int n : {32, 64, 128}) r.push_back(simulate(linear_config(n, 1e-4, 0.1)).u.back());
        double d1 = 0.0, d2 = 0.0;
        for (int i = 0; i <= 32; ++i) {
            d1 = std::max(d1, std::abs(r[0][i] - r[1][2 * i]));
            d2 = std::max(d2, std::abs(r[1][2 * i] - r[2][4 * i]));
        }
        CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.25));
    }
}

TEST_CASE("large steps stay bounded for the built-in reaction terms") {
    for (int n : {128, 512}) {
        for (const auto& f : {Nonlinearity::fitzhugh_nagumo(), Nonlinearity::fisher()}) {
            for (auto mode : {SimMode::open_loop, SimMode::closed_loop}) {
                SimConfig c;
                c.n = n;
                c.dt = 0.5;
                c.t_final = 4.0;
                c.nonlinearity = f;
                c.mode = mode;
                c.initial_u = sine(n, {0.4});
                c.initial_u_hat = StateField(n);
                CAPTURE(n);
                CAPTURE(f.name());
                CAPTURE(to_string(mode));
                const auto trace = simulate(c);
                CHECK(sup_norm(trace.u.back()) < sup_norm(trace.u.front()));
            }
        }
    }
}

TEST_CASE("blow-up is reported with the partial trace") {
    SimConfig c;
    c.n = 64;
    c.nonlinearity = Nonlinearity::polynomial({1.0, 0.0, 50.0});
    c.initial_u = sine(64, {5.0});
    c.initial_u_hat = StateField(64);
    try {
        simulate(c);
        FAIL("expected BlowUpError");
    } catch (const BlowUpError& e) {
        CHECK(e.time() > 0.0);
        REQUIRE(e.partial_trace());
        CHECK(e.partial_trace()->frames() >= 1);
        CHECK(e.partial_trace()->times.back() <= e.time());
    }
}

TEST_CASE("invalid configurations name the offending field") {
    auto message = [](SimConfig c) -> std::string {
        try {
            c.validate();
        } catch (const ContractError& e) {
            return e.what();
        }
        return "";
    };
    const SimConfig good = linear_config(32, 1e-3, 0.1);
    CHECK(message(good).empty());

    SimConfig c = good;
    c.n = 8;
    CHECK(message(c).rfind("n:", 0) == 0);
    c = good;
    c.dt = 0.0;
    CHECK(message(c).rfind("dt:", 0) == 0);
    c = good;
    c.t_final = 0.1005;
    CHECK(message(c).rfind("t_final:", 0) == 0);
    c = good;
    c.initial_u = sine(64, {1.0});
    CHECK(message(c).rfind("initial_u:", 0) == 0);
    c = good;
    c.initial_u[0] = 0.5;
    CHECK(message(c).rfind("initial_u:", 0) == 0);
    c = good;
    c.nonlinearity = Nonlinearity::zero();
    CHECK(message(c).rfind("nonlinearity:", 0) == 0);
    c = good;
    c.initial_u[32] = 0.2;  // closed loop needs u(1) = u_hat(1)
    CHECK_FALSE(message(c).empty());
    c.mode = SimMode::open_loop;
    CHECK(message(c).rfind("initial_u:", 0) == 0);

    CHECK_THROWS_AS(simulate(good, KernelSet::solve(5.0, 32)), ContractError);
    CHECK_THROWS_AS(simulate(good, KernelSet::solve(10.0, 64)), ContractError);
    CHECK_THROWS_AS(sim_mode_from_string("sideways"), ContractError);
    CHECK(sim_mode_from_string("linear_closed_loop") == SimMode::linear_closed_loop);
}
