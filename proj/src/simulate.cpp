#include "backstep/simulate.hpp"

#include <cmath>
#include <sstream>

#include "backstep/errors.hpp"
#include "backstep/volterra.hpp"

namespace backstep {

CrankNicolson::CrankNicolson(int n, double dt) : n_(n), dt_(dt), r_(dt * n * n) {
    require(n >= 2, "CrankNicolson: n must be >= 2");
    require(dt > 0.0 && std::isfinite(dt), "CrankNicolson: dt must be positive");
    const int m = n - 1;
    const double diag = 1.0 + r_;
    const double off = -0.5 * r_;
    c_prime_.resize(m);
    inv_denom_.resize(m);
    double prev_c = 0.0;
    for (int k = 0; k < m; ++k) {
        const double denom = diag - off * prev_c;
        inv_denom_[k] = 1.0 / denom;
        c_prime_[k] = off / denom;
        prev_c = c_prime_[k];
    }

    const StateField zero(n);
    const std::vector<double> no_source(static_cast<std::size_t>(n) + 1, 0.0);
    right_response_ = advance(zero, {0.0, 1.0}, no_source);
}

void CrankNicolson::solve_in_place(std::vector<double>& d) const {
    const double off = -0.5 * r_;
    const std::size_t m = d.size();
    d[0] *= inv_denom_[0];
    for (std::size_t k = 1; k < m; ++k) d[k] = (d[k] - off * d[k - 1]) * inv_denom_[k];
    for (std::size_t k = m - 1; k-- > 0;) d[k] -= c_prime_[k] * d[k + 1];
}

StateField CrankNicolson::advance(const StateField& v, BoundaryValues next,
                                  std::span<const double> source) const {
    const int n = n_;
    const double half_r = 0.5 * r_;
    std::vector<double> rhs(static_cast<std::size_t>(n) - 1);
    for (int i = 1; i < n; ++i)
        rhs[i - 1] = v[i] + half_r * (v[i + 1] - 2.0 * v[i] + v[i - 1]) + dt_ * source[i];
    rhs.front() += half_r * next.left;
    rhs.back() += half_r * next.right;
    solve_in_place(rhs);

    StateField out(n);
    out[0] = next.left;
    out[n] = next.right;
    for (int i = 1; i < n; ++i) out[i] = rhs[i - 1];
    return out;
}

double boundary_flux(const StateField& v) {
    const int n = v.n();
    require(n >= 2, "boundary_flux: need n >= 2");
    return (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) * (0.5 * n);
}

namespace {

std::string blow_up_message(double time) {
    std::ostringstream os;
    os << "state became non-finite in the step starting at t=" << time;
    return os.str();
}

void check_finite(const StateField& v, double t) {
    if (!v.all_finite()) throw BlowUpError(t);
}

std::vector<double> reaction(const StateField& v, const Nonlinearity& f) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
    return out;
}

// f(v) + gain (y - v_x(1))
std::vector<double> observer_source(const StateField& v, double y, const GainVector& gain,
                                    const Nonlinearity& f) {
    auto out = reaction(v, f);
    const double innovation = y - boundary_flux(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += gain.samples[i] * innovation;
    return out;
}

std::vector<double> average(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
    return out;
}

// Heun (explicit trapezoid) on the source, Crank-Nicolson on diffusion.
// `close` maps the advance-with-zero-ends result to the final field.
template <class Source, class Close>
StateField heun_step(const CrankNicolson& cn, const StateField& v, Source&& source, Close&& close) {
    const auto s0 = source(v);
    const StateField predicted = close(cn.advance(v, {}, s0));
    const auto s1 = source(predicted);
    return close(cn.advance(v, {}, average(s0, s1)));
}

StateField with_ends(StateField a, const CrankNicolson& cn, BoundaryValues ends) {
    const StateField& right = cn.unit_right_response();
    const int n = a.n();
    for (int i = 0; i <= n; ++i) {
        // Left response is the mirror image of the right one.
        a[i] += ends.right * right[i] + ends.left * right[n - i];
    }
    return a;
}

// Observer closure imposing u_hat(1) = sum_j w_j u_hat_j exactly.
struct FeedbackClosure {
    const CrankNicolson& cn;
    const std::vector<double>& weights;
    double response_gain;  // sum_j w_j b_j
    double* control_out;

    StateField operator()(StateField a) const {
        double wa = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) wa += weights[j] * a[j];
        const double U = wa / (1.0 - response_gain);
        *control_out = U;
        return with_ends(std::move(a), cn, {0.0, U});
    }
};

}  // namespace

BlowUpError::BlowUpError(double time, std::shared_ptr<const ClosedLoopTrace> partial)
    : std::runtime_error(blow_up_message(time)), time_(time), partial_(std::move(partial)) {}

StateField step_plant(const StateField& u, BoundaryValues next, const Nonlinearity& f, double dt,
                      double t) {
    const CrankNicolson cn(u.n(), dt);
    auto out = heun_step(
        cn, u, [&](const StateField& v) { return reaction(v, f); },
        [&](StateField a) { return with_ends(std::move(a), cn, next); });
    check_finite(out, t);
    return out;
}

StateField step_plant(const StateField& u, double U, const Nonlinearity& f, double dt, double t) {
    return step_plant(u, BoundaryValues{0.0, U}, f, dt, t);
}

StateField step_observer(const StateField& u_hat, double y, double U, const GainVector& gain,
                         const Nonlinearity& f, double dt, double t) {
    require(gain.kind == GainKind::raw_p, "step_observer: expected a raw_p gain");
    require(gain.n() == u_hat.n(), "step_observer: gain resolution mismatch");
    const CrankNicolson cn(u_hat.n(), dt);
    auto out = heun_step(
        cn, u_hat, [&](const StateField& v) { return observer_source(v, y, gain, f); },
        [&](StateField a) { return with_ends(std::move(a), cn, {0.0, U}); });
    check_finite(out, t);
    return out;
}

std::string_view to_string(SimMode mode) {
    switch (mode) {
        case SimMode::open_loop: return "open_loop";
        case SimMode::closed_loop: return "closed_loop";
        case SimMode::linear_closed_loop: return "linear_closed_loop";
    }
    return "unknown";
}

SimMode sim_mode_from_string(std::string_view s) {
    if (s == "open_loop") return SimMode::open_loop;
    if (s == "closed_loop") return SimMode::closed_loop;
    if (s == "linear_closed_loop") return SimMode::linear_closed_loop;
    throw ContractError("unknown mode '" + std::string(s) +
                        "' (expected open_loop, closed_loop or linear_closed_loop)");
}

long long SimConfig::step_count() const { return std::llround(t_final / dt); }

int SimConfig::effective_stride() const {
    if (frame_stride > 0) return frame_stride;
    return step_count() <= 20000 ? 1 : 10;
}

void SimConfig::validate() const {
    require(n >= 16, "n: must be >= 16");
    require(std::isfinite(dt) && dt > 0.0, "dt: must be positive");
    require(std::isfinite(t_final) && t_final >= dt, "t_final: must be >= dt");
    require(std::abs(static_cast<double>(step_count()) * dt - t_final) <= 1e-9 * t_final,
            "t_final: must be an integer multiple of dt");
    require(kernel_tol > 0.0, "kernel_tol: must be positive");
    require(kernel_max_iter > 0, "kernel_max_iter: must be positive");
    require(frame_stride >= 0, "frame_stride: must be >= 0");
    require(initial_u.n() == n, "initial_u: resolution does not match n");
    require(initial_u_hat.n() == n, "initial_u_hat: resolution does not match n");
    require(initial_u.all_finite(), "initial_u: non-finite sample");
    require(initial_u_hat.all_finite(), "initial_u_hat: non-finite sample");
    require(initial_u.front() == 0.0, "initial_u: must vanish at x=0");
    require(initial_u_hat.front() == 0.0, "initial_u_hat: must vanish at x=0");
    if (mode == SimMode::open_loop) {
        require(initial_u.back() == 0.0, "initial_u: open loop holds u(1)=0");
    } else {
        require(nonlinearity.lambda() != 0.0, "nonlinearity: closed loop requires lambda != 0");
        require(initial_u.back() == initial_u_hat.back(),
                "initial_u/initial_u_hat: must agree at x=1 (shared actuated boundary)");
    }
}

KernelSet KernelSet::solve(double lambda, int n, SolveOptions options) {
    const TriangularGrid lower(n, Orientation::lower);
    const TriangularGrid upper(n, Orientation::upper);
    return KernelSet{solve_kernel(lambda, KernelKind::controller_k, lower, options),
                     solve_kernel(lambda, KernelKind::inverse_l, lower, options),
                     solve_kernel(lambda, KernelKind::observer_p, upper, options),
                     solve_kernel(lambda, KernelKind::inverse_r, upper, options)};
}

ClosedLoopTrace simulate(const SimConfig& config) {
    config.validate();
    // Open loop runs no controller; zero kernels keep a single code path.
    const double lambda = config.mode == SimMode::open_loop ? 0.0 : config.nonlinearity.lambda();
    return simulate(config, KernelSet::solve(lambda, config.n,
                                             SolveOptions{config.kernel_tol, config.kernel_max_iter}));
}

ClosedLoopTrace simulate(const SimConfig& config, const KernelSet& kernels) {
    config.validate();
    const int n = config.n;
    const bool closed = config.mode != SimMode::open_loop;
    if (closed) {
        require(kernels.k.n() == n && kernels.p.n() == n, "simulate: kernel resolution mismatch");
        require(kernels.k.lambda() == config.nonlinearity.lambda(),
                "simulate: kernels solved for a different lambda");
    }

    const Nonlinearity f = config.mode == SimMode::linear_closed_loop
                               ? config.nonlinearity.linearized()
                               : config.nonlinearity;
    const CrankNicolson cn(n, config.dt);
    const double dt = config.dt;
    const long long steps = config.step_count();
    const int stride = config.effective_stride();

    GainVector gain;
    std::vector<double> weights;
    double response_gain = 0.0;
    if (closed) {
        gain = observer_gain(kernels.p);
        weights = control_weights(kernels.k);
        const auto& b = cn.unit_right_response();
        for (std::size_t j = 0; j < weights.size(); ++j) response_gain += weights[j] * b[j];
    }

    auto trace = std::make_shared<ClosedLoopTrace>();
    trace->n = n;
    trace->frame_dt = dt * stride;

    StateField u = config.initial_u;
    StateField u_hat = closed ? config.initial_u_hat : StateField(n);
    double U = u.back();

    auto store = [&](double t) {
        trace->times.push_back(t);
        trace->u.push_back(u);
        trace->u_hat.push_back(u_hat);
        trace->u_tilde.push_back(u - u_hat);
        trace->control.push_back(U);
        trace->measurement.push_back(boundary_flux(u));
    };
    store(0.0);

    double y_prev = boundary_flux(u);
    for (long long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double y = boundary_flux(u);
        double U_next = 0.0;
        StateField u_hat_next = u_hat;
        if (closed) {
            const double y_mid = step == 0 ? y : 1.5 * y - 0.5 * y_prev;
            const FeedbackClosure closure{cn, weights, response_gain, &U_next};
            u_hat_next = heun_step(
                cn, u_hat, [&](const StateField& v) { return observer_source(v, y_mid, gain, f); },
                closure);
        }
        StateField u_next = heun_step(
            cn, u, [&](const StateField& v) { return reaction(v, f); },
            [&](StateField a) { return with_ends(std::move(a), cn, {0.0, U_next}); });

        if (!u_next.all_finite() || !u_hat_next.all_finite() || !std::isfinite(U_next))
            throw BlowUpError(t, trace);

        y_prev = y;
        u = std::move(u_next);
        u_hat = std::move(u_hat_next);
        U = U_next;
        if ((step + 1) % stride == 0) store(static_cast<double>(step + 1) * dt);
    }
    return std::move(*trace);
}

}  // namespace backstep
