#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "backstep/grid.hpp"
#include "backstep/kernel.hpp"
#include "backstep/nonlinearity.hpp"

namespace backstep {

struct ClosedLoopTrace;

struct BoundaryValues {
    double left = 0.0;
    double right = 0.0;
};

/// Crank-Nicolson diffusion operator (I - dt/2 D)^{-1} (I + dt/2 D) on
/// interior nodes with Dirichlet ends, plus an explicit source. The
/// tridiagonal factorization is computed once per (n, dt).
class CrankNicolson {
public:
    CrankNicolson(int n, double dt);

    int n() const noexcept { return n_; }
    double dt() const noexcept { return dt_; }

    // Advances v by dt with new end values `next` and source integrated as dt*source.
    StateField advance(const StateField& v, BoundaryValues next, std::span<const double> source) const;

    // Solution of one advance from zero state and zero source with next = {0, 1}.
    const StateField& unit_right_response() const noexcept { return right_response_; }

private:
    void solve_in_place(std::vector<double>& rhs) const;

    int n_;
    double dt_;
    double r_;                       // dt / h^2
    std::vector<double> c_prime_;    // Thomas forward-sweep coefficients
    std::vector<double> inv_denom_;
    StateField right_response_;
};

// Second-order one-sided flux v_x(1).
double boundary_flux(const StateField& v);

/// Raised when a state becomes non-finite. Carries the start time of the
/// failing step and, when thrown from simulate(), the frames stored so far.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double time, std::shared_ptr<const ClosedLoopTrace> partial = nullptr);

    double time() const noexcept { return time_; }
    const std::shared_ptr<const ClosedLoopTrace>& partial_trace() const noexcept { return partial_; }

private:
    double time_;
    std::shared_ptr<const ClosedLoopTrace> partial_;
};

/// Advances u_t = u_xx + f_NL(u) by dt: Crank-Nicolson diffusion with the
/// reaction term treated explicitly by a Heun predictor/corrector.
/// The result carries u(0) = 0 and u(1) = U. `t` is only used for
/// error reporting.
StateField step_plant(const StateField& u, double U, const Nonlinearity& f, double dt, double t = 0.0);
StateField step_plant(const StateField& u, BoundaryValues next, const Nonlinearity& f, double dt,
                      double t = 0.0);

/// Observer step: as step_plant plus the injection gain(x) (y - y_hat),
/// where y is the measured plant flux u_x(1) (held over the step) and
/// y_hat is the observer's own flux, averaged over predictor and corrector.
StateField step_observer(const StateField& u_hat, double y, double U, const GainVector& gain,
                         const Nonlinearity& f, double dt, double t = 0.0);

enum class SimMode { open_loop, closed_loop, linear_closed_loop };

std::string_view to_string(SimMode mode);
SimMode sim_mode_from_string(std::string_view s);

struct SimConfig {
    int n = 128;
    double dt = 1e-4;
    double t_final = 1.0;
    Nonlinearity nonlinearity = Nonlinearity::fitzhugh_nagumo();
    StateField initial_u;
    StateField initial_u_hat;
    SimMode mode = SimMode::closed_loop;
    double kernel_tol = 1e-10;
    int kernel_max_iter = 200;
    int frame_stride = 0;  // 0 = automatic: every step when there are <= 20000, else every 10th

    long long step_count() const;
    int effective_stride() const;
    // Throws ContractError naming the offending field.
    void validate() const;
};

struct ClosedLoopTrace {
    int n = 0;
    double frame_dt = 0.0;
    std::vector<double> times;
    std::vector<StateField> u;
    std::vector<StateField> u_hat;
    std::vector<StateField> u_tilde;
    std::vector<double> control;      // U(t) = u(1,t) = u_hat(1,t)
    std::vector<double> measurement;  // y(t) = u_x(1,t)

    std::size_t frames() const noexcept { return times.size(); }
};

struct KernelSet {
    KernelField k;
    KernelField l;
    KernelField p;
    KernelField r;

    static KernelSet solve(double lambda, int n, SolveOptions options = {});
};

/// Runs the configured scenario. Closed-loop modes solve the controller and
/// observer kernels once, then per step: measurement, observer step with the
/// control law imposed implicitly on its boundary, plant step. The
/// measurement entering each observer step is extrapolated to the step
/// midpoint from the last two samples.
ClosedLoopTrace simulate(const SimConfig& config);
ClosedLoopTrace simulate(const SimConfig& config, const KernelSet& kernels);

}  // namespace backstep
