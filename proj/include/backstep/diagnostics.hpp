#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "backstep/grid.hpp"
#include "backstep/kernel.hpp"
#include "backstep/nonlinearity.hpp"
#include "backstep/simulate.hpp"

namespace backstep {

/// L1, L2, sup and cumulative Sobolev norms H^k = (sum_{j<=k} ||d^j f||_2^2)^(1/2).
struct NormReport {
    double l1 = 0.0;
    double l2 = 0.0;
    double sup = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double h3 = 0.0;
    double h4 = 0.0;
};

// Derivative of order `order` (1..4) at every node: centered second-order
// stencils in the interior, one-sided second-order stencils near the ends.
std::vector<double> derivative(const StateField& f, int order);

NormReport norms(const StateField& f);

// Discrete embedding constant for sup <= K * H^1, frozen from a sweep of
// smooth fields (see tests); the continuous bound is sqrt(2).
inline constexpr double kSupOverH1Bound = 1.5;

struct LyapunovSample {
    double t = 0.0;
    double U_val = 0.0;
    double V_val = 0.0;
    double W_val = 0.0;
    double S_val = 0.0;
    double A = 0.0;
    double B = 0.0;
};

/// Lyapunov functionals on the transformed frames gamma_hat = K[u_hat],
/// gamma_tilde = R[u_tilde]:
///   U = 1/2 |gamma_hat|^2 + A/2 |gamma_tilde|^2,
///   V, W the same on the first and second time derivatives,
///   S = U + V + W, A = B^2, B = max |pbar|.
/// Time derivatives use second-order differences of the stored frames.
std::vector<LyapunovSample> lyapunov_series(const ClosedLoopTrace& trace, const KernelSet& kernels);

struct DecayFit {
    double rate = 0.0;       // negated slope of log(value) against t
    double r_squared = 0.0;  // 0 when the values are constant
    std::size_t points = 0;
};

// Least-squares line through (t, log v) for t in [t_lo, t_hi].
DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_lo,
                   double t_hi);

struct Remark1Constants {
    double K1 = 0.0;  // sup |f(u)| / u^2
    double K2 = 0.0;  // sup |f'(u)| / |u|
    double K3 = 0.0;  // sup |f''(u)|
};

// Empirical quadratic-remainder constants of f = f_NL - lambda u on
// |u| <= delta_f, scanned at `samples` equispaced points including both ends.
Remark1Constants remark1_constants(const Nonlinearity& f, double delta_f, int samples);

/// L2 norm of the discrete residual of the transformed observer equation
///   gamma_hat_t = gamma_hat_xx + K[f(L[gamma_hat])] + pbar(x) gamma_tilde_x(1)
/// at an interior frame, with a centered time difference.
double target_system_residual(const ClosedLoopTrace& trace, const KernelSet& kernels,
                              const Nonlinearity& f, std::size_t frame);

// Maximum violation of the trace's boundary identities and of
// u_tilde = u - u_hat over all frames.
double trace_invariant_defect(const ClosedLoopTrace& trace);

}  // namespace backstep
