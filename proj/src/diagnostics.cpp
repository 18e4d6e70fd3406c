#include "backstep/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "backstep/errors.hpp"
#include "backstep/volterra.hpp"

namespace backstep {

namespace {

// Fornberg's recursion: weights of the order-m derivative at z on nodes xs.
std::vector<double> finite_difference_weights(double z, std::span<const double> xs, int m) {
    const int np = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < np; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(np);
    for (int i = 0; i < np; ++i) w[i] = c[i][m];
    return w;
}

double l2_of(std::span<const double> v, double h) {
    double acc = 0.5 * (v.front() * v.front() + v.back() * v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i] * v[i];
    return std::sqrt(acc * h);
}

double half_energy(const StateField& f) {
    const double l2 = l2_of(f.samples(), f.h());
    return 0.5 * l2 * l2;
}

}  // namespace

std::vector<double> derivative(const StateField& f, int order) {
    require(order >= 1 && order <= 4, "derivative: order must be in 1..4");
    const int n = f.n();
    const int half = (order + 1) / 2;
    const int one_sided = order + 2;
    require(n + 1 >= one_sided, "derivative: too few nodes for the stencil");
    const double scale = std::pow(static_cast<double>(n), order);

    std::vector<double> out(f.size());
    std::vector<double> offsets;
    for (int i = 0; i <= n; ++i) {
        int lo = i - half;
        int hi = i + half;
        if (lo < 0) {
            lo = 0;
            hi = one_sided - 1;
        } else if (hi > n) {
            hi = n;
            lo = n - one_sided + 1;
        }
        offsets.clear();
        for (int j = lo; j <= hi; ++j) offsets.push_back(static_cast<double>(j - i));
        const auto w = finite_difference_weights(0.0, offsets, order);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += w[j - lo] * f[j];
        out[i] = acc * scale;
    }
    return out;
}

NormReport norms(const StateField& f) {
    require(f.n() >= 16, "norms: need n >= 16");
    const double h = f.h();
    NormReport r;
    std::vector<double> abs_f(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        abs_f[i] = std::abs(f[i]);
        r.sup = std::max(r.sup, abs_f[i]);
    }
    r.l1 = trapezoid(abs_f, h);
    r.l2 = l2_of(f.samples(), h);

    double cumulative = r.l2 * r.l2;
    double* targets[] = {&r.h1, &r.h2, &r.h3, &r.h4};
    for (int order = 1; order <= 4; ++order) {
        const double d = l2_of(derivative(f, order), h);
        cumulative += d * d;
        *targets[order - 1] = std::sqrt(cumulative);
    }
    return r;
}

std::vector<LyapunovSample> lyapunov_series(const ClosedLoopTrace& trace, const KernelSet& kernels) {
    const std::size_t frames = trace.frames();
    require(frames >= 5, "lyapunov_series: need at least 5 frames");
    const double dt = trace.frame_dt;
    require(dt > 0.0, "lyapunov_series: frame spacing must be positive");
    for (std::size_t k = 1; k < frames; ++k) {
        const double gap = trace.times[k] - trace.times[k - 1];
        require(std::abs(gap - dt) <= 1e-9 * std::max(1.0, dt) + 1e-12 * trace.times[k],
                "lyapunov_series: frames are not uniformly spaced in time");
    }

    const auto pbar = filtered_gain(observer_gain(kernels.p), kernels.k);
    const double B = pbar.max_abs();
    const double A = B * B;

    std::vector<StateField> hat(frames);
    std::vector<StateField> tilde(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        hat[k] = apply_transform(TransformKind::K, kernels.k, trace.u_hat[k]);
        tilde[k] = apply_transform(TransformKind::R, kernels.r, trace.u_tilde[k]);
    }

    const int n = trace.n;
    // First and second time derivatives at frame k of a frame sequence.
    auto d_dt = [&](const std::vector<StateField>& g, std::size_t k) {
        StateField out(n);
        for (int i = 0; i <= n; ++i) {
            if (k == 0)
                out[i] = (-3.0 * g[0][i] + 4.0 * g[1][i] - g[2][i]) / (2.0 * dt);
            else if (k == frames - 1)
                out[i] = (3.0 * g[k][i] - 4.0 * g[k - 1][i] + g[k - 2][i]) / (2.0 * dt);
            else
                out[i] = (g[k + 1][i] - g[k - 1][i]) / (2.0 * dt);
        }
        return out;
    };
    auto d2_dt2 = [&](const std::vector<StateField>& g, std::size_t k) {
        StateField out(n);
        const double inv = 1.0 / (dt * dt);
        for (int i = 0; i <= n; ++i) {
            if (k == 0)
                out[i] = (2.0 * g[0][i] - 5.0 * g[1][i] + 4.0 * g[2][i] - g[3][i]) * inv;
            else if (k == frames - 1)
                out[i] = (2.0 * g[k][i] - 5.0 * g[k - 1][i] + 4.0 * g[k - 2][i] - g[k - 3][i]) * inv;
            else
                out[i] = (g[k + 1][i] - 2.0 * g[k][i] + g[k - 1][i]) * inv;
        }
        return out;
    };

    std::vector<LyapunovSample> out(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        LyapunovSample& s = out[k];
        s.t = trace.times[k];
        s.A = A;
        s.B = B;
        s.U_val = half_energy(hat[k]) + A * half_energy(tilde[k]);
        s.V_val = half_energy(d_dt(hat, k)) + A * half_energy(d_dt(tilde, k));
        s.W_val = half_energy(d2_dt2(hat, k)) + A * half_energy(d2_dt2(tilde, k));
        s.S_val = s.U_val + s.V_val + s.W_val;
    }
    return out;
}

DecayFit fit_decay(std::span<const double> times, std::span<const double> values, double t_lo,
                   double t_hi) {
    require(times.size() == values.size(), "fit_decay: times and values differ in length");
    std::vector<double> ts;
    std::vector<double> ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        require(values[i] > 0.0, "fit_decay: nonpositive value at t=" + std::to_string(times[i]) +
                                     "; shrink the window");
        ts.push_back(times[i]);
        ys.push_back(std::log(values[i]));
    }
    require(ts.size() >= 10, "fit_decay: need at least 10 points in the window");

    DecayFit fit;
    fit.points = ts.size();
    if (std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); })) return fit;

    const double count = static_cast<double>(ts.size());
    double t_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t_mean += ts[i];
        y_mean += ys[i];
    }
    t_mean /= count;
    y_mean /= count;
    double stt = 0.0;
    double sty = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - t_mean) * (ts[i] - t_mean);
        sty += (ts[i] - t_mean) * (ys[i] - y_mean);
        syy += (ys[i] - y_mean) * (ys[i] - y_mean);
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    fit.rate = -slope;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double e = ys[i] - (y_mean + slope * (ts[i] - t_mean));
            ss_res += e * e;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    }
    return fit;
}

Remark1Constants remark1_constants(const Nonlinearity& f, double delta_f, int samples) {
    require(delta_f > 0.0, "remark1_constants: delta_f must be positive");
    require(samples >= 2, "remark1_constants: need at least 2 samples");
    Remark1Constants k;
    for (int s = 0; s < samples; ++s) {
        const double u = -delta_f + 2.0 * delta_f * s / (samples - 1);
        k.K3 = std::max(k.K3, std::abs(f.remainder_d2(u)));
        if (u == 0.0) continue;
        k.K1 = std::max(k.K1, std::abs(f.remainder(u)) / (u * u));
        k.K2 = std::max(k.K2, std::abs(f.remainder_d1(u)) / std::abs(u));
    }
    return k;
}

double target_system_residual(const ClosedLoopTrace& trace, const KernelSet& kernels,
                              const Nonlinearity& f, std::size_t frame) {
    require(frame >= 1 && frame + 1 < trace.frames(),
            "target_system_residual: frame must have neighbours on both sides");
    const int n = trace.n;
    const double dt = trace.frame_dt;
    const double inv_h2 = static_cast<double>(n) * n;

    const auto prev = apply_transform(TransformKind::K, kernels.k, trace.u_hat[frame - 1]);
    const auto cur = apply_transform(TransformKind::K, kernels.k, trace.u_hat[frame]);
    const auto next = apply_transform(TransformKind::K, kernels.k, trace.u_hat[frame + 1]);
    const auto tilde = apply_transform(TransformKind::R, kernels.r, trace.u_tilde[frame]);
    const double tilde_flux = boundary_flux(tilde);

    StateField remainder = apply_transform(TransformKind::L, kernels.l, cur);
    for (std::size_t i = 0; i < remainder.size(); ++i) remainder[i] = f.remainder(remainder[i]);
    const auto forcing = apply_transform(TransformKind::K, kernels.k, remainder);
    const auto pbar = filtered_gain(observer_gain(kernels.p), kernels.k);

    std::vector<double> res(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i < n; ++i) {
        const double g_t = (next[i] - prev[i]) / (2.0 * dt);
        const double g_xx = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) * inv_h2;
        res[i] = g_t - g_xx - forcing[i] - pbar.samples[i] * tilde_flux;
    }
    return l2_of(res, 1.0 / n);
}

double trace_invariant_defect(const ClosedLoopTrace& trace) {
    double worst = 0.0;
    for (std::size_t k = 0; k < trace.frames(); ++k) {
        const auto& u = trace.u[k];
        const auto& uh = trace.u_hat[k];
        const auto& ut = trace.u_tilde[k];
        worst = std::max({worst, std::abs(u.front()), std::abs(uh.front()),
                          std::abs(u.back() - trace.control[k]),
                          std::abs(uh.back() - trace.control[k])});
        for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(ut[i] - (u[i] - uh[i])));
    }
    return worst;
}

}  // namespace backstep
