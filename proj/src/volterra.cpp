#include "backstep/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "backstep/errors.hpp"

namespace backstep {

KernelKind kernel_kind_for(TransformKind kind) noexcept {
    switch (kind) {
        case TransformKind::K: return KernelKind::controller_k;
        case TransformKind::L: return KernelKind::inverse_l;
        case TransformKind::P: return KernelKind::observer_p;
        case TransformKind::R: return KernelKind::inverse_r;
    }
    return KernelKind::controller_k;
}

namespace {

TransformKind transform_for(KernelKind kind) noexcept {
    switch (kind) {
        case KernelKind::controller_k: return TransformKind::K;
        case KernelKind::inverse_l: return TransformKind::L;
        case KernelKind::observer_p: return TransformKind::P;
        case KernelKind::inverse_r: return TransformKind::R;
    }
    return TransformKind::K;
}

}  // namespace

StateField apply_transform(TransformKind kind, const KernelField& kernel, const StateField& f) {
    require(kernel.kind() == kernel_kind_for(kind),
            "apply_transform: kernel kind " + std::string(to_string(kernel.kind())) +
                " does not match the transform");
    require(kernel.n() == f.n(), "apply_transform: resolution mismatch");

    const int n = f.n();
    const double h = kernel.grid().h();
    const double sign = (kind == TransformKind::K || kind == TransformKind::P) ? -1.0 : 1.0;
    const bool lower = kind == TransformKind::K || kind == TransformKind::L;

    StateField out(n);
    for (int i = 0; i <= n; ++i) {
        const int lo = lower ? 0 : i;
        const int hi = lower ? i : n;
        const int cells = hi - lo;
        double integral = 0.0;
        for (int j = lo; j <= hi; ++j) integral += quadrature_weight(j - lo, cells) * kernel(i, j) * f[j];
        integral *= h;
        out[i] = f[i] + sign * integral;
    }
    return out;
}

double composition_defect(const KernelField& first_kernel, const KernelField& second_kernel,
                          const StateField& f) {
    require(first_kernel.lambda() == second_kernel.lambda(),
            "composition_defect: kernels solved for different lambda");
    require(first_kernel.n() == second_kernel.n(), "composition_defect: kernel resolution mismatch");
    const auto first = transform_for(first_kernel.kind());
    const auto second = transform_for(second_kernel.kind());
    const bool lower_pair = (first == TransformKind::K && second == TransformKind::L) ||
                            (first == TransformKind::L && second == TransformKind::K);
    const bool upper_pair = (first == TransformKind::P && second == TransformKind::R) ||
                            (first == TransformKind::R && second == TransformKind::P);
    require(lower_pair || upper_pair, "composition_defect: kernels do not form an inverse pair");

    const StateField round_trip =
        apply_transform(second, second_kernel, apply_transform(first, first_kernel, f));
    double defect = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) defect = std::max(defect, std::abs(round_trip[i] - f[i]));
    return defect;
}

double composition_defect(TransformPair pair, const KernelField& forward, const KernelField& inverse,
                          const StateField& f) {
    const auto expected_forward =
        pair == TransformPair::KL ? KernelKind::controller_k : KernelKind::observer_p;
    require(forward.kind() == expected_forward, "composition_defect: forward kernel kind mismatch");
    return composition_defect(forward, inverse, f);
}

std::vector<double> control_weights(const KernelField& k_field) {
    require(k_field.kind() == KernelKind::controller_k, "control_signal: expected a controller_k kernel");
    const int n = k_field.n();
    const double h = k_field.grid().h();
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) w[j] = h * quadrature_weight(j, n) * k_field(n, j);
    return w;
}

double control_signal(const KernelField& k_field, const StateField& u_hat) {
    require(k_field.n() == u_hat.n(), "control_signal: resolution mismatch");
    const auto w = control_weights(k_field);
    double u = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) u += w[j] * u_hat[j];
    return u;
}

}  // namespace backstep
