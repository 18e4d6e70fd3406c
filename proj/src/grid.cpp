#include "backstep/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "backstep/errors.hpp"

namespace backstep {

TriangularGrid::TriangularGrid(int n, Orientation orientation)
    : n_(n), h_(n > 0 ? 1.0 / n : 0.0), orientation_(orientation) {
    require(n > 0, "TriangularGrid: n must be positive, got " + std::to_string(n));
    require(h_ * n_ == 1.0,
            "TriangularGrid: h*n != 1 in double arithmetic for n=" + std::to_string(n));
}

bool TriangularGrid::contains(int i, int j) const noexcept {
    if (i < 0 || j < 0 || i > n_ || j > n_) return false;
    return orientation_ == Orientation::lower ? j <= i : i <= j;
}

std::size_t TriangularGrid::index(int i, int j) const noexcept {
    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    if (orientation_ == Orientation::lower) return si * (si + 1) / 2 + sj;
    // Row i holds j = i..n; rows before it hold (n+1) + n + ... + (n-i+2) nodes.
    const auto sn = static_cast<std::size_t>(n_);
    return si * (sn + 1) - si * (si - 1) / 2 + (sj - si);
}

namespace {

// Checked before any storage is sized from n.
int positive_n(int n) {
    require(n > 0, "StateField: n must be positive");
    return n;
}

}  // namespace

StateField::StateField(int n) : n_(positive_n(n)), samples_(static_cast<std::size_t>(n) + 1, 0.0) {}

StateField::StateField(int n, std::vector<double> samples) : n_(positive_n(n)), samples_(std::move(samples)) {
    require(samples_.size() == static_cast<std::size_t>(n) + 1,
            "StateField: expected n+1 samples");
}

bool StateField::all_finite() const noexcept {
    for (double v : samples_)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {
void require_same_n(const StateField& a, const StateField& b) {
    require(a.n() == b.n(), "StateField: resolution mismatch");
}
}  // namespace

StateField operator+(const StateField& a, const StateField& b) {
    require_same_n(a, b);
    StateField out(a.n());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

StateField operator-(const StateField& a, const StateField& b) {
    require_same_n(a, b);
    StateField out(a.n());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

StateField operator*(double s, const StateField& a) {
    StateField out(a.n());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

double trapezoid(std::span<const double> values, double h) noexcept {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * h;
}

double quadrature_weight(int j, int intervals) noexcept {
    const int N = intervals;
    if (N <= 0 || j < 0 || j > N) return 0.0;
    switch (N) {
        case 1: return 0.5;
        case 2: return j == 1 ? 4.0 / 3.0 : 1.0 / 3.0;
        case 3: return (j == 0 || j == 3) ? 3.0 / 8.0 : 9.0 / 8.0;
        case 4: {
            static constexpr double w[] = {1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0};
            return w[j];
        }
        case 5: {
            // Simpson on [0, 2], three-eighths on [2, 5].
            static constexpr double w[] = {1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0 + 3.0 / 8.0,
                                           9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0};
            return w[j];
        }
        default: break;
    }
    static constexpr double ends[] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    const int from_end = j < N - j ? j : N - j;
    return from_end < 3 ? ends[from_end] : 1.0;
}

double integrate(std::span<const double> values, double h) noexcept {
    if (values.size() < 2) return 0.0;
    const int N = static_cast<int>(values.size()) - 1;
    double sum = 0.0;
    for (int j = 0; j <= N; ++j) sum += quadrature_weight(j, N) * values[j];
    return sum * h;
}

StateField sine_series(int n, std::span<const double> modes) {
    auto f = StateField::from_function(n, [&](double x) {
        double v = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m)
            v += modes[m] * std::sin(static_cast<double>(m + 1) * std::numbers::pi * x);
        return v;
    });
    // sin(m pi) rounds to ~1e-16; every mode vanishes at both ends.
    f[0] = 0.0;
    f[static_cast<std::size_t>(n)] = 0.0;
    return f;
}

StateField seeded_smooth_field(int n, unsigned long long seed, double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> modes(5);
    for (double& m : modes) m = amplitude * coef(rng);
    return sine_series(n, modes);
}

}  // namespace backstep
