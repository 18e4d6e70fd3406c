#include "backstep/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "backstep/errors.hpp"

namespace backstep {

std::string_view to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::controller_k: return "controller_k";
        case KernelKind::inverse_l: return "inverse_l";
        case KernelKind::observer_p: return "observer_p";
        case KernelKind::inverse_r: return "inverse_r";
    }
    return "unknown";
}

KernelKind kernel_kind_from_letter(char letter) {
    switch (letter) {
        case 'k': return KernelKind::controller_k;
        case 'l': return KernelKind::inverse_l;
        case 'p': return KernelKind::observer_p;
        case 'r': return KernelKind::inverse_r;
        default: throw ContractError(std::string("unknown kernel kind '") + letter + "'");
    }
}

Orientation orientation_of(KernelKind kind) noexcept {
    return (kind == KernelKind::controller_k || kind == KernelKind::inverse_l)
               ? Orientation::lower
               : Orientation::upper;
}

double pde_coefficient(KernelKind kind, double lambda) noexcept {
    return (kind == KernelKind::controller_k || kind == KernelKind::inverse_r) ? lambda : -lambda;
}

namespace {

// Coefficient of the lower-triangle problem whose transpose gives `kind`.
// Transposition flips the sign of K_xx - K_yy.
double canonical_coefficient(KernelKind kind, double lambda) noexcept {
    const double c = pde_coefficient(kind, lambda);
    return orientation_of(kind) == Orientation::upper ? -c : c;
}

}  // namespace

KernelField::KernelField(TriangularGrid grid, std::vector<double> values, double lambda,
                         KernelKind kind)
    : grid_(grid), values_(std::move(values)), lambda_(lambda), kind_(kind) {
    require(values_.size() == grid_.node_count(), "KernelField: value count != node count");
    require(grid_.orientation() == orientation_of(kind_),
            "KernelField: grid orientation does not match kernel kind");
}

namespace {

// Characteristic lattice: column a (xi = a h) holds eta = b h for
// b = 0..min(a, 2n - a).
class CharacteristicLattice {
public:
    explicit CharacteristicLattice(int n) : n_(n), offset_(2 * n + 2, 0) {
        for (int a = 0; a <= 2 * n; ++a) offset_[a + 1] = offset_[a] + bmax(a) + 1;
    }

    int bmax(int a) const noexcept { return std::min(a, 2 * n_ - a); }
    std::size_t size() const noexcept { return offset_.back(); }
    std::size_t at(int a, int b) const noexcept { return offset_[a] + b; }
    int n() const noexcept { return n_; }

private:
    int n_;
    std::vector<std::size_t> offset_;
};

// Solves G_{xi eta} = (c/4) G with G(xi, xi) = 0 and G(xi, 0) = -(lambda/4) xi.
std::vector<double> solve_characteristic(const CharacteristicLattice& lat, double c, double lambda,
                                         const SolveOptions& opt) {
    const int n = lat.n();
    const double h = 1.0 / n;
    const double half_h = 0.5 * h;
    const double coupling = 0.25 * c;

    std::vector<double> base(lat.size());
    for (int a = 0; a <= 2 * n; ++a)
        for (int b = 0; b <= lat.bmax(a); ++b)
            base[lat.at(a, b)] = -0.25 * lambda * static_cast<double>(a - b) * h;

    std::vector<double> g = base;
    std::vector<double> next(lat.size());
    std::vector<double> inner(lat.size());

    double update = 0.0;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        // inner(a, b) = int_0^{eta_b} G(xi_a, s) ds
        for (int a = 0; a <= 2 * n; ++a) {
            inner[lat.at(a, 0)] = 0.0;
            for (int b = 1; b <= lat.bmax(a); ++b)
                inner[lat.at(a, b)] =
                    inner[lat.at(a, b - 1)] + half_h * (g[lat.at(a, b - 1)] + g[lat.at(a, b)]);
        }
        // next(a, b) = base + (c/4) int_{eta_b}^{xi_a} inner(t, b) dt
        update = 0.0;
        for (int b = 0; b <= n; ++b) {
            double outer = 0.0;
            for (int a = b; a <= 2 * n - b; ++a) {
                if (a > b) outer += half_h * (inner[lat.at(a - 1, b)] + inner[lat.at(a, b)]);
                const std::size_t k = lat.at(a, b);
                next[k] = base[k] + coupling * outer;
                update = std::max(update, std::abs(next[k] - g[k]));
            }
        }
        g.swap(next);
        if (!std::isfinite(update)) break;
        if (update < opt.tol) return g;
    }
    throw DivergenceError("solve_kernel: successive approximation stalled at sup update " +
                              std::to_string(update) + " after " + std::to_string(opt.max_iter) +
                              " iterations",
                          update);
}

// -(lambda y / 2) sum_m (c (x^2 - y^2) / 4)^m / (m! (m+1)!) for y <= x.
double goursat_series(double c, double lambda, double x, double y) {
    const double z = 0.25 * c * (x * x - y * y);
    double term = 1.0;
    double sum = 1.0;
    for (int m = 0; m < 500; ++m) {
        term *= z / (static_cast<double>(m + 1) * static_cast<double>(m + 2));
        sum += term;
        if (std::abs(term) < 1e-15 * std::abs(sum)) break;
    }
    return -0.5 * lambda * y * sum;
}

}  // namespace

KernelField solve_kernel(double lambda, KernelKind kind, const TriangularGrid& grid,
                         SolveOptions options) {
    require(std::isfinite(lambda), "solve_kernel: lambda must be finite");
    require(options.tol > 0.0, "solve_kernel: tol must be positive");
    require(options.max_iter > 0, "solve_kernel: max_iter must be positive");
    require(grid.orientation() == orientation_of(kind),
            std::string("solve_kernel: ") + std::string(to_string(kind)) +
                " requires the " +
                (orientation_of(kind) == Orientation::lower ? "lower" : "upper") + " triangle");

    const int n = grid.n();
    const CharacteristicLattice lat(n);
    const auto g = solve_characteristic(lat, canonical_coefficient(kind, lambda), lambda, options);
    const bool upper = grid.orientation() == Orientation::upper;

    std::vector<double> values(grid.node_count());
    for (int i = 0; i <= n; ++i) {
        for (int j = grid.row_begin(i); j <= grid.row_end(i); ++j) {
            // canonical (lower) coordinates
            const int cx = upper ? j : i;
            const int cy = upper ? i : j;
            double v = g[lat.at(cx + cy, cx - cy)];
            if (cx == cy) v = -0.5 * lambda * grid.coord(i);
            values[grid.index(i, j)] = v;
        }
    }
    return KernelField(grid, std::move(values), lambda, kind);
}

double bessel_oracle(double lambda, double x, double y) {
    require(0.0 <= y && y <= x && x <= 1.0,
            "bessel_oracle: (x, y) must satisfy 0 <= y <= x <= 1");
    return goursat_series(lambda, lambda, x, y);
}

double kernel_oracle(KernelKind kind, double lambda, double x, double y) {
    const bool upper = orientation_of(kind) == Orientation::upper;
    const double cx = upper ? y : x;
    const double cy = upper ? x : y;
    require(0.0 <= cy && cy <= cx && cx <= 1.0, "kernel_oracle: point outside the kernel's triangle");
    return goursat_series(canonical_coefficient(kind, lambda), lambda, cx, cy);
}

KernelField sample_oracle(KernelKind kind, double lambda, const TriangularGrid& grid) {
    require(grid.orientation() == orientation_of(kind), "sample_oracle: orientation mismatch");
    std::vector<double> values(grid.node_count());
    for (int i = 0; i <= grid.n(); ++i)
        for (int j = grid.row_begin(i); j <= grid.row_end(i); ++j)
            values[grid.index(i, j)] = kernel_oracle(kind, lambda, grid.coord(i), grid.coord(j));
    return KernelField(grid, std::move(values), lambda, kind);
}

KernelResidual kernel_residual(const KernelField& field) {
    const auto& grid = field.grid();
    const int n = grid.n();
    require(n >= 4, "kernel_residual: need n >= 4");
    const double inv_h2 = static_cast<double>(n) * n;
    const double c = pde_coefficient(field.kind(), field.lambda());
    const bool upper = grid.orientation() == Orientation::upper;

    KernelResidual r;
    for (int i = 0; i <= n; ++i) {
        for (int j = grid.row_begin(i); j <= grid.row_end(i); ++j) {
            const bool interior = upper ? (i >= 1 && i <= j - 1 && j <= n - 1)
                                        : (j >= 1 && j <= i - 1 && i <= n - 1);
            if (!interior) continue;
            const double lap = (field(i + 1, j) + field(i - 1, j) - field(i, j + 1) -
                                field(i, j - 1)) * inv_h2;
            r.interior_sup = std::max(r.interior_sup, std::abs(lap - c * field(i, j)));
        }
    }
    for (int m = 0; m <= n; ++m) {
        const double edge = upper ? field(0, m) : field(m, 0);
        r.boundary_sup = std::max(r.boundary_sup, std::abs(edge));
        r.diagonal_sup =
            std::max(r.diagonal_sup, std::abs(field(m, m) + 0.5 * field.lambda() * grid.coord(m)));
    }
    return r;
}

double GainVector::max_abs() const noexcept {
    double m = 0.0;
    for (double v : samples) m = std::max(m, std::abs(v));
    return m;
}

GainVector observer_gain(const KernelField& p_field) {
    require(p_field.kind() == KernelKind::observer_p, "observer_gain: expected an observer_p kernel");
    const int n = p_field.n();
    GainVector gain;
    gain.kind = GainKind::raw_p;
    gain.samples.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) gain.samples[i] = p_field(i, n);
    return gain;
}

GainVector filtered_gain(const GainVector& raw, const KernelField& k_field) {
    require(raw.kind == GainKind::raw_p, "filtered_gain: expected a raw_p gain");
    require(k_field.kind() == KernelKind::controller_k, "filtered_gain: expected a controller_k kernel");
    require(raw.n() == k_field.n(), "filtered_gain: grid resolution mismatch");
    const int n = raw.n();
    const double h = k_field.grid().h();

    GainVector out;
    out.kind = GainKind::filtered_pbar;
    out.samples.resize(raw.samples.size());
    std::vector<double> integrand;
    integrand.reserve(raw.samples.size());
    for (int i = 0; i <= n; ++i) {
        integrand.clear();
        for (int j = 0; j <= i; ++j) integrand.push_back(k_field(i, j) * raw.samples[j]);
        out.samples[i] = raw.samples[i] - integrate(integrand, h);
    }
    return out;
}

}  // namespace backstep
