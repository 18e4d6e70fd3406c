#pragma once

#include <string_view>
#include <vector>

#include "backstep/grid.hpp"

namespace backstep {

enum class KernelKind {
    controller_k,  // k_xx - k_yy =  lambda k on the lower triangle, k(x,0) = 0
    inverse_l,     // l_xx - l_yy = -lambda l on the lower triangle, l(x,0) = 0
    observer_p,    // p_xx - p_yy = -lambda p on the upper triangle, p(0,y) = 0
    inverse_r,     // r_xx - r_yy =  lambda r on the upper triangle, r(0,y) = 0
};
// All four kinds share the diagonal data -(lambda/2) x.

std::string_view to_string(KernelKind kind);
KernelKind kernel_kind_from_letter(char letter);  // 'k', 'l', 'p', 'r'

Orientation orientation_of(KernelKind kind) noexcept;

// Coefficient c in  K_xx - K_yy = c K  for the given kind.
double pde_coefficient(KernelKind kind, double lambda) noexcept;

class KernelField {
public:
    KernelField(TriangularGrid grid, std::vector<double> values, double lambda, KernelKind kind);

    const TriangularGrid& grid() const noexcept { return grid_; }
    int n() const noexcept { return grid_.n(); }
    double lambda() const noexcept { return lambda_; }
    KernelKind kind() const noexcept { return kind_; }
    const std::vector<double>& values() const noexcept { return values_; }

    // Value at node (x_i, y_j); (i, j) must lie on the field's triangle.
    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }

private:
    TriangularGrid grid_;
    std::vector<double> values_;
    double lambda_;
    KernelKind kind_;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 200;
};

/// Solves the Goursat problem for `kind` by successive approximation of its
/// integral form in characteristic coordinates xi = x + y, eta = x - y:
///
///   G(xi, eta) = -(lambda/4)(xi - eta) + (c/4) int_eta^xi int_0^eta G(t, s) ds dt
///
/// with both integrals evaluated by the trapezoidal rule on the spacing-h
/// characteristic lattice. Upper-triangle kinds are the transposes of the
/// lower-triangle problem with the same coefficient.
///
/// Throws DivergenceError when the sup-norm update is still >= tol after
/// max_iter sweeps, ContractError on an orientation/kind mismatch.
KernelField solve_kernel(double lambda, KernelKind kind, const TriangularGrid& grid,
                         SolveOptions options = {});

/// Closed-form constant-lambda controller kernel on 0 <= y <= x <= 1,
///   k(x,y) = -(lambda y / 2) sum_m (lambda (x^2 - y^2) / 4)^m / (m! (m+1)!),
/// i.e. -lambda y I1(z)/z with z = sqrt(lambda (x^2 - y^2)), valid for either sign.
double bessel_oracle(double lambda, double x, double y);

// Series value of any kind at a physical point on its own triangle.
double kernel_oracle(KernelKind kind, double lambda, double x, double y);

// Samples kernel_oracle on the grid (used to build reference fields).
KernelField sample_oracle(KernelKind kind, double lambda, const TriangularGrid& grid);

struct KernelResidual {
    double interior_sup = 0.0;
    double boundary_sup = 0.0;
    double diagonal_sup = 0.0;
};

/// Sup-norms of the second-order finite-difference PDE residual over interior
/// nodes, of the zero-edge condition, and of the diagonal condition.
KernelResidual kernel_residual(const KernelField& field);

enum class GainKind { raw_p, filtered_pbar };

struct GainVector {
    std::vector<double> samples;  // at x_i = i/n
    GainKind kind = GainKind::raw_p;

    int n() const noexcept { return static_cast<int>(samples.size()) - 1; }
    double max_abs() const noexcept;
};

// Trace p(x) = p(x, 1) of the observer kernel.
GainVector observer_gain(const KernelField& p_field);

// pbar(x) = p(x) - int_0^x k(x,y) p(y) dy.
GainVector filtered_gain(const GainVector& raw, const KernelField& k_field);

}  // namespace backstep
