#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace backstep {

enum class Orientation {
    lower,  // 0 <= y <= x <= 1
    upper,  // 0 <= x <= y <= 1
};

/// Uniform node set on one of the two triangles of the unit square.
///
/// Nodes are (x_i, y_j) = (i/n, j/n). Storage is row-major over x with the
/// row length dictated by the orientation.
class TriangularGrid {
public:
    TriangularGrid(int n, Orientation orientation);

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    Orientation orientation() const noexcept { return orientation_; }
    double coord(int i) const noexcept { return static_cast<double>(i) / n_; }

    std::size_t node_count() const noexcept {
        return static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 2) / 2;
    }

    bool contains(int i, int j) const noexcept;

    // Row-major offset of node (i, j). Caller guarantees contains(i, j).
    std::size_t index(int i, int j) const noexcept;

    // Inclusive j-range of row i.
    int row_begin(int i) const noexcept { return orientation_ == Orientation::lower ? 0 : i; }
    int row_end(int i) const noexcept { return orientation_ == Orientation::lower ? i : n_; }

    bool operator==(const TriangularGrid&) const = default;

private:
    int n_;
    double h_;
    Orientation orientation_;
};

/// A scalar field sampled at x_i = i/n, i = 0..n.
class StateField {
public:
    StateField() = default;
    explicit StateField(int n);
    StateField(int n, std::vector<double> samples);

    template <class Fn>
    static StateField from_function(int n, Fn&& fn) {
        StateField f(n);
        for (int i = 0; i <= n; ++i) f.samples_[i] = fn(f.x(i));
        return f;
    }

    int n() const noexcept { return n_; }
    double h() const noexcept { return 1.0 / n_; }
    double x(int i) const noexcept { return static_cast<double>(i) / n_; }
    std::size_t size() const noexcept { return samples_.size(); }

    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    double& operator[](std::size_t i) noexcept { return samples_[i]; }
    double front() const noexcept { return samples_.front(); }
    double back() const noexcept { return samples_.back(); }

    std::span<const double> samples() const noexcept { return samples_; }
    std::span<double> samples() noexcept { return samples_; }

    bool all_finite() const noexcept;

    bool operator==(const StateField&) const = default;

private:
    int n_ = 0;
    std::vector<double> samples_;
};

StateField operator+(const StateField& a, const StateField& b);
StateField operator-(const StateField& a, const StateField& b);
StateField operator*(double s, const StateField& a);

// Composite trapezoidal rule over the uniform nodes [lo, hi] with spacing h.
double trapezoid(std::span<const double> values, double h) noexcept;

// Weight of node j in the composite rule over `intervals` uniform cells
// (unit spacing). Six or more cells use the end-corrected trapezoid
// 3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8; shorter spans use the
// matching Newton-Cotes rules (fourth order); a single cell is the trapezoid.
double quadrature_weight(int j, int intervals) noexcept;

// Integral of uniformly sampled values with quadrature_weight.
double integrate(std::span<const double> values, double h) noexcept;

// Sum of the first modes.size() sine modes: sum_m modes[m-1] * sin(m pi x).
StateField sine_series(int n, std::span<const double> modes);

// Seeded smooth test field: five sine modes with coefficients drawn
// uniformly from [-1, 1] by a 64-bit Mersenne twister, scaled by amplitude.
StateField seeded_smooth_field(int n, unsigned long long seed, double amplitude = 1.0);

}  // namespace backstep
