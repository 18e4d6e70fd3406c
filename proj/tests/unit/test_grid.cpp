#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "backstep/errors.hpp"
#include "backstep/grid.hpp"

using namespace backstep;

TEST_CASE("triangular grid counts and indexes every node once") {
    for (auto orientation : {Orientation::lower, Orientation::upper}) {
        for (int n : {16, 17, 64}) {
            TriangularGrid g(n, orientation);
            CHECK(g.node_count() == static_cast<std::size_t>((n + 1) * (n + 2) / 2));
            CHECK(g.h() * n == doctest::Approx(1.0).epsilon(1e-15));

            std::set<std::size_t> seen;
            std::size_t expected = 0;
            for (int i = 0; i <= n; ++i) {
                for (int j = g.row_begin(i); j <= g.row_end(i); ++j) {
                    REQUIRE(g.contains(i, j));
                    // row-major: offsets are consecutive
                    CHECK(g.index(i, j) == expected++);
                    seen.insert(g.index(i, j));
                }
            }
            CHECK(seen.size() == g.node_count());
        }
    }
}

TEST_CASE("contains respects the triangle") {
    TriangularGrid lower(16, Orientation::lower), upper(16, Orientation::upper);
    CHECK(lower.contains(5, 3));
    CHECK_FALSE(lower.contains(3, 5));
    CHECK(upper.contains(3, 5));
    CHECK_FALSE(upper.contains(5, 3));
    CHECK(lower.contains(7, 7));
    CHECK(upper.contains(7, 7));
    CHECK_FALSE(lower.contains(-1, 0));
    CHECK_FALSE(lower.contains(17, 0));
}

TEST_CASE("grid rejects a nonpositive resolution") {
    CHECK_THROWS_AS(TriangularGrid(0, Orientation::lower), ContractError);
    CHECK_THROWS_AS(StateField(-4), ContractError);
    // 1/49 * 49 rounds below one
    CHECK_THROWS_AS(TriangularGrid(49, Orientation::upper), ContractError);
}

TEST_CASE("quadrature weights integrate cubics exactly for every span of two or more cells") {
    CHECK(quadrature_weight(0, 1) == 0.5);
    CHECK(quadrature_weight(1, 1) == 0.5);
    CHECK(quadrature_weight(2, 1) == 0.0);
    for (int intervals = 2; intervals <= 20; ++intervals) {
        const double h = 1.0 / intervals;
        for (int p = 0; p <= 3; ++p) {
            std::vector<double> v(intervals + 1);
            for (int j = 0; j <= intervals; ++j) v[j] = std::pow(j * h, p);
            CAPTURE(intervals);
            CAPTURE(p);
            CHECK(integrate(v, h) == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("composite rule is fourth order, trapezoid second order") {
    auto errors = [](int n) {
        std::vector<double> v(n + 1);
        for (int j = 0; j <= n; ++j) v[j] = std::exp(static_cast<double>(j) / n);
        const double exact = std::numbers::e - 1.0;
        return std::pair{std::abs(integrate(v, 1.0 / n) - exact), std::abs(trapezoid(v, 1.0 / n) - exact)};
    };
    const auto [q32, t32] = errors(32);
    const auto [q64, t64] = errors(64);
    CHECK(q32 / q64 == doctest::Approx(16.0).epsilon(0.1));
    CHECK(t32 / t64 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("state field arithmetic and helpers") {
    const auto a = StateField::from_function(16, [](double x) { return x; });
    const auto b = StateField::from_function(16, [](double x) { return 1.0 - x; });
    const auto sum = a + b;
    for (std::size_t i = 0; i < sum.size(); ++i) CHECK(sum[i] == doctest::Approx(1.0));
    const auto diff = 2.0 * a - a;
    CHECK(diff == a);
    CHECK(a.all_finite());
    auto bad = a;
    bad[3] = std::nan("");
    CHECK_FALSE(bad.all_finite());
    CHECK_THROWS_AS(a + StateField(32), ContractError);
}

TEST_CASE("sine series vanishes at both ends") {
    const std::vector<double> modes{1.0, -0.5, 0.25};
    const auto f = sine_series(64, modes);
    CHECK(f.front() == 0.0);
    CHECK(f.back() == 0.0);
    CHECK(f[32] == doctest::Approx(1.0 - 0.25));  // x = 1/2: sin(pi/2) + 0.25 sin(3pi/2)
}

TEST_CASE("seeded field is reproducible and seed dependent") {
    const auto a = seeded_smooth_field(64, 20240607);
    const auto b = seeded_smooth_field(64, 20240607);
    const auto c = seeded_smooth_field(64, 20240608);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.front() == 0.0);
    CHECK(a.back() == 0.0);
    const auto scaled = seeded_smooth_field(64, 20240607, 3.0);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(scaled[i] == doctest::Approx(3.0 * a[i]));
}
