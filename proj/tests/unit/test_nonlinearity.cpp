#include <doctest.h>

#include <cmath>

#include "backstep/errors.hpp"
#include "backstep/nonlinearity.hpp"

using namespace backstep;

namespace {

void check_derivatives(const Nonlinearity& f) {
    const double h = 1e-5;
    for (double u = -2.0; u <= 2.0; u += 0.25) {
        CAPTURE(u);
        CHECK(f.d1(u) == doctest::Approx((f(u + h) - f(u - h)) / (2 * h)).epsilon(1e-7));
        CHECK(f.d2(u) == doctest::Approx((f.d1(u + h) - f.d1(u - h)) / (2 * h)).epsilon(1e-7));
        CHECK(f.remainder(u) == doctest::Approx(f(u) - f.lambda() * u));
        CHECK(f.remainder_d1(u) == doctest::Approx(f.d1(u) - f.lambda()));
    }
}

}  // namespace

TEST_CASE("built-in reaction terms") {
    const auto fhn = Nonlinearity::fitzhugh_nagumo();
    CHECK(fhn.lambda() == -1.0);
    CHECK(fhn(0.5) == doctest::Approx(-0.5 * 0.25));
    CHECK(fhn(1.0) == 0.0);
    check_derivatives(fhn);

    const auto fisher = Nonlinearity::fisher();
    CHECK(fisher.lambda() == 1.0);
    CHECK(fisher(0.5) == doctest::Approx(0.25));
    check_derivatives(fisher);

    const auto lin = Nonlinearity::linear(10.0);
    CHECK(lin(0.3) == doctest::Approx(3.0));
    CHECK(lin.remainder(0.7) == 0.0);
    check_derivatives(lin);

    const auto poly = Nonlinearity::polynomial({2.0, 0.0, -3.0});
    CHECK(poly(2.0) == doctest::Approx(4.0 - 24.0));
    check_derivatives(poly);

    const auto zero = Nonlinearity::zero();
    CHECK(zero.lambda() == 0.0);
    CHECK(zero(5.0) == 0.0);
}

TEST_CASE("every built-in satisfies f(0) = 0 and f'(0) = lambda") {
    for (const auto& f : {Nonlinearity::fitzhugh_nagumo(), Nonlinearity::fisher(), Nonlinearity::linear(-3.0),
                          Nonlinearity::polynomial({0.5, 1.0})}) {
        CHECK(f(0.0) == 0.0);
        CHECK(f.d1(0.0) == f.lambda());
        CHECK(f.remainder(0.0) == 0.0);
        CHECK(f.remainder_d1(0.0) == 0.0);
    }
}

TEST_CASE("linearization keeps lambda") {
    const auto lin = Nonlinearity::fitzhugh_nagumo().linearized();
    CHECK(lin.lambda() == -1.0);
    CHECK(lin(2.0) == -2.0);
}

TEST_CASE("coefficients are exposed for polynomial terms") {
    CHECK(Nonlinearity::fitzhugh_nagumo().coefficients() == std::vector<double>{-1.0, 2.0, -1.0});
    CHECK(Nonlinearity::fisher().coefficients() == std::vector<double>{1.0, -1.0});
}

TEST_CASE("invalid reaction terms are rejected") {
    CHECK_THROWS_AS(Nonlinearity::polynomial({0.0, 1.0}), ContractError);
    CHECK_THROWS_AS(Nonlinearity::polynomial({}), ContractError);
    CHECK_THROWS_AS(Nonlinearity("bad", [](double u) { return u + 1.0; }, [](double) { return 1.0; },
                                 [](double) { return 0.0; }, 1.0),
                    ContractError);
    CHECK_THROWS_AS(Nonlinearity("bad", [](double u) { return u; }, [](double) { return 1.0; },
                                 [](double) { return 0.0; }, 2.0),
                    ContractError);
    CHECK_THROWS_AS(Nonlinearity("bad", nullptr, nullptr, nullptr, 1.0), ContractError);
}
