#include "backstep/nonlinearity.hpp"

#include <cmath>

#include "backstep/errors.hpp"

namespace backstep {

Nonlinearity::Nonlinearity(std::string name, Fn eval, Fn d1, Fn d2, double lambda)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      d1_(std::move(d1)),
      d2_(std::move(d2)),
      lambda_(lambda) {
    require(eval_ && d1_ && d2_, "Nonlinearity: eval, d1 and d2 are required");
    require(std::isfinite(lambda_), "Nonlinearity: lambda must be finite");
    require(eval_(0.0) == 0.0, "Nonlinearity: f_NL(0) must be 0");
    require(d1_(0.0) == lambda_, "Nonlinearity: f_NL'(0) must equal lambda");
}

namespace {

// Coefficients c_1..c_m of sum_k c_k u^k (no constant term).
Nonlinearity make_polynomial(std::string name, std::vector<double> coeffs) {
    auto eval = [coeffs](double u) {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * u + *it;
        return acc * u;
    };
    auto d1 = [coeffs](double u) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + static_cast<double>(k + 1) * coeffs[k];
        return acc;
    };
    auto d2 = [coeffs](double u) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;)
            acc = acc * u + static_cast<double>((k + 1) * k) * coeffs[k];
        return acc;
    };
    const double lambda = coeffs.empty() ? 0.0 : coeffs.front();
    Nonlinearity f(std::move(name), eval, d1, d2, lambda);
    return f;
}

}  // namespace

Nonlinearity Nonlinearity::fitzhugh_nagumo() {
    // -u (1 - u)^2 = -u + 2u^2 - u^3
    auto f = make_polynomial("fhn", {-1.0, 2.0, -1.0});
    f.coeffs_ = {-1.0, 2.0, -1.0};
    return f;
}

Nonlinearity Nonlinearity::fisher() {
    auto f = make_polynomial("fisher", {1.0, -1.0});
    f.coeffs_ = {1.0, -1.0};
    return f;
}

Nonlinearity Nonlinearity::polynomial(std::vector<double> coeffs) {
    require(!coeffs.empty() && coeffs.front() != 0.0,
            "Nonlinearity::polynomial: the linear coefficient (lambda) must be nonzero");
    auto f = make_polynomial("poly", coeffs);
    f.coeffs_ = std::move(coeffs);
    return f;
}

Nonlinearity Nonlinearity::linear(double lambda) {
    Nonlinearity f(
        "linear", [lambda](double u) { return lambda * u; }, [lambda](double) { return lambda; },
        [](double) { return 0.0; }, lambda);
    f.coeffs_ = {lambda};
    return f;
}

Nonlinearity Nonlinearity::zero() {
    Nonlinearity f(
        "zero", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
        0.0);
    f.coeffs_ = {0.0};
    return f;
}

Nonlinearity Nonlinearity::linearized() const { return linear(lambda_); }

}  // namespace backstep
