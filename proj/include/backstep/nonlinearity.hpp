#pragma once

#include <functional>
#include <string>
#include <vector>

namespace backstep {

/// Reaction term f_NL of u_t = u_xx + f_NL(u), with analytic derivatives.
///
/// The backstepping design uses lambda = f_NL'(0); the remainder
/// f(u) = f_NL(u) - lambda u is what the Lyapunov analysis treats as small.
class Nonlinearity {
public:
    using Fn = std::function<double(double)>;

    // Checks eval(0) == 0 and d1(0) == lambda.
    Nonlinearity(std::string name, Fn eval, Fn d1, Fn d2, double lambda);

    // -u (1 - u)^2, lambda = -1.
    static Nonlinearity fitzhugh_nagumo();
    // u (1 - u), lambda = 1.
    static Nonlinearity fisher();
    // sum_k coeffs[k-1] u^k; coeffs[0] is lambda and must be nonzero.
    static Nonlinearity polynomial(std::vector<double> coeffs);
    // lambda u.
    static Nonlinearity linear(double lambda);
    // f_NL = 0. Heat-equation test double; violates lambda != 0, so
    // closed-loop simulation rejects it.
    static Nonlinearity zero();

    double operator()(double u) const { return eval_(u); }
    double d1(double u) const { return d1_(u); }
    double d2(double u) const { return d2_(u); }
    double lambda() const noexcept { return lambda_; }
    const std::string& name() const noexcept { return name_; }

    // The remainder f(u) = f_NL(u) - lambda u and its derivatives.
    double remainder(double u) const { return eval_(u) - lambda_ * u; }
    double remainder_d1(double u) const { return d1_(u) - lambda_; }
    double remainder_d2(double u) const { return d2_(u); }

    // lambda u with the same lambda.
    Nonlinearity linearized() const;

    // Polynomial coefficients when the nonlinearity is polynomial (all
    // built-ins are); empty otherwise.
    const std::vector<double>& coefficients() const noexcept { return coeffs_; }

private:
    std::string name_;
    Fn eval_;
    Fn d1_;
    Fn d2_;
    double lambda_;
    std::vector<double> coeffs_;
};

}  // namespace backstep
