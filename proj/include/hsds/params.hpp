#pragma once

#include <utility>

namespace hsds {

/// Absolute tolerance on alpha + beta = 2*.
inline constexpr double kExponentSumTolerance = 1e-12;

/// Hardy constant ((n-2)/2)^2.
double hardy_constant(int n);

/// Critical Sobolev exponent 2n/(n-2).
double critical_exponent(int n);

/// Roots (tau1, tau2) of tau^2 - (n-2) tau + gamma = 0, tau1 <= tau2.
std::pair<double, double> tau_exponents(int n, double gamma);

/// Amplitude A(n, gamma) of the scalar profile, built on tau1.
double amplitude(int n, double gamma);

/// Scalar constants derived from (n, gamma).
struct DerivedConstants {
    double two_star;
    double lambda_n;
    double delta;
    double tau1;
    double tau2;
    double amplitude;
    double kappa;  ///< sqrt(lambda_n - gamma) = delta - tau1

    static DerivedConstants compute(int n, double gamma);
};

/// Parameter tuple (n, gamma1, gamma2, nu, alpha, beta) of the coupled system.
///
/// Construction validates every constraint: n >= 3, 0 <= gamma_i < Lambda_n,
/// alpha, beta > 1, alpha + beta = 2* and nu >= 0 (nu = 0 is the decoupled
/// scalar mode). Instances are immutable.
class ProblemParams {
public:
    ProblemParams(int n, double gamma1, double gamma2, double nu, double alpha, double beta);

    /// Single-gamma system with beta = 2* - alpha.
    static ProblemParams with_alpha(int n, double gamma, double nu, double alpha);
    /// Two-gamma system with beta = 2* - alpha.
    static ProblemParams with_alpha(int n, double gamma1, double gamma2, double nu, double alpha);

    int n() const noexcept { return n_; }
    double gamma1() const noexcept { return gamma1_; }
    double gamma2() const noexcept { return gamma2_; }
    double nu() const noexcept { return nu_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    bool same_gamma() const noexcept { return gamma1_ == gamma2_; }
    /// The common gamma; throws UnequalGamma when gamma1 != gamma2.
    double gamma() const;

    double two_star() const noexcept { return two_star_; }
    double lambda_n() const noexcept { return lambda_n_; }
    double delta() const noexcept { return 0.5 * (n_ - 2); }

    /// Derived constants for the common gamma.
    const DerivedConstants& derived() const;

private:
    int n_;
    double gamma1_;
    double gamma2_;
    double nu_;
    double alpha_;
    double beta_;
    double two_star_;
    double lambda_n_;
    DerivedConstants derived_;
};

} // namespace hsds
