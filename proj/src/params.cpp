#include "hsds/params.hpp"

#include "hsds/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace hsds {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::DimensionTooSmall: return "dimension-too-small";
    case ErrorKind::GammaOutOfRange: return "gamma-out-of-range";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::NonpositiveArgument: return "nonpositive-argument";
    case ErrorKind::DomainError: return "domain-error";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::PreconditionViolated: return "precondition-violated";
    case ErrorKind::RootResidualTooLarge: return "root-residual-too-large";
    case ErrorKind::UnequalGamma: return "unequal-gamma";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::NegativeComponent: return "negative-component";
    case ErrorKind::StepSizeUnderflow: return "step-size-underflow";
    case ErrorKind::BracketNotFound: return "bracket-not-found";
    case ErrorKind::EmptyTrajectory: return "empty-trajectory";
    case ErrorKind::MaximumOnBoundary: return "maximum-on-boundary";
    case ErrorKind::TauNotARoot: return "tau-not-a-root";
    case ErrorKind::DegenerateFit: return "degenerate-fit";
    case ErrorKind::IoError: return "io-error";
    }
    return "unknown";
}

namespace {

void require_dimension(int n)
{
    if (n < 3)
        throw Error(ErrorKind::DimensionTooSmall, fmt::format("dimension n = {} must be at least 3", n));
}

void require_gamma(int n, double gamma)
{
    const double lambda = hardy_constant(n);
    if (!(gamma >= 0.0 && gamma < lambda))
        throw Error(ErrorKind::GammaOutOfRange,
                    fmt::format("gamma = {} outside [0, {}) for n = {}", gamma, lambda, n));
}

} // namespace

double hardy_constant(int n)
{
    require_dimension(n);
    const double half = 0.5 * (n - 2);
    return half * half;
}

double critical_exponent(int n)
{
    require_dimension(n);
    return 2.0 * n / (n - 2);
}

std::pair<double, double> tau_exponents(int n, double gamma)
{
    require_gamma(n, gamma);
    const double delta = 0.5 * (n - 2);
    const double kappa = std::sqrt(hardy_constant(n) - gamma);
    // tau1 * tau2 = gamma gives the small root without cancellation.
    const double tau2 = delta + kappa;
    const double tau1 = gamma / tau2;
    return {tau1, tau2};
}

double amplitude(int n, double gamma)
{
    require_gamma(n, gamma);
    // n - 2 - 2 tau1 = 2 kappa
    const double kappa = std::sqrt(hardy_constant(n) - gamma);
    const double base = n * 4.0 * kappa * kappa / (n - 2);
    return std::pow(base, 0.25 * (n - 2));
}

DerivedConstants DerivedConstants::compute(int n, double gamma)
{
    require_gamma(n, gamma);
    DerivedConstants d{};
    d.two_star = critical_exponent(n);
    d.lambda_n = hardy_constant(n);
    d.delta = 0.5 * (n - 2);
    std::tie(d.tau1, d.tau2) = tau_exponents(n, gamma);
    d.amplitude = hsds::amplitude(n, gamma);
    d.kappa = std::sqrt(d.lambda_n - gamma);
    return d;
}

ProblemParams::ProblemParams(int n, double gamma1, double gamma2, double nu, double alpha, double beta)
    : n_(n), gamma1_(gamma1), gamma2_(gamma2), nu_(nu), alpha_(alpha), beta_(beta)
{
    require_dimension(n);
    require_gamma(n, gamma1);
    require_gamma(n, gamma2);
    two_star_ = critical_exponent(n);
    lambda_n_ = hardy_constant(n);
    if (!(nu >= 0.0) || !std::isfinite(nu))
        throw Error(ErrorKind::InvalidParameter, fmt::format("coupling nu = {} must be finite and >= 0", nu));
    if (!(alpha > 1.0) || !(beta > 1.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw Error(ErrorKind::InvalidParameter,
                    fmt::format("exponents alpha = {}, beta = {} must exceed 1", alpha, beta));
    if (std::abs(alpha + beta - two_star_) > kExponentSumTolerance)
        throw Error(ErrorKind::InvalidParameter,
                    fmt::format("alpha + beta = {} differs from 2* = {}", alpha + beta, two_star_));
    derived_ = DerivedConstants::compute(n, gamma1);
}

ProblemParams ProblemParams::with_alpha(int n, double gamma, double nu, double alpha)
{
    return with_alpha(n, gamma, gamma, nu, alpha);
}

ProblemParams ProblemParams::with_alpha(int n, double gamma1, double gamma2, double nu, double alpha)
{
    return ProblemParams(n, gamma1, gamma2, nu, alpha, critical_exponent(n) - alpha);
}

double ProblemParams::gamma() const
{
    if (!same_gamma())
        throw Error(ErrorKind::UnequalGamma,
                    fmt::format("gamma1 = {} and gamma2 = {} differ; the classification covers a single gamma "
                                "(the two-gamma system is only known to be radially symmetric)",
                                gamma1_, gamma2_));
    return gamma1_;
}

const DerivedConstants& ProblemParams::derived() const
{
    (void)gamma();
    return derived_;
}

} // namespace hsds
