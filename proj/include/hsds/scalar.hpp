#pragma once

#include "hsds/params.hpp"

#include <functional>
#include <span>

namespace hsds {

/// Radial function r -> u(r), r > 0.
using RadialFunction = std::function<double(double)>;

/// Smallest radius at which profiles are evaluated; below it a DomainError is raised.
inline constexpr double kMinRadius = 1e-300;

struct RadialDerivatives {
    double u;
    double du;
    double d2u;
};

/// The explicit radial solution U_mu of -Lap u = gamma u/|x|^2 + u^(2*-1),
///
///   U_mu(r) = mu^{-delta} U(r/mu),  U(r) = A / (r^tau1 (1 + r^{2 kappa/delta})^delta),
///
/// which is the Aubin-Talenti bubble centred at the origin when gamma = 0.
/// Only the common gamma of the parameter tuple is used.
class ScalarProfile {
public:
    ScalarProfile(const ProblemParams& params, double mu);

    const ProblemParams& params() const noexcept { return params_; }
    double mu() const noexcept { return mu_; }
    const DerivedConstants& derived() const noexcept { return derived_; }

    /// Exponent 2 - 4 tau1/(n-2), stored as 2 kappa / delta.
    double shape_exponent() const noexcept { return shape_exponent_; }

    double value(double r) const;
    RadialDerivatives derivatives(double r) const;
    /// Value and radial derivatives of r^tau U_mu(r), computed from its own closed
    /// form so that the weighted equations see no cancellation from the product rule.
    RadialDerivatives weighted_derivatives(double r, double tau) const;

    /// lim_{r->0} r^tau1 U_mu(r) = A mu^{-kappa}.
    double limit_at_zero() const noexcept;
    /// lim_{r->inf} r^tau2 U_mu(r) = A mu^{kappa}.
    double limit_at_infinity() const noexcept;

    RadialFunction as_function(double scale = 1.0) const;

private:
    void check_radius(double r) const;

    ProblemParams params_;
    double mu_;
    DerivedConstants derived_;
    double shape_exponent_;
};

double profile_value(const ScalarProfile& profile, double r);
RadialDerivatives profile_radial_derivatives(const ScalarProfile& profile, double r);

/// Aubin-Talenti bubble V_{lambda,0} evaluated at |x - x0| = r.
double aubin_talenti_bubble(int n, double lambda, double r);

/// r^{2-n} u(1/r): radial form of the Kelvin transform |x|^{2-n} u(x/|x|^2).
double kelvin_transform(const RadialFunction& u, int n, double r);

/// r^tau u(r).
double weighted_transform(const RadialFunction& u, double tau, double r);

struct DecayBounds {
    double lower;
    double upper;
};

/// Sampled min/max of r^exponent * (Kelvin u)(r) on a log grid over [r_lo, r_hi].
DecayBounds kelvin_decay_bounds(const RadialFunction& u, int n, double exponent, double r_lo, double r_hi,
                                int samples = 256);

/// Translated Hardy weight |x - x0 |x|^2|^2, evaluated in expanded form.
double hardy_weight_f(std::span<const double> x, std::span<const double> x0);

/// d/dx1 of hardy_weight_f; requires x0[0] == 0.
double hardy_weight_dx1(std::span<const double> x, std::span<const double> x0);

/// Limits of the weighted components at both ends of (0, inf).
struct AsymptoticData {
    double u0;
    double v0;
    double u_inf;
    double v_inf;
    double L_minus;
    double L_plus;
};

/// Two-level Richardson extrapolation of the limit of g(r) as r -> 0 (toward_zero)
/// or r -> inf, sampled at r = 10^{-+k}, k = 4..8, assuming g = g0 + c1 r^{+-q} + c2 r^{+-2q} + ...
/// Throws NonConvergence when the last two extrapolants differ by more than 1e-6 relative.
double extrapolate_limit(const RadialFunction& g, bool toward_zero, double correction_exponent);

/// Limits of r^tau1 u, r^tau1 v at 0 and r^tau2 u, r^tau2 v at infinity for
/// u = c1 U_mu, v = c2 U_mu, and the quotient limits L_minus = u0/v0, L_plus = u_inf/v_inf.
AsymptoticData asymptotic_limits(const ScalarProfile& profile, double c1, double c2);

} // namespace hsds
