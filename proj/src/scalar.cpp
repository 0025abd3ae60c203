#include "hsds/scalar.hpp"

#include "hsds/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace hsds {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// 1 / (1 + e^{-x})
double logistic(double x)
{
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

} // namespace

ScalarProfile::ScalarProfile(const ProblemParams& params, double mu)
    : params_(params), mu_(mu), derived_(params.derived())
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("scale mu = {} must be positive", mu));
    shape_exponent_ = 2.0 * derived_.kappa / derived_.delta;
}

void ScalarProfile::check_radius(double r) const
{
    if (!(r > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("radius r = {} must be positive", r));
    if (r < kMinRadius || !std::isfinite(r))
        throw Error(ErrorKind::DomainError, fmt::format("radius r = {} outside the evaluable range", r));
}

double ScalarProfile::value(double r) const
{
    check_radius(r);
    const double log_rho = std::log(r / mu_);
    const double x = shape_exponent_ * log_rho;
    const double log_value = std::log(derived_.amplitude) - derived_.delta * std::log(mu_) -
                             derived_.tau1 * log_rho - derived_.delta * softplus(x);
    return std::exp(log_value);
}

RadialDerivatives ScalarProfile::derivatives(double r) const
{
    return weighted_derivatives(r, 0.0);
}

RadialDerivatives ScalarProfile::weighted_derivatives(double r, double tau) const
{
    const double u = tau == 0.0 ? value(r) : std::pow(r, tau) * value(r);
    const double x = shape_exponent_ * std::log(r / mu_);
    const double s = logistic(x);
    const double one_minus_s = logistic(-x);
    // r w'/w for w = r^tau U_mu
    const double log_slope = (tau - derived_.tau1) - 2.0 * derived_.kappa * s;
    const double du = u * log_slope / r;
    const double d2u = u / (r * r) *
                       (log_slope * log_slope - log_slope -
                        2.0 * derived_.kappa * shape_exponent_ * s * one_minus_s);
    return {u, du, d2u};
}

double ScalarProfile::limit_at_zero() const noexcept
{
    return derived_.amplitude * std::pow(mu_, -derived_.kappa);
}

double ScalarProfile::limit_at_infinity() const noexcept
{
    return derived_.amplitude * std::pow(mu_, derived_.kappa);
}

RadialFunction ScalarProfile::as_function(double scale) const
{
    return [profile = *this, scale](double r) { return scale * profile.value(r); };
}

double profile_value(const ScalarProfile& profile, double r)
{
    return profile.value(r);
}

RadialDerivatives profile_radial_derivatives(const ScalarProfile& profile, double r)
{
    return profile.derivatives(r);
}

double aubin_talenti_bubble(int n, double lambda, double r)
{
    if (n < 3)
        throw Error(ErrorKind::DimensionTooSmall, fmt::format("dimension n = {} must be at least 3", n));
    if (!(lambda > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("bubble scale {} must be positive", lambda));
    const double base = lambda * std::sqrt(double(n) * (n - 2)) / (lambda * lambda + r * r);
    return std::pow(base, 0.5 * (n - 2));
}

double kelvin_transform(const RadialFunction& u, int n, double r)
{
    if (!(r > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("radius r = {} must be positive", r));
    return std::pow(r, 2 - n) * u(1.0 / r);
}

double weighted_transform(const RadialFunction& u, double tau, double r)
{
    if (!(r > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("radius r = {} must be positive", r));
    return std::pow(r, tau) * u(r);
}

DecayBounds kelvin_decay_bounds(const RadialFunction& u, int n, double exponent, double r_lo, double r_hi,
                                int samples)
{
    if (!(r_lo > 0.0) || !(r_hi > r_lo) || samples < 2)
        throw Error(ErrorKind::PreconditionViolated, "decay bounds need 0 < r_lo < r_hi and >= 2 samples");
    DecayBounds bounds{std::numeric_limits<double>::infinity(), 0.0};
    const double step = std::log(r_hi / r_lo) / (samples - 1);
    for (int i = 0; i < samples; ++i) {
        const double r = i + 1 == samples ? r_hi : r_lo * std::exp(step * i);
        const double w = std::pow(r, exponent) * kelvin_transform(u, n, r);
        bounds.lower = std::min(bounds.lower, w);
        bounds.upper = std::max(bounds.upper, w);
    }
    return bounds;
}

namespace {

void require_same_size(std::span<const double> x, std::span<const double> x0)
{
    if (x.size() != x0.size() || x.empty())
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("point has {} coordinates, pole has {}", x.size(), x0.size()));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

} // namespace

double hardy_weight_f(std::span<const double> x, std::span<const double> x0)
{
    require_same_size(x, x0);
    const double xx = dot(x, x);
    return xx * (1.0 - 2.0 * dot(x, x0) + dot(x0, x0) * xx);
}

double hardy_weight_dx1(std::span<const double> x, std::span<const double> x0)
{
    require_same_size(x, x0);
    if (x0[0] != 0.0)
        throw Error(ErrorKind::PreconditionViolated,
                    fmt::format("pole must lie on the hyperplane x1 = 0, got x0_1 = {}", x0[0]));
    return 2.0 * x[0] * (1.0 - 2.0 * dot(x, x0) + 2.0 * dot(x0, x0) * dot(x, x));
}

double extrapolate_limit(const RadialFunction& g, bool toward_zero, double correction_exponent)
{
    constexpr int kFirst = 4;
    constexpr int kLevels = 5;  // k = 4..8
    std::array<double, kLevels> samples{};
    for (int i = 0; i < kLevels; ++i) {
        const double r = std::pow(10.0, toward_zero ? -(kFirst + i) : (kFirst + i));
        samples[i] = g(r);
    }
    // Successive radii shrink the correction r^{+-q} by 10^q.
    const double ratio1 = std::pow(10.0, correction_exponent);
    const double ratio2 = ratio1 * ratio1;
    std::array<double, kLevels - 1> first{};
    for (int i = 0; i + 1 < kLevels; ++i)
        first[i] = (ratio1 * samples[i + 1] - samples[i]) / (ratio1 - 1.0);
    std::array<double, kLevels - 2> second{};
    for (int i = 0; i + 1 < kLevels - 1; ++i)
        second[i] = (ratio2 * first[i + 1] - first[i]) / (ratio2 - 1.0);

    const double last = second.back();
    const double previous = second[second.size() - 2];
    const double scale = std::max(std::abs(last), std::numeric_limits<double>::min());
    if (!std::isfinite(last) || std::abs(last - previous) > 1e-6 * scale)
        throw Error(ErrorKind::NonConvergence,
                    fmt::format("extrapolated limit did not settle: {} vs {}", previous, last));
    return last;
}

AsymptoticData asymptotic_limits(const ScalarProfile& profile, double c1, double c2)
{
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, "component constants must be positive");
    const auto& d = profile.derived();
    const double q = profile.shape_exponent();
    const auto u = profile.as_function(c1);
    const auto v = profile.as_function(c2);
    const auto at_zero = [&](const RadialFunction& w) {
        return extrapolate_limit([&](double r) { return weighted_transform(w, d.tau1, r); }, true, q);
    };
    const auto at_inf = [&](const RadialFunction& w) {
        return extrapolate_limit([&](double r) { return weighted_transform(w, d.tau2, r); }, false, q);
    };
    AsymptoticData data{};
    data.u0 = at_zero(u);
    data.v0 = at_zero(v);
    data.u_inf = at_inf(u);
    data.v_inf = at_inf(v);
    data.L_minus = data.u0 / data.v0;
    data.L_plus = data.u_inf / data.v_inf;
    return data;
}

} // namespace hsds
