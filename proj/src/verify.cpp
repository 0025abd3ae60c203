#include "hsds/verify.hpp"

#include "hsds/error.hpp"
#include "hsds/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <sstream>

namespace hsds {

RadialGrid::RadialGrid(std::vector<double> points, Spacing spacing)
    : points_(std::move(points)), spacing_(spacing)
{
    if (points_.empty())
        throw Error(ErrorKind::PreconditionViolated, "radial grid must not be empty");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i] > 0.0) || !std::isfinite(points_[i]))
            throw Error(ErrorKind::NonpositiveArgument, fmt::format("grid point {} is not positive", points_[i]));
        if (i > 0 && !(points_[i] > points_[i - 1]))
            throw Error(ErrorKind::PreconditionViolated, "grid points must be strictly increasing");
    }
}

RadialGrid RadialGrid::log_uniform(double r_lo, double r_hi, int points)
{
    if (!(r_lo > 0.0) || !(r_hi > r_lo) || points < 2)
        throw Error(ErrorKind::PreconditionViolated, "log grid needs 0 < r_lo < r_hi and at least 2 points");
    std::vector<double> r(points);
    const double step = std::log(r_hi / r_lo) / (points - 1);
    for (int i = 0; i < points; ++i)
        r[i] = i + 1 == points ? r_hi : r_lo * std::exp(step * i);
    return RadialGrid(std::move(r), Spacing::LogUniform);
}

RadialGrid RadialGrid::custom(std::vector<double> points)
{
    return RadialGrid(std::move(points), Spacing::Custom);
}

RadialGrid RadialGrid::default_grid()
{
    return log_uniform(1e-6, 1e6, 2048);
}

double fd_derivative(const RadialFunction& u, double r, double h, int order)
{
    if (!(h > 0.0) || !(r - 2.0 * h > 0.0))
        throw Error(ErrorKind::PreconditionViolated,
                    fmt::format("stencil [{}, {}] leaves the domain r > 0", r - 2.0 * h, r + 2.0 * h));
    switch (order) {
    case 1: return (u(r + h) - u(r - h)) / (2.0 * h);
    case 2: return (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
    default: throw Error(ErrorKind::PreconditionViolated, fmt::format("derivative order {} not in {{1, 2}}", order));
    }
}

double convergence_order(std::span<const std::pair<double, double>> errors)
{
    if (errors.size() < 3)
        throw Error(ErrorKind::PreconditionViolated, "convergence study needs at least 3 points");
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (!(errors[i].first < errors[i - 1].first))
            throw Error(ErrorKind::PreconditionViolated, "step sizes must be strictly decreasing");
    constexpr double kRoundoffFloor = 1e-15;
    std::vector<std::pair<double, double>> logs;
    for (const auto& [h, err] : errors) {
        if (!(h > 0.0))
            throw Error(ErrorKind::NonpositiveArgument, "step sizes must be positive");
        if (err > kRoundoffFloor)
            logs.emplace_back(std::log(h), std::log(err));
    }
    if (logs.size() < 2)
        throw Error(ErrorKind::DegenerateFit, "errors sit at the roundoff floor; no slope can be fitted");
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= logs.size();
    my /= logs.size();
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : logs) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    return sxy / sxx;
}

std::string_view to_string(Comparison comparison)
{
    return comparison == Comparison::AtMost ? "<=" : ">=";
}

namespace {

class ReportBuilder {
public:
    void at_most(std::string name, double measured, double threshold)
    {
        add(std::move(name), measured, threshold, Comparison::AtMost);
    }

    void at_least(std::string name, double measured, double threshold)
    {
        add(std::move(name), measured, threshold, Comparison::AtLeast);
    }

    std::vector<Check> take() { return std::move(checks_); }

private:
    void add(std::string name, double measured, double threshold, Comparison cmp)
    {
        const bool pass = std::isfinite(measured) &&
                          (cmp == Comparison::AtMost ? measured <= threshold : measured >= threshold);
        checks_.push_back({std::move(name), measured, threshold, cmp, pass});
    }

    std::vector<Check> checks_;
};

double relative_error(double value, double target)
{
    return std::abs(value - target) / std::abs(target);
}

double sup_distance_to_exact(const EFTrajectory& traj, const SynchronizedFamily& family)
{
    double sup = 0.0;
    for (const EFState& s : traj.states) {
        const EFState e = exact_ef_solution(family, s.t);
        sup = std::max({sup, std::abs(s.y_u - e.y_u), std::abs(s.p_u - e.p_u), std::abs(s.y_v - e.y_v),
                        std::abs(s.p_v - e.p_v)});
    }
    return sup;
}

void family_checks(ReportBuilder& out, const std::string& prefix, const SynchronizedFamily& family,
                   const ProblemParams& p, const RadialGrid& grid, const VerificationOptions& opts)
{
    const auto& d = family.profile.derived();
    const double c = family.root.c_tilde;
    const double mu0 = family.profile.mu();
    const double t0 = std::log(mu0);

    out.at_most(prefix + "coupling.root_residual",
                std::abs(coupling_f(c, p)) / std::max(1.0, coupling_f_scale(c, p)), 1e-12);
    out.at_most(prefix + "coupling.ratio_identity", relative_error(family.c1 / family.c2, c), 1e-13);
    const auto [res1, res2] = verify_constants_system(family.c1, family.c2, p);
    out.at_most(prefix + "coupling.constants_residual_1", res1, 1e-12);
    out.at_most(prefix + "coupling.constants_residual_2", res2, 1e-12);

    const auto [radial_u, radial_v] = radial_system_residual(family, grid.points());
    out.at_most(prefix + "ode.radial_residual_u", radial_u, 1e-9);
    out.at_most(prefix + "ode.radial_residual_v", radial_v, 1e-9);
    const auto [w1_u, w1_v] = weighted_system_residual(family, d.tau1, grid.points());
    out.at_most(prefix + "ode.weighted_residual_tau1_u", w1_u, 1e-9);
    out.at_most(prefix + "ode.weighted_residual_tau1_v", w1_v, 1e-9);
    const auto [w2_u, w2_v] = weighted_system_residual(family, d.tau2, grid.points());
    out.at_most(prefix + "ode.weighted_residual_tau2_u", w2_u, 1e-9);
    out.at_most(prefix + "ode.weighted_residual_tau2_v", w2_v, 1e-9);
    std::vector<double> t_grid(grid.size());
    std::transform(grid.points().begin(), grid.points().end(), t_grid.begin(), [](double r) { return std::log(r); });
    const auto [ef_u, ef_v] = ef_system_residual(family, t_grid);
    out.at_most(prefix + "ode.ef_residual_u", ef_u, 1e-9);
    out.at_most(prefix + "ode.ef_residual_v", ef_v, 1e-9);

    try {
        const AsymptoticData limits = asymptotic_limits(family);
        out.at_most(prefix + "scalar.limit_at_zero_u", relative_error(limits.u0, family.c1 * family.profile.limit_at_zero()),
                    1e-6);
        out.at_most(prefix + "scalar.limit_at_infinity_u",
                    relative_error(limits.u_inf, family.c1 * family.profile.limit_at_infinity()), 1e-6);
        out.at_most(prefix + "scalar.quotient_at_zero", relative_error(limits.L_minus, family.c1 / family.c2), 1e-10);
        out.at_most(prefix + "scalar.quotient_at_infinity", relative_error(limits.L_plus, family.c1 / family.c2),
                    1e-10);
    } catch (const Error&) {
        out.at_most(prefix + "scalar.limit_at_zero_u", std::numeric_limits<double>::infinity(), 1e-6);
    }

    const double span = opts.integration_half_span;
    const EFState peak = exact_ef_solution(family, t0);
    const EFTrajectory forward = integrate(peak, {t0, t0 + span}, p, opts.integration_tol);
    const EFTrajectory backward = integrate(peak, {t0, t0 - span}, p, opts.integration_tol);
    const bool both_completed =
        forward.termination == Termination::Completed && backward.termination == Termination::Completed;
    out.at_most(prefix + "ode.integration_sup_error",
                both_completed ? std::max(sup_distance_to_exact(forward, family),
                                          sup_distance_to_exact(backward, family))
                               : std::numeric_limits<double>::infinity(),
                1e-6);

    // Off-centre start so that the maximum is crossed by the integrator.
    const EFTrajectory sweep = integrate(exact_ef_solution(family, t0 - span), {t0 - span, t0 + span}, p,
                                         opts.integration_tol);
    if (sweep.termination == Termination::Completed) {
        out.at_most(prefix + "ode.proportionality_defect", proportionality_defect(sweep, c), 1e-8);
        try {
            const auto [tu, tv] = simultaneous_max_check(sweep);
            out.at_most(prefix + "ode.simultaneous_max_gap", std::abs(tu - tv), 1e-6);
            out.at_most(prefix + "ode.max_location_offset", std::max(std::abs(tu - t0), std::abs(tv - t0)), 1e-6);
        } catch (const Error&) {
            out.at_most(prefix + "ode.simultaneous_max_gap", std::numeric_limits<double>::infinity(), 1e-6);
        }
        const EFState& first = sweep.states.front();
        const EFState& last = sweep.states.back();
        out.at_most(prefix + "ode.quotient_limit_minus", relative_error(first.y_u / first.y_v, c), 1e-6);
        out.at_most(prefix + "ode.quotient_limit_plus", relative_error(last.y_u / last.y_v, c), 1e-6);
    } else {
        out.at_most(prefix + "ode.proportionality_defect", std::numeric_limits<double>::infinity(), 1e-8);
    }

    const double target = family.c1 * d.amplitude * std::pow(2.0, -d.delta);
    try {
        const double a_star = shoot_synchronized(p, family.root);
        out.at_most(prefix + "ode.shooting_recovery", relative_error(a_star, target), 1e-6);
    } catch (const Error&) {
        out.at_most(prefix + "ode.shooting_recovery", std::numeric_limits<double>::infinity(), 1e-6);
    }

    if (p.nu() == 0.0) {
        double max_energy = 0.0;
        for (double t : t_grid)
            max_energy = std::max(max_energy, std::abs(scalar_energy(exact_ef_solution(family, t), p)));
        out.at_most(prefix + "ode.scalar_energy", max_energy, 1e-10);
    }
}

} // namespace

VerificationReport full_verification(const ProblemParams& p, double mu0, const VerificationOptions& opts)
{
    Classification classification = classify(p, mu0);
    const RadialGrid grid = RadialGrid::log_uniform(1e-6, 1e6, opts.grid_points);

    VerificationReport report{p, mu0, {}, classification.warnings, {}, false};
    ReportBuilder builder;
    builder.at_least("coupling.family_count", double(classification.families.size()), 1.0);
    for (std::size_t i = 0; i < classification.families.size(); ++i) {
        SynchronizedFamily family = classification.families[i];
        family.c1 *= opts.amplitude_perturbation;
        family.c2 *= opts.amplitude_perturbation;
        report.families.push_back({family.root.c_tilde, family.c1, family.c2, family.root.f_prime});
        family_checks(builder, fmt::format("family[{}].", i), family, p, grid, opts);
    }
    report.checks = builder.take();
    report.overall = std::all_of(report.checks.begin(), report.checks.end(), [](const Check& c) { return c.pass; });
    return report;
}

nlohmann::ordered_json to_json(const VerificationReport& report)
{
    nlohmann::ordered_json j;
    const ProblemParams& p = report.params;
    j["params"] = {{"n", p.n()},         {"gamma1", p.gamma1()}, {"gamma2", p.gamma2()},
                   {"nu", p.nu()},       {"alpha", p.alpha()},   {"beta", p.beta()}};
    j["mu0"] = report.mu0;
    j["families"] = nlohmann::ordered_json::array();
    for (const FamilySummary& f : report.families)
        j["families"].push_back({{"c_tilde", f.c_tilde}, {"c1", f.c1}, {"c2", f.c2}, {"f_prime", f.f_prime}});
    j["warnings"] = report.warnings;
    j["checks"] = nlohmann::ordered_json::array();
    for (const Check& c : report.checks)
        j["checks"].push_back({{"name", c.name},
                               {"measured", c.measured},
                               {"threshold", c.threshold},
                               {"comparison", std::string(to_string(c.comparison))},
                               {"pass", c.pass}});
    j["overall"] = report.overall;
    return j;
}

std::string to_text(const VerificationReport& report)
{
    std::ostringstream out;
    const ProblemParams& p = report.params;
    out << fmt::format("params.n = {}\n", p.n());
    out << fmt::format("params.gamma1 = {:.17g}\nparams.gamma2 = {:.17g}\n", p.gamma1(), p.gamma2());
    out << fmt::format("params.nu = {:.17g}\nparams.alpha = {:.17g}\nparams.beta = {:.17g}\n", p.nu(), p.alpha(),
                       p.beta());
    out << fmt::format("mu0 = {:.17g}\n", report.mu0);
    for (std::size_t i = 0; i < report.families.size(); ++i) {
        const FamilySummary& f = report.families[i];
        out << fmt::format("families[{0}].c_tilde = {1:.17g}\nfamilies[{0}].c1 = {2:.17g}\n"
                           "families[{0}].c2 = {3:.17g}\nfamilies[{0}].f_prime = {4:.17g}\n",
                           i, f.c_tilde, f.c1, f.c2, f.f_prime);
    }
    for (std::size_t i = 0; i < report.warnings.size(); ++i)
        out << fmt::format("warnings[{}] = {}\n", i, report.warnings[i]);
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const Check& c = report.checks[i];
        out << fmt::format("checks[{0}].name = {1}\nchecks[{0}].measured = {2:.17g}\n"
                           "checks[{0}].threshold = {3:.17g}\nchecks[{0}].comparison = {4}\n"
                           "checks[{0}].pass = {5}\n",
                           i, c.name, c.measured, c.threshold, to_string(c.comparison), c.pass);
    }
    out << fmt::format("overall = {}\n", report.overall);
    return out.str();
}

void write_report_csv(std::ostream& out, const VerificationReport& report)
{
    out << "name,measured,threshold,comparison,pass\n";
    for (const Check& c : report.checks)
        out << fmt::format("{},{:.17g},{:.17g},{},{}\n", c.name, c.measured, c.threshold, to_string(c.comparison),
                           c.pass ? "true" : "false");
}

std::pair<double, double> tabulated_profile_residual(std::span<const double> r, std::span<const double> u,
                                                     std::span<const double> v, const ProblemParams& p)
{
    const std::size_t m = r.size();
    if (m < 3 || u.size() != m || v.size() != m)
        throw Error(ErrorKind::DimensionMismatch, "tabulated profile needs >= 3 rows of equal length");
    const double delta = p.delta();
    const double kappa2 = p.lambda_n() - p.gamma();
    const double nu = p.nu(), a = p.alpha(), b = p.beta(), e = p.two_star() - 1.0;
    std::vector<double> t(m), yu(m), yv(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(r[i] > 0.0) || (i > 0 && !(r[i] > r[i - 1])))
            throw Error(ErrorKind::PreconditionViolated, "tabulated radii must be positive and increasing");
        t[i] = std::log(r[i]);
        yu[i] = std::pow(r[i], delta) * u[i];
        yv[i] = std::pow(r[i], delta) * v[i];
    }
    double max_u = 0.0, max_v = 0.0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double h0 = t[i] - t[i - 1];
        const double h1 = t[i + 1] - t[i];
        // Three-point second derivative on a possibly uneven stencil.
        const auto second = [&](const std::vector<double>& y) {
            return 2.0 * (h0 * y[i + 1] - (h0 + h1) * y[i] + h1 * y[i - 1]) / (h0 * h1 * (h0 + h1));
        };
        const double su = second(yu), sv = second(yv);
        const std::array<double, 4> eq_u{su, -kappa2 * yu[i], std::pow(yu[i], e),
                                         nu * a * std::pow(yu[i], a - 1.0) * std::pow(yv[i], b)};
        const std::array<double, 4> eq_v{sv, -kappa2 * yv[i], std::pow(yv[i], e),
                                         nu * b * std::pow(yu[i], a) * std::pow(yv[i], b - 1.0)};
        const auto norm = [](const std::array<double, 4>& terms) {
            double sum = 0.0, largest = 0.0;
            for (double x : terms) {
                sum += x;
                largest = std::max(largest, std::abs(x));
            }
            return largest > 0.0 ? std::abs(sum) / largest : 0.0;
        };
        max_u = std::max(max_u, norm(eq_u));
        max_v = std::max(max_v, norm(eq_v));
    }
    return {max_u, max_v};
}

} // namespace hsds
