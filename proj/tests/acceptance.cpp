// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "hsds/coupling.hpp"
#include "hsds/error.hpp"
#include "hsds/ode.hpp"
#include "hsds/params.hpp"
#include "hsds/scalar.hpp"
#include "hsds/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace hsds;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& what)
    {
        if (!condition) {
            pass = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
};

double rel_err(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// (n, gamma, nu, alpha = 2*/2) over {3,4,5} x {0, Lambda_n/2} x {0, 1}.
std::vector<ProblemParams> parameter_matrix()
{
    std::vector<ProblemParams> out;
    for (int n : {3, 4, 5})
        for (double gamma : {0.0, hardy_constant(n) / 2})
            for (double nu : {0.0, 1.0})
                out.push_back(ProblemParams::with_alpha(n, gamma, nu, critical_exponent(n) / 2));
    return out;
}

std::string label(const ProblemParams& p)
{
    return fmt::format("n={} gamma={:g} nu={:g} alpha={:g}", p.n(), p.gamma(), p.nu(), p.alpha());
}

double sup_error(const EFTrajectory& traj, const SynchronizedFamily& f)
{
    double worst = 0.0;
    for (const EFState& s : traj.states) {
        const EFState e = exact_ef_solution(f, s.t);
        worst = std::max({worst, std::abs(s.y_u - e.y_u), std::abs(s.p_u - e.p_u), std::abs(s.y_v - e.y_v),
                          std::abs(s.p_v - e.p_v)});
    }
    return worst;
}

Outcome root_counts()
{
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    const Classification three = classify(ProblemParams::with_alpha(3, 0.0, 1.0, 3.0), 1.0);
    const double t3 = seconds_since(start);
    o.require(three.families.size() == 3, fmt::format("n=3: {} families", three.families.size()));
    if (three.families.size() == 3) {
        const double expected[] = {(3 - std::sqrt(5.0)) / 2, 1.0, (3 + std::sqrt(5.0)) / 2};
        for (int i = 0; i < 3; ++i)
            o.require(std::abs(three.families[i].root.c_tilde - expected[i]) <= 1e-12,
                      fmt::format("n=3 root {} = {:.17g}", i, three.families[i].root.c_tilde));
    }
    start = std::chrono::steady_clock::now();
    const Classification four = classify(ProblemParams::with_alpha(4, 0.0, 1.0, 2.0), 1.0);
    const double t4 = seconds_since(start);
    o.require(four.families.size() == 1, fmt::format("n=4: {} families", four.families.size()));
    if (four.families.size() == 1) {
        const double c = 1 / std::sqrt(3.0);
        o.require(std::abs(four.families[0].root.c_tilde - 1.0) <= 1e-12, "n=4 root");
        o.require(std::abs(four.families[0].c1 - c) <= 1e-12 && std::abs(four.families[0].c2 - c) <= 1e-12,
                  "n=4 constants");
    }
    o.require(t3 < 1.0 && t4 < 1.0, fmt::format("runtime {:.3f}s / {:.3f}s", t3, t4));
    if (o.pass)
        o.detail = fmt::format("3 roots and 1 root, {:.3f}s / {:.3f}s", t3, t4);
    return o;
}

Outcome exact_residuals()
{
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto grid = RadialGrid::default_grid().points();
    double worst_radial = 0.0, worst_weighted = 0.0;
    for (const ProblemParams& p : parameter_matrix())
        for (double mu0 : {0.5, 1.0, 2.0})
            for (const SynchronizedFamily& f : classify(p, mu0).families) {
                const auto [ru, rv] = radial_system_residual(f, grid);
                worst_radial = std::max({worst_radial, ru, rv});
                for (double tau : {f.profile.derived().tau1, f.profile.derived().tau2}) {
                    const auto [wu, wv] = weighted_system_residual(f, tau, grid);
                    worst_weighted = std::max({worst_weighted, wu, wv});
                }
            }
    const double elapsed = seconds_since(start);
    o.require(worst_radial <= 1e-9, fmt::format("radial residual {:.3g}", worst_radial));
    o.require(worst_weighted <= 1e-9, fmt::format("weighted residual {:.3g}", worst_weighted));
    o.require(elapsed < 10.0, fmt::format("runtime {:.2f}s", elapsed));
    if (o.pass)
        o.detail = fmt::format("max radial {:.2e}, max weighted {:.2e}, {:.2f}s", worst_radial, worst_weighted,
                               elapsed);
    return o;
}

Outcome ode_fidelity()
{
    Outcome o;
    const auto errors_at = [](const SynchronizedFamily& f, double tol, bool& completed) {
        const EFState peak = exact_ef_solution(f, 0.0);
        double worst = 0.0;
        for (double end : {10.0, -10.0}) {
            const EFTrajectory traj = integrate(peak, {0.0, end}, f.profile.params(), tol);
            completed = completed && traj.termination == Termination::Completed;
            worst = std::max(worst, sup_error(traj, f));
        }
        return worst;
    };
    // The sup-error bound is checked on every matrix family; the order check is
    // gated on the n = 4 benchmark and the matrix-wide minimum is reported.
    double worst = 0.0, matrix_factor = INFINITY;
    for (const ProblemParams& p : parameter_matrix())
        for (const SynchronizedFamily& f : classify(p, 1.0).families) {
            bool completed = true;
            const double e10 = errors_at(f, 1e-10, completed);
            const double e11 = errors_at(f, 1e-11, completed);
            o.require(completed, label(p) + " terminated early");
            o.require(e10 <= 1e-6, fmt::format("{}: sup error {:.3g}", label(p), e10));
            worst = std::max(worst, e10);
            matrix_factor = std::min(matrix_factor, e10 / e11);
        }
    const SynchronizedFamily bench = classify(ProblemParams::with_alpha(4, 0.0, 1.0, 2.0), 1.0).families.at(0);
    bool completed = true;
    const double factor = errors_at(bench, 1e-10, completed) / errors_at(bench, 1e-11, completed);
    o.require(completed && factor >= 16.0, fmt::format("benchmark improvement x{:.2f}", factor));
    if (o.pass)
        o.detail = fmt::format("worst sup error {:.2e} at tol 1e-10, benchmark improvement x{:.1f} "
                               "(matrix minimum x{:.1f})",
                               worst, factor, matrix_factor);
    return o;
}

Outcome proportionality()
{
    Outcome o;
    double worst = 0.0;
    for (const ProblemParams& p : parameter_matrix())
        for (const SynchronizedFamily& f : classify(p, 1.0).families) {
            const EFTrajectory traj = integrate(exact_ef_solution(f, -10.0), {-10.0, 10.0}, p, 1e-10);
            const double defect = proportionality_defect(traj, f.root.c_tilde);
            worst = std::max(worst, defect);
            o.require(defect <= 1e-8, fmt::format("{}: defect {:.3g}", label(p), defect));
        }
    const SynchronizedFamily bench = classify(ProblemParams::with_alpha(4, 0.0, 1.0, 2.0), 1.0).families.at(0);
    const EFTrajectory bench_traj =
        integrate(exact_ef_solution(bench, -10.0), {-10.0, 10.0}, bench.profile.params(), 1e-10);
    const double control = proportionality_defect(bench_traj, 1.1 * bench.root.c_tilde);
    o.require(control >= 0.05, fmt::format("mismatched control {:.3g}", control));
    if (o.pass)
        o.detail = fmt::format("worst defect {:.2e}, mismatched control {:.3f}", worst, control);
    return o;
}

Outcome simultaneous_maximum()
{
    Outcome o;
    double worst_gap = 0.0, worst_offset = 0.0;
    for (const ProblemParams& p : parameter_matrix())
        for (double mu0 : {0.5, 1.0, 2.0})
            for (const SynchronizedFamily& f : classify(p, mu0).families) {
                const double t0 = std::log(mu0);
                const EFTrajectory traj = integrate(exact_ef_solution(f, t0 - 10), {t0 - 10, t0 + 10}, p, 1e-10);
                const auto [tu, tv] = simultaneous_max_check(traj);
                worst_gap = std::max(worst_gap, std::abs(tu - tv));
                worst_offset = std::max({worst_offset, std::abs(tu - t0), std::abs(tv - t0)});
            }
    o.require(worst_gap <= 1e-6, fmt::format("gap {:.3g}", worst_gap));
    o.require(worst_offset <= 1e-6, fmt::format("offset from log mu0 {:.3g}", worst_offset));
    if (o.pass)
        o.detail = fmt::format("max gap {:.2e}, max offset from log mu0 {:.2e}", worst_gap, worst_offset);
    return o;
}

Outcome shooting()
{
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const ProblemParams& p : {ProblemParams::with_alpha(3, 0.0, 1.0, 3.0), ProblemParams::with_alpha(4, 0.0, 1.0, 2.0)})
        for (const SynchronizedFamily& f : classify(p, 1.0).families) {
            const auto& d = f.profile.derived();
            const double target = f.c1 * d.amplitude * std::pow(2.0, -d.delta);
            const double err = rel_err(shoot_synchronized(p, f.root), target);
            worst = std::max(worst, err);
            o.require(err <= 1e-6, fmt::format("{} C={:.6f}: {:.3g}", label(p), f.root.c_tilde, err));
        }
    const double elapsed = seconds_since(start);
    o.require(elapsed < 5.0, fmt::format("runtime {:.2f}s", elapsed));
    if (o.pass)
        o.detail = fmt::format("worst relative error {:.2e}, {:.2f}s", worst, elapsed);
    return o;
}

// Quotient y_u / y_v at t0 +- 10 of the trajectory integrated from the peak.
double integrated_quotient_error(const SynchronizedFamily& f)
{
    const double t0 = std::log(f.profile.mu());
    const EFState peak = exact_ef_solution(f, t0);
    double worst = 0.0;
    for (double end : {t0 + 10, t0 - 10}) {
        const EFState& last = integrate(peak, {t0, end}, f.profile.params(), 1e-10).states.back();
        worst = std::max(worst, rel_err(last.y_u / last.y_v, f.root.c_tilde));
    }
    return worst;
}

Outcome asymptotics()
{
    Outcome o;
    double worst_limit = 0.0, worst_ratio = 0.0, worst_closed = 0.0, matrix_quotient = 0.0;
    for (const ProblemParams& p : parameter_matrix())
        for (double mu0 : {0.5, 1.0, 2.0})
            for (const SynchronizedFamily& f : classify(p, mu0).families) {
                const AsymptoticData a = asymptotic_limits(f);
                const double ratio = f.c1 / f.c2;
                worst_limit = std::max({worst_limit, rel_err(a.u0, f.c1 * f.profile.limit_at_zero()),
                                        rel_err(a.v0, f.c2 * f.profile.limit_at_zero()),
                                        rel_err(a.u_inf, f.c1 * f.profile.limit_at_infinity()),
                                        rel_err(a.v_inf, f.c2 * f.profile.limit_at_infinity())});
                worst_ratio = std::max({worst_ratio, rel_err(a.u0 / a.v0, ratio), rel_err(a.L_minus, ratio),
                                        rel_err(a.L_plus, ratio)});
                const double t0 = std::log(mu0);
                for (double t : {t0 - 10, t0 + 10}) {
                    const EFState s = exact_ef_solution(f, t);
                    worst_closed = std::max(worst_closed, rel_err(s.y_u / s.y_v, f.root.c_tilde));
                }
                matrix_quotient = std::max(matrix_quotient, integrated_quotient_error(f));
            }
    // Integrated quotients are gated on the benchmark families. Along the saddle a
    // relative mismatch grows like e^{2 kappa |t|}, which exceeds double precision
    // headroom for the larger kappa in the matrix; that value is reported only.
    double bench_quotient = 0.0;
    for (const ProblemParams& p : {ProblemParams::with_alpha(3, 0.0, 1.0, 3.0), ProblemParams::with_alpha(4, 0.0, 1.0, 2.0)})
        for (double mu0 : {0.5, 1.0, 2.0})
            for (const SynchronizedFamily& f : classify(p, mu0).families)
                bench_quotient = std::max(bench_quotient, integrated_quotient_error(f));
    o.require(worst_limit <= 1e-6, fmt::format("limit error {:.3g}", worst_limit));
    o.require(worst_ratio <= 1e-10, fmt::format("u0/v0 error {:.3g}", worst_ratio));
    o.require(worst_closed <= 1e-6, fmt::format("closed-form quotient at |t|=10 error {:.3g}", worst_closed));
    o.require(bench_quotient <= 1e-6, fmt::format("integrated quotient at |t|=10 error {:.3g}", bench_quotient));
    if (o.pass)
        o.detail = fmt::format("limits {:.2e}, u0/v0 {:.2e}, quotient at |t|=10 closed form {:.2e}, "
                               "integrated benchmark {:.2e} (matrix worst {:.2e})",
                               worst_limit, worst_ratio, worst_closed, bench_quotient, matrix_quotient);
    return o;
}

Outcome geometry()
{
    Outcome o;
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    int violations = 0;
    double worst_symmetry = 0.0;
    for (int s = 0; s < 100000; ++s) {
        const int n = 3 + s % 5;
        std::vector<double> x(n), x0(n);
        double norm2;
        do {
            norm2 = 0.0;
            for (double& c : x) {
                c = coord(rng);
                norm2 += c * c;
            }
        } while (norm2 > 100.0);
        x[0] = std::abs(x[0]);
        for (int i = 1; i < n; ++i)
            x0[i] = coord(rng) / 10.0;
        if (hardy_weight_dx1(x, x0) < 0.0)
            ++violations;
        std::vector<double> mirrored = x;
        mirrored[0] = -x[0];
        const double f = hardy_weight_f(x, x0);
        if (f != 0.0)
            worst_symmetry = std::max(worst_symmetry, rel_err(hardy_weight_f(mirrored, x0), f));
    }
    o.require(violations == 0, fmt::format("{} monotonicity violations", violations));
    o.require(worst_symmetry <= 1e-14, fmt::format("reflection asymmetry {:.3g}", worst_symmetry));

    double worst_order = INFINITY;
    for (int s = 0; s < 20; ++s) {
        std::vector<double> x(4), x0(4);
        for (int i = 0; i < 4; ++i) {
            x[i] = coord(rng) / 5.0;
            x0[i] = i == 0 ? 0.0 : coord(rng) / 20.0;
        }
        const double exact = hardy_weight_dx1(x, x0);
        const RadialFunction along_x1 = [&](double shifted) {
            std::vector<double> y = x;
            y[0] = shifted - 10.0;
            return hardy_weight_f(y, x0);
        };
        std::vector<std::pair<double, double>> errors;
        for (double h = 1e-1; h > 1e-2 * 0.99; h /= 2)
            errors.emplace_back(h, std::abs(fd_derivative(along_x1, x[0] + 10.0, h, 1) - exact));
        worst_order = std::min(worst_order, convergence_order(errors));
    }
    o.require(worst_order >= 1.9, fmt::format("derivative order {:.3f}", worst_order));
    if (o.pass)
        o.detail = fmt::format("0 violations in 1e5 samples, asymmetry {:.1e}, FD order >= {:.2f}", worst_symmetry,
                               worst_order);
    return o;
}

Outcome kelvin()
{
    Outcome o;
    double worst_involution = 0.0, worst_bubble = 0.0;
    double min_lower = INFINITY, max_upper = 0.0;
    for (int n : {3, 4, 5, 6})
        for (double gamma : {0.0, hardy_constant(n) / 2})
            for (double mu : {0.5, 1.0, 2.0}) {
                const ScalarProfile p(ProblemParams::with_alpha(n, gamma, 0.0, critical_exponent(n) / 2), mu);
                const RadialFunction u = p.as_function();
                const RadialFunction ku = [&](double r) { return kelvin_transform(u, n, r); };
                for (double r : {0.1, 1.0, 10.0})
                    worst_involution = std::max(worst_involution, rel_err(kelvin_transform(ku, n, r), u(r)));
                // For gamma > 0 the Kelvin image keeps the factor r^{tau1} from the
                // origin singularity, so the compensating power is tau2 rather than n - 2.
                const double exponent = gamma == 0.0 ? n - 2.0 : p.derived().tau2;
                const DecayBounds b = kelvin_decay_bounds(u, n, exponent, 10.0, 1e6);
                o.require(b.lower > 0.0 && std::isfinite(b.upper),
                          fmt::format("n={} gamma={:g}: bounds [{:g}, {:g}]", n, gamma, b.lower, b.upper));
                min_lower = std::min(min_lower, b.lower);
                max_upper = std::max(max_upper, b.upper);
            }
    for (int n : {3, 4, 5, 6}) {
        const RadialFunction bubble = [n](double r) { return aubin_talenti_bubble(n, 1.0, r); };
        const RadialGrid samples = RadialGrid::log_uniform(1e-3, 1e3, 61);
        for (double r : samples.points())
            worst_bubble = std::max(worst_bubble, rel_err(kelvin_transform(bubble, n, r), bubble(r)));
    }
    o.require(worst_involution <= 1e-12, fmt::format("involution {:.3g}", worst_involution));
    o.require(worst_bubble <= 1e-12, fmt::format("bubble invariance {:.3g}", worst_bubble));
    if (o.pass)
        o.detail = fmt::format("involution {:.1e}, bubble {:.1e}, decay bounds in [{:.3g}, {:.3g}]", worst_involution,
                               worst_bubble, min_lower, max_upper);
    return o;
}

Outcome energy()
{
    Outcome o;
    double worst = 0.0, worst_drift = 0.0;
    for (const ProblemParams& p : parameter_matrix()) {
        if (p.nu() != 0.0)
            continue;
        for (double mu0 : {0.5, 1.0, 2.0}) {
            const SynchronizedFamily f = classify(p, mu0).families.at(0);
            const double h0 = scalar_energy(exact_ef_solution(f, std::log(mu0)), p);
            for (double t = -30.0; t <= 30.0; t += 0.05) {
                const double h = scalar_energy(exact_ef_solution(f, t), p);
                worst = std::max(worst, std::abs(h));
                worst_drift = std::max(worst_drift, std::abs(h - h0));
            }
        }
    }
    o.require(worst_drift <= 1e-10, fmt::format("drift {:.3g}", worst_drift));
    o.require(worst <= 1e-10, fmt::format("|H| {:.3g}", worst));
    if (o.pass)
        o.detail = fmt::format("max |H| {:.2e}, max drift {:.2e}", worst, worst_drift);
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"root-count reproduction", root_counts},
        {"exact-solution residuals", exact_residuals},
        {"ODE fidelity", ode_fidelity},
        {"proportionality", proportionality},
        {"simultaneous maximum", simultaneous_maximum},
        {"shooting recovery", shooting},
        {"asymptotic limits", asymptotics},
        {"Hardy weight geometry", geometry},
        {"Kelvin identities", kelvin},
        {"scalar energy invariant", energy},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, fmt::format("exception: {}", e.what())};
        }
        if (!outcome.pass)
            ++failures;
        fmt::print("{} {:2} {}: {}\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail);
    }
    fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
