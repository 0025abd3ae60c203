#include "hsds/coupling.hpp"

#include "hsds/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace hsds {

namespace {

void require_positive(double s)
{
    if (!(s > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("coupling argument s = {} must be positive", s));
}

int sign_of(double x)
{
    return (x > 0.0) - (x < 0.0);
}

bool nearly_equal(double a, double b)
{
    return std::abs(a - b) <= kExponentSumTolerance;
}

double relative_tolerance_scale(double s, const ProblemParams& p)
{
    return std::max(1.0, coupling_f_scale(s, p));
}

} // namespace

double coupling_f(double s, const ProblemParams& p)
{
    require_positive(s);
    const double nu = p.nu();
    const double a = p.alpha();
    const double b = p.beta();
    return std::pow(s, p.two_star() - 2.0) + nu * a * std::pow(s, a - 2.0) - 1.0 - nu * b * std::pow(s, a);
}

double coupling_f_prime(double s, const ProblemParams& p)
{
    require_positive(s);
    const double nu = p.nu();
    const double a = p.alpha();
    const double b = p.beta();
    const double e = p.two_star() - 2.0;
    return e * std::pow(s, e - 1.0) + nu * a * (a - 2.0) * std::pow(s, a - 3.0) - nu * b * a * std::pow(s, a - 1.0);
}

double coupling_f_scale(double s, const ProblemParams& p)
{
    require_positive(s);
    const double nu = p.nu();
    const double a = p.alpha();
    return std::max({std::pow(s, p.two_star() - 2.0), nu * a * std::pow(s, a - 2.0), 1.0,
                     nu * p.beta() * std::pow(s, a)});
}

int coupling_f_limit_sign_at_zero(const ProblemParams& p)
{
    const double nu = p.nu();
    const double a = p.alpha();
    if (nu > 0.0 && a < 2.0 && !nearly_equal(a, 2.0))
        return 1;
    if (nearly_equal(a, 2.0))
        return sign_of(nu * a - 1.0);
    return -1;
}

int coupling_f_limit_sign_at_infinity(const ProblemParams& p)
{
    const double nu = p.nu();
    if (nu == 0.0)
        return 1;
    const double a = p.alpha();
    const double leading = p.two_star() - 2.0;
    if (!nearly_equal(leading, a))
        return leading > a ? 1 : -1;
    // s^alpha terms tie: (1 - nu beta) s^alpha + nu alpha s^{alpha-2} - 1
    const int top = sign_of(1.0 - nu * p.beta());
    if (top != 0)
        return top;
    if (nearly_equal(a, 2.0))
        return sign_of(nu * a - 1.0);
    return a > 2.0 ? 1 : -1;
}

namespace {

struct Bracket {
    double lo;
    double hi;
};

double bisect(const ProblemParams& p, Bracket b, double rel_width)
{
    double f_lo = coupling_f(b.lo, p);
    while (b.hi - b.lo > rel_width * b.hi) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi)
            break;
        const double f_mid = coupling_f(mid, p);
        if (f_mid == 0.0)
            return mid;
        if (sign_of(f_mid) == sign_of(f_lo)) {
            b.lo = mid;
            f_lo = f_mid;
        } else {
            b.hi = mid;
        }
    }
    return 0.5 * (b.lo + b.hi);
}

// Newton steps kept inside the bracket; the step is rejected if it does not reduce |f|.
double polish(const ProblemParams& p, double s, Bracket b)
{
    double f = coupling_f(s, p);
    for (int it = 0; it < 16; ++it) {
        if (f == 0.0)
            break;
        const double df = coupling_f_prime(s, p);
        if (df == 0.0)
            break;
        const double next = s - f / df;
        if (!(next > b.lo && next < b.hi))
            break;
        const double f_next = coupling_f(next, p);
        if (std::abs(f_next) >= std::abs(f))
            break;
        s = next;
        f = f_next;
    }
    return s;
}

CouplingRoot make_root(const ProblemParams& p, double s, const RootSearchOptions& opts)
{
    CouplingRoot root{};
    root.c_tilde = s;
    root.f_residual = std::abs(coupling_f(s, p));
    root.f_prime = coupling_f_prime(s, p);
    root.is_degenerate = std::abs(root.f_prime) <= opts.degeneracy_threshold * coupling_f_scale(s, p);
    return root;
}

// Stationary point of f inside (lo, hi) located by bisection on f'.
bool stationary_point(const ProblemParams& p, Bracket b, double& s_out)
{
    double d_lo = coupling_f_prime(b.lo, p);
    const double d_hi = coupling_f_prime(b.hi, p);
    if (sign_of(d_lo) * sign_of(d_hi) > 0)
        return false;
    for (int it = 0; it < 200 && b.hi - b.lo > 1e-15 * b.hi; ++it) {
        const double mid = 0.5 * (b.lo + b.hi);
        const double d_mid = coupling_f_prime(mid, p);
        if (d_mid == 0.0) {
            b.lo = b.hi = mid;
            break;
        }
        if (sign_of(d_mid) == sign_of(d_lo)) {
            b.lo = mid;
            d_lo = d_mid;
        } else {
            b.hi = mid;
        }
    }
    s_out = 0.5 * (b.lo + b.hi);
    return true;
}

} // namespace

RootSearchResult find_positive_roots(const ProblemParams& p, const RootSearchOptions& opts)
{
    if (!(opts.s_lo > 0.0) || !(opts.s_hi > opts.s_lo) || opts.grid_points < 3)
        throw Error(ErrorKind::PreconditionViolated, "root search needs 0 < s_lo < s_hi and at least 3 grid points");

    const int m = opts.grid_points;
    std::vector<double> s(m);
    std::vector<double> f(m);
    const double step = std::log(opts.s_hi / opts.s_lo) / (m - 1);
    double max_relative = 0.0;
    for (int i = 0; i < m; ++i) {
        s[i] = i + 1 == m ? opts.s_hi : opts.s_lo * std::exp(step * i);
        f[i] = coupling_f(s[i], p);
        max_relative = std::max(max_relative, std::abs(f[i]) / coupling_f_scale(s[i], p));
    }

    RootSearchResult result;
    if (max_relative <= 1e-10) {
        result.warnings.push_back("f vanishes identically on the search window; every ratio is admissible "
                                  "and no isolated roots are reported");
        return result;
    }

    std::vector<double> found;
    for (int i = 0; i < m; ++i) {
        if (f[i] == 0.0) {
            found.push_back(s[i]);
            continue;
        }
        if (i + 1 < m && f[i + 1] != 0.0 && sign_of(f[i]) != sign_of(f[i + 1])) {
            const Bracket b{s[i], s[i + 1]};
            found.push_back(polish(p, bisect(p, b, opts.bisection_width), b));
        }
    }

    // Local minima of |f| without a sign change: tangential candidates, or a pair
    // of close simple roots that the grid could not separate.
    for (int i = 1; i + 1 < m; ++i) {
        if (f[i] == 0.0 || sign_of(f[i - 1]) != sign_of(f[i]) || sign_of(f[i]) != sign_of(f[i + 1]))
            continue;
        if (!(std::abs(f[i]) <= std::abs(f[i - 1]) && std::abs(f[i]) <= std::abs(f[i + 1])))
            continue;
        double s_star = 0.0;
        if (!stationary_point(p, {s[i - 1], s[i + 1]}, s_star))
            continue;
        const double f_star = coupling_f(s_star, p);
        const double scale = coupling_f_scale(s_star, p);
        if (f_star == 0.0 || sign_of(f_star) != sign_of(f[i])) {
            const Bracket left{s[i - 1], s_star};
            const Bracket right{s_star, s[i + 1]};
            if (f_star == 0.0) {
                found.push_back(s_star);
            } else {
                found.push_back(polish(p, bisect(p, left, opts.bisection_width), left));
                found.push_back(polish(p, bisect(p, right, opts.bisection_width), right));
            }
        } else if (std::abs(f_star) <= opts.tangency_candidate_threshold * scale) {
            CouplingRoot root = make_root(p, s_star, opts);
            root.is_degenerate = true;
            result.roots.push_back(root);
        }
    }

    for (double r : found)
        result.roots.push_back(make_root(p, r, opts));
    std::sort(result.roots.begin(), result.roots.end(),
              [](const CouplingRoot& a, const CouplingRoot& b) { return a.c_tilde < b.c_tilde; });

    const int sign_zero = coupling_f_limit_sign_at_zero(p);
    const int sign_inf = coupling_f_limit_sign_at_infinity(p);
    if (sign_zero != 0 && sign_of(f.front()) != sign_zero)
        result.warnings.push_back(
            fmt::format("f(s_lo = {}) has the opposite sign to its limit at 0+; roots may lie below the window",
                        opts.s_lo));
    if (sign_inf != 0 && sign_of(f.back()) != sign_inf)
        result.warnings.push_back(
            fmt::format("f(s_hi = {}) has the opposite sign to its limit at infinity; roots may lie above the window",
                        opts.s_hi));
    if (result.roots.empty())
        result.warnings.push_back(
            sign_zero == sign_inf
                ? "search window exhausted: no sign change, and the endpoint limits share a sign"
                : "search window exhausted: no sign change although the endpoint limits differ in sign");
    return result;
}

std::pair<double, double> constants_from_root(const CouplingRoot& root, const ProblemParams& p)
{
    const double c = root.c_tilde;
    require_positive(c);
    const double residual = std::abs(coupling_f(c, p));
    if (residual > 1e-12 * relative_tolerance_scale(c, p))
        throw Error(ErrorKind::RootResidualTooLarge, fmt::format("|f({})| = {} is not a root", c, residual));
    const double c2 = std::pow(1.0 + p.nu() * p.beta() * std::pow(c, p.alpha()), -1.0 / (p.two_star() - 2.0));
    const double c1 = c * c2;
    const auto [res1, res2] = verify_constants_system(c1, c2, p);
    if (res1 > 1e-12 || res2 > 1e-12)
        throw Error(ErrorKind::RootResidualTooLarge,
                    fmt::format("constants ({}, {}) leave residuals ({}, {})", c1, c2, res1, res2));
    return {c1, c2};
}

std::pair<double, double> verify_constants_system(double c1, double c2, const ProblemParams& p)
{
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw Error(ErrorKind::NonpositiveArgument, fmt::format("constants ({}, {}) must be positive", c1, c2));
    const double e = p.two_star() - 2.0;
    const double nu = p.nu();
    const double a = p.alpha();
    const double b = p.beta();
    const double res1 = std::abs(std::pow(c1, e) + nu * a * std::pow(c1, a - 2.0) * std::pow(c2, b) - 1.0);
    const double res2 = std::abs(std::pow(c2, e) + nu * b * std::pow(c1, a) * std::pow(c2, b - 2.0) - 1.0);
    return {res1, res2};
}

Classification classify(const ProblemParams& p, double mu0, const RootSearchOptions& opts)
{
    (void)p.gamma();
    const ScalarProfile profile(p, mu0);
    const RootSearchResult search = find_positive_roots(p, opts);
    Classification out;
    out.warnings = search.warnings;
    for (const CouplingRoot& root : search.roots) {
        if (root.is_degenerate) {
            out.degenerate_roots.push_back(root);
            out.warnings.push_back(
                fmt::format("tangential root C = {} (f' = {}) excluded from the classification", root.c_tilde,
                            root.f_prime));
            continue;
        }
        const auto [c1, c2] = constants_from_root(root, p);
        out.families.push_back(SynchronizedFamily{root, c1, c2, profile});
    }
    return out;
}

} // namespace hsds
