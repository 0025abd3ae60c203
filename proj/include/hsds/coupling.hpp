#pragma once

#include "hsds/params.hpp"
#include "hsds/scalar.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hsds {

/// f(s) = s^{2*-2} + nu alpha s^{alpha-2} - 1 - nu beta s^alpha, s > 0.
double coupling_f(double s, const ProblemParams& p);
double coupling_f_prime(double s, const ProblemParams& p);

/// Largest magnitude among the four terms of f at s; floors residual tolerances.
double coupling_f_scale(double s, const ProblemParams& p);

/// Sign of the limit of f at 0+ or at +inf: -1, 0 or +1 (0 never occurs at 0+ except alpha = 2, nu alpha = 1).
int coupling_f_limit_sign_at_zero(const ProblemParams& p);
int coupling_f_limit_sign_at_infinity(const ProblemParams& p);

struct CouplingRoot {
    double c_tilde;
    double f_residual;
    double f_prime;
    bool is_degenerate;
};

struct RootSearchOptions {
    double s_lo = 1e-8;
    double s_hi = 1e8;
    int grid_points = 4096;
    /// Relative bracket width at which bisection hands over to Newton.
    double bisection_width = 1e-13;
    /// |f'(s)| <= threshold * scale(s) marks a tangential root.
    double degeneracy_threshold = 1e-8;
    /// |f| <= threshold * scale(s) at a local minimum of |f| without a sign change
    /// marks a tangential candidate.
    double tangency_candidate_threshold = 1e-10;
};

struct RootSearchResult {
    std::vector<CouplingRoot> roots;  ///< ascending
    std::vector<std::string> warnings;
};

/// All positive roots of f inside [s_lo, s_hi]: sign changes on a log grid,
/// bisection, then safeguarded Newton. Tangential near-roots without a sign
/// change are refined and reported with is_degenerate set.
RootSearchResult find_positive_roots(const ProblemParams& p, const RootSearchOptions& opts = {});

/// c2 = (1 + nu beta C^alpha)^{-1/(2*-2)}, c1 = C c2.
std::pair<double, double> constants_from_root(const CouplingRoot& root, const ProblemParams& p);

/// Absolute residuals of the two equations of the constants system.
std::pair<double, double> verify_constants_system(double c1, double c2, const ProblemParams& p);

/// A root C of f together with the synchronized pair (c1 U_mu0, c2 U_mu0).
struct SynchronizedFamily {
    CouplingRoot root;
    double c1;
    double c2;
    ScalarProfile profile;
};

struct Classification {
    std::vector<SynchronizedFamily> families;  ///< one per simple root, ascending in C
    std::vector<CouplingRoot> degenerate_roots;  ///< excluded tangential roots
    std::vector<std::string> warnings;
};

/// Every synchronized family for the common gamma; requires gamma1 == gamma2.
Classification classify(const ProblemParams& p, double mu0, const RootSearchOptions& opts = {});

inline AsymptoticData asymptotic_limits(const SynchronizedFamily& family)
{
    return asymptotic_limits(family.profile, family.c1, family.c2);
}

} // namespace hsds
