#pragma once

#include "hsds/coupling.hpp"
#include "hsds/params.hpp"
#include "hsds/scalar.hpp"

#include <iosfwd>
#include "json.hpp"
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hsds {

/// Strictly increasing positive radii.
class RadialGrid {
public:
    enum class Spacing { LogUniform, Custom };

    static RadialGrid log_uniform(double r_lo, double r_hi, int points);
    static RadialGrid custom(std::vector<double> points);
    /// 2048 log-uniform points on [1e-6, 1e6].
    static RadialGrid default_grid();

    const std::vector<double>& points() const noexcept { return points_; }
    Spacing spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    RadialGrid(std::vector<double> points, Spacing spacing);

    std::vector<double> points_;
    Spacing spacing_;
};

/// Centred finite difference of order 1 or 2 with half-width h; needs r - 2h > 0.
double fd_derivative(const RadialFunction& u, double r, double h, int order);

/// Least-squares slope of log(err) against log(h) over (h, err) pairs with h strictly decreasing.
double convergence_order(std::span<const std::pair<double, double>> errors);

enum class Comparison { AtMost, AtLeast };

struct Check {
    std::string name;
    double measured;
    double threshold;
    Comparison comparison;
    bool pass;
};

struct FamilySummary {
    double c_tilde;
    double c1;
    double c2;
    double f_prime;
};

struct VerificationReport {
    ProblemParams params;
    double mu0;
    std::vector<FamilySummary> families;
    std::vector<std::string> warnings;
    std::vector<Check> checks;
    bool overall;
};

struct VerificationOptions {
    int grid_points = 2048;
    double integration_tol = 1e-10;
    double integration_half_span = 10.0;
    /// Multiplies (c1, c2) of every family before the checks run; 1 leaves them exact.
    double amplitude_perturbation = 1.0;
};

/// Classification followed by every per-family check, bundled into a report.
/// Individual check failures do not abort the report.
VerificationReport full_verification(const ProblemParams& p, double mu0, const VerificationOptions& opts = {});

/// Stable key order; field names are the report schema (docs/report_schema.md).
nlohmann::ordered_json to_json(const VerificationReport& report);
/// key = value lines, checks flattened as checks[i].field.
std::string to_text(const VerificationReport& report);
/// name,measured,threshold,comparison,pass
void write_report_csv(std::ostream& out, const VerificationReport& report);

std::string_view to_string(Comparison comparison);

/// Finite-difference residual of the Emden-Fowler equations for a tabulated
/// profile (r, u, v) on an increasing radial grid, each point divided by its
/// largest term. Used to check exported data independently of the closed form.
std::pair<double, double> tabulated_profile_residual(std::span<const double> r, std::span<const double> u,
                                                     std::span<const double> v, const ProblemParams& p);

} // namespace hsds
