#pragma once

#include "hsds/coupling.hpp"
#include "hsds/params.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace hsds {

/// Phase state of the Emden-Fowler system in t = log r, y = r^delta u.
struct EFState {
    double t;
    double y_u;
    double p_u;
    double y_v;
    double p_v;
};

enum class Termination { Completed, Blowup, Extinction, Stopped };

std::string_view to_string(Termination termination);

struct StepStats {
    long accepted = 0;
    long rejected = 0;
};

struct EFTrajectory {
    std::vector<EFState> states;
    StepStats step_stats;
    Termination termination = Termination::Completed;
};

/// Vector field (p_u, y_u'', p_v, y_v'') of
///   y_u'' = kappa^2 y_u - y_u^{2*-1} - nu alpha y_u^{alpha-1} y_v^beta
///   y_v'' = kappa^2 y_v - y_v^{2*-1} - nu beta  y_u^alpha y_v^{beta-1}
/// Throws NegativeComponent for y_u < 0 or y_v < 0.
std::array<double, 4> ef_rhs(const EFState& state, const ProblemParams& p);

/// Closed-form synchronized trajectory at t, centred at t0 = log mu0.
EFState exact_ef_solution(const SynchronizedFamily& family, double t);

/// Closed-form trajectory sampled on a uniform t grid over [t_begin, t_end].
EFTrajectory sample_exact_trajectory(const SynchronizedFamily& family, double t_begin, double t_end, int points);

struct IntegrateOptions {
    double tol = 1e-10;
    double max_step = 0.5;
    double initial_step = 1e-3;
    double min_step = 1e-14;
    double blowup_threshold = 1e8;
    /// Stops with Termination::Stopped when it returns true on an accepted state.
    std::function<bool(const EFState&)> stop;
};

/// Adaptive Dormand-Prince 5(4) integration with PI step control. The local
/// error estimate of every accepted step satisfies err <= tol * h * (1e-6 + |y|)
/// componentwise (error per unit step), with max_step <= 1 this also bounds the
/// per-step error by tol. Backward spans integrate the time-reversed field.
/// Terminates early with Blowup when |y| > blowup_threshold and with Extinction
/// when y_u or y_v becomes negative (the offending state is not recorded).
EFTrajectory integrate(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p,
                       const IntegrateOptions& opts);
EFTrajectory integrate(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p,
                       double tol);

/// Fixed-step Dormand-Prince 5 integration, for convergence studies.
EFTrajectory integrate_fixed(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p,
                             double h);

struct ShootingOptions {
    double a_lo = 1e-6;
    double a_hi = 1e3;
    double tol = 1e-12;
    /// Relative bracket width at which bisection stops.
    double rel_width = 1e-12;
    int max_bisections = 200;
    double decay_threshold = 1e-8;
    /// Multiple of 1/kappa used as the integration horizon.
    double horizon_factor = 60.0;
};

enum class ShotOutcome { Undershoot, Overshoot, Decayed };

/// Classifies a single shot from (a, 0, a/C, 0): Overshoot when y_u reaches zero
/// (extinction) or blows up, Undershoot when y_u turns back up while positive,
/// Decayed when the horizon is reached with |y_u| below the decay threshold.
ShotOutcome classify_shot(const ProblemParams& p, double c_tilde, double a, const ShootingOptions& opts);

/// Amplitude a* = y_u(0) of the symmetric-maximum initial state (a*, 0, a*/C, 0)
/// whose forward trajectory decays, found by bisection on the undershoot/overshoot dichotomy.
double shoot_synchronized(const ProblemParams& p, const CouplingRoot& root, const ShootingOptions& opts = {});

/// sup |y_u - C y_v| / sup y_u over the states.
double proportionality_defect(const EFTrajectory& traj, double c_tilde);

/// Interpolated argmax of y_u and y_v (root of the derivative of the cubic
/// Hermite interpolant on the step where p changes sign).
std::pair<double, double> simultaneous_max_check(const EFTrajectory& traj);

/// Scalar first integral 1/2 p^2 - 1/2 kappa^2 y^2 + y^{2*}/2* of the decoupled equation.
double scalar_energy(const EFState& state, const ProblemParams& p);

/// Max normalized residuals of the radial system (r^{n-1} u')' + r^{n-1}(gamma u/r^2 + u^{2*-1} + nu alpha u^{alpha-1} v^beta)
/// and its v counterpart. Each point is normalized by max(1, largest term).
std::pair<double, double> radial_system_residual(const SynchronizedFamily& family, std::span<const double> grid);

/// Same for the weighted system in u_tau = r^tau u, valid when tau solves tau^2 - (n-2) tau + gamma = 0.
std::pair<double, double> weighted_system_residual(const SynchronizedFamily& family, double tau,
                                                   std::span<const double> grid);

/// Max normalized residual of the Emden-Fowler system along the closed form on a t grid.
std::pair<double, double> ef_system_residual(const SynchronizedFamily& family, std::span<const double> t_grid);

/// CSV with header t,y_u,p_u,y_v,p_v and 17 significant digits.
void write_trajectory_csv(std::ostream& out, const EFTrajectory& traj);

} // namespace hsds
