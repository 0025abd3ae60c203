#include "hsds/ode.hpp"

#include "hsds/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

namespace hsds {

std::string_view to_string(Termination termination)
{
    switch (termination) {
    case Termination::Completed: return "completed";
    case Termination::Blowup: return "blowup";
    case Termination::Extinction: return "extinction";
    case Termination::Stopped: return "stopped";
    }
    return "unknown";
}

namespace {

using Vec4 = std::array<double, 4>;

struct Field {
    double kappa2;
    double two_star;
    double nu;
    double alpha;
    double beta;

    explicit Field(const ProblemParams& p)
        : kappa2(p.lambda_n() - p.gamma()), two_star(p.two_star()), nu(p.nu()), alpha(p.alpha()), beta(p.beta())
    {
    }

    // y = (y_u, p_u, y_v, p_v); negative components are clamped to zero.
    Vec4 operator()(const Vec4& y) const
    {
        const double yu = std::max(y[0], 0.0);
        const double yv = std::max(y[2], 0.0);
        double au = kappa2 * yu - std::pow(yu, two_star - 1.0);
        double av = kappa2 * yv - std::pow(yv, two_star - 1.0);
        if (nu != 0.0) {
            au -= nu * alpha * std::pow(yu, alpha - 1.0) * std::pow(yv, beta);
            av -= nu * beta * std::pow(yu, alpha) * std::pow(yv, beta - 1.0);
        }
        return {y[1], au, y[3], av};
    }
};

Vec4 operator+(const Vec4& a, const Vec4& b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

Vec4 operator*(double s, const Vec4& a)
{
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
    Vec4 y;
    Vec4 err;
    Vec4 k_end;
};

// One DP step; k1 is the field at y (FSAL).
StepResult dp_step(const Field& field, const Vec4& y, const Vec4& k1, double h)
{
    const Vec4 k2 = field(y + (h * a21) * k1);
    const Vec4 k3 = field(y + h * (a31 * k1 + a32 * k2));
    const Vec4 k4 = field(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec4 k5 = field(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec4 k6 = field(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec4 y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec4 k7 = field(y_new);
    const Vec4 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {y_new, err, k7};
}

Vec4 pack(const EFState& s, double dir)
{
    return {s.y_u, dir * s.p_u, s.y_v, dir * s.p_v};
}

EFState unpack(double t, const Vec4& y, double dir)
{
    return {t, y[0], dir * y[1], y[2], dir * y[3]};
}

void require_finite(const EFState& s)
{
    if (!std::isfinite(s.t) || !std::isfinite(s.y_u) || !std::isfinite(s.p_u) || !std::isfinite(s.y_v) ||
        !std::isfinite(s.p_v))
        throw Error(ErrorKind::PreconditionViolated, "initial state must be finite");
}

// Returns true when the trajectory must terminate after recording (or not) y.
bool check_termination(const Vec4& y, double blowup, EFTrajectory& traj)
{
    if (y[0] < 0.0 || y[2] < 0.0) {
        traj.termination = Termination::Extinction;
        return true;
    }
    if (std::abs(y[0]) > blowup || std::abs(y[2]) > blowup || !std::isfinite(y[1]) || !std::isfinite(y[3])) {
        traj.termination = Termination::Blowup;
        return true;
    }
    return false;
}

} // namespace

std::array<double, 4> ef_rhs(const EFState& state, const ProblemParams& p)
{
    if (state.y_u < 0.0 || state.y_v < 0.0)
        throw Error(ErrorKind::NegativeComponent,
                    fmt::format("fractional powers of negative components (y_u = {}, y_v = {})", state.y_u,
                                state.y_v));
    return Field(p)(Vec4{state.y_u, state.p_u, state.y_v, state.p_v});
}

namespace {

struct ExactProfile {
    double y;
    double dy;
    double d2y;
};

// c A 2^{-delta} sech(kappa s / delta)^delta in overflow-free form.
ExactProfile exact_component(double scale, double kappa, double delta, double s)
{
    const double x = kappa * std::abs(s) / delta;
    const double e = std::exp(-2.0 * x);
    const double y = scale * std::exp(-kappa * std::abs(s)) * std::pow(1.0 + e, -delta);
    const double th = (1.0 - e) / (1.0 + e) * (s < 0.0 ? -1.0 : 1.0);
    const double sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    return {y, -kappa * th * y, kappa * kappa * y * (th * th - sech2 / delta)};
}

} // namespace

EFState exact_ef_solution(const SynchronizedFamily& family, double t)
{
    const auto& d = family.profile.derived();
    const double s = t - std::log(family.profile.mu());
    const ExactProfile u = exact_component(family.c1 * d.amplitude, d.kappa, d.delta, s);
    const ExactProfile v = exact_component(family.c2 * d.amplitude, d.kappa, d.delta, s);
    return {t, u.y, u.dy, v.y, v.dy};
}

EFTrajectory sample_exact_trajectory(const SynchronizedFamily& family, double t_begin, double t_end, int points)
{
    if (points < 2)
        throw Error(ErrorKind::PreconditionViolated, "trajectory sampling needs at least 2 points");
    EFTrajectory traj;
    traj.states.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double t = i + 1 == points ? t_end : t_begin + (t_end - t_begin) * i / (points - 1);
        traj.states.push_back(exact_ef_solution(family, t));
    }
    return traj;
}

EFTrajectory integrate(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p,
                       const IntegrateOptions& opts)
{
    if (!(opts.tol > 0.0))
        throw Error(ErrorKind::PreconditionViolated, fmt::format("tolerance {} must be positive", opts.tol));
    require_finite(initial);
    const Field field(p);
    const double dir = t_span.second >= t_span.first ? 1.0 : -1.0;
    const double length = std::abs(t_span.second - t_span.first);

    EFTrajectory traj;
    traj.states.push_back(initial);
    Vec4 y = pack(initial, dir);
    if (check_termination(y, opts.blowup_threshold, traj)) {
        traj.states.clear();
        return traj;
    }
    Vec4 k1 = field(y);
    double s = 0.0;
    double h = std::min({opts.initial_step, opts.max_step, length});
    double err_prev = 1.0;

    // Error per unit step: local error of a p-th order estimate ~ h^{p+1}, so the
    // controller works with the h^p scaling of err/h.
    constexpr double kOrder = 4.0;
    constexpr double kBeta = 0.04;
    constexpr double kAlpha = 1.0 / kOrder - 0.75 * kBeta;
    constexpr double kRoundoffFloor = 1e-14;
    // Relative control keeps the phase accurate while the orbit sits in the exponential tails.
    constexpr double kAbsoluteScale = 1e-6;

    while (s < length) {
        if (length - s < h * (1.0 + 1e-12))
            h = length - s;
        const StepResult step = dp_step(field, y, k1, h);
        double err = 0.0;
        for (int i = 0; i < 4; ++i) {
            // The floor keeps the per-unit-step target above round-off for tiny h.
            const double sc = std::max(opts.tol * h, kRoundoffFloor) * (kAbsoluteScale + std::max(std::abs(y[i]), std::abs(step.y[i])));
            err = std::max(err, std::abs(step.err[i]) / sc);
        }
        if (!std::isfinite(err))
            err = 1e10;
        if (err <= 1.0) {
            s = (length - s == h) ? length : s + h;
            y = step.y;
            k1 = step.k_end;
            ++traj.step_stats.accepted;
            if (check_termination(y, opts.blowup_threshold, traj))
                return traj;
            const EFState state = unpack(t_span.first + dir * s, y, dir);
            traj.states.push_back(state);
            if (opts.stop && opts.stop(state)) {
                traj.termination = Termination::Stopped;
                return traj;
            }
            const double e = std::max(err, 1e-10);
            const double factor = std::clamp(0.9 * std::pow(e, -kAlpha) * std::pow(err_prev, kBeta), 0.2, 5.0);
            err_prev = e;
            h = std::min(h * factor, opts.max_step);
        } else {
            ++traj.step_stats.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / kOrder));
        }
        if (h < opts.min_step && s < length)
            throw Error(ErrorKind::StepSizeUnderflow,
                        fmt::format("step size {} fell below {} at t = {}", h, opts.min_step,
                                    t_span.first + dir * s));
    }
    traj.termination = Termination::Completed;
    return traj;
}

EFTrajectory integrate(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p, double tol)
{
    IntegrateOptions opts;
    opts.tol = tol;
    return integrate(initial, t_span, p, opts);
}

EFTrajectory integrate_fixed(const EFState& initial, std::pair<double, double> t_span, const ProblemParams& p,
                             double h)
{
    if (!(h > 0.0))
        throw Error(ErrorKind::PreconditionViolated, fmt::format("step {} must be positive", h));
    require_finite(initial);
    const Field field(p);
    const double dir = t_span.second >= t_span.first ? 1.0 : -1.0;
    const double length = std::abs(t_span.second - t_span.first);
    const long steps = std::max<long>(1, std::lround(std::ceil(length / h - 1e-9)));
    const double step_size = length / steps;

    EFTrajectory traj;
    traj.states.push_back(initial);
    Vec4 y = pack(initial, dir);
    Vec4 k1 = field(y);
    for (long i = 1; i <= steps; ++i) {
        const StepResult step = dp_step(field, y, k1, step_size);
        y = step.y;
        k1 = step.k_end;
        ++traj.step_stats.accepted;
        if (check_termination(y, std::numeric_limits<double>::max(), traj))
            return traj;
        traj.states.push_back(unpack(t_span.first + dir * step_size * i, y, dir));
    }
    traj.termination = Termination::Completed;
    return traj;
}

ShotOutcome classify_shot(const ProblemParams& p, double c_tilde, double a, const ShootingOptions& opts)
{
    const double kappa = p.derived().kappa;
    IntegrateOptions io;
    io.tol = opts.tol;
    io.max_step = std::min(0.5, 0.5 / kappa);
    // Turning back up before reaching zero means the orbit stays inside the loop.
    io.stop = [](const EFState& s) { return s.p_u > 0.0; };
    const EFState start{0.0, a, 0.0, a / c_tilde, 0.0};
    const EFTrajectory traj = integrate(start, {0.0, opts.horizon_factor / kappa}, p, io);
    switch (traj.termination) {
    case Termination::Extinction:
    case Termination::Blowup: return ShotOutcome::Overshoot;
    case Termination::Stopped: return ShotOutcome::Undershoot;
    case Termination::Completed: break;
    }
    return std::abs(traj.states.back().y_u) <= opts.decay_threshold ? ShotOutcome::Decayed : ShotOutcome::Undershoot;
}

double shoot_synchronized(const ProblemParams& p, const CouplingRoot& root, const ShootingOptions& opts)
{
    (void)p.gamma();
    const double residual = std::abs(coupling_f(root.c_tilde, p));
    if (residual > 1e-12 * std::max(1.0, coupling_f_scale(root.c_tilde, p)))
        throw Error(ErrorKind::RootResidualTooLarge,
                    fmt::format("|f({})| = {} is not a root", root.c_tilde, residual));
    if (!(opts.a_lo > 0.0) || !(opts.a_hi > opts.a_lo))
        throw Error(ErrorKind::BracketNotFound,
                    fmt::format("invalid amplitude window [{}, {}]", opts.a_lo, opts.a_hi));

    double lo = opts.a_lo;
    double hi = opts.a_hi;
    const ShotOutcome at_lo = classify_shot(p, root.c_tilde, lo, opts);
    const ShotOutcome at_hi = classify_shot(p, root.c_tilde, hi, opts);
    if (at_lo == ShotOutcome::Decayed)
        return lo;
    if (at_hi == ShotOutcome::Decayed)
        return hi;
    if (at_lo != ShotOutcome::Undershoot || at_hi != ShotOutcome::Overshoot)
        throw Error(ErrorKind::BracketNotFound,
                    fmt::format("no undershoot/overshoot dichotomy in the amplitude window [{}, {}]", lo, hi));

    for (int it = 0; it < opts.max_bisections && hi - lo > opts.rel_width * hi; ++it) {
        // Geometric midpoint while the window spans decades.
        const double mid = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        switch (classify_shot(p, root.c_tilde, mid, opts)) {
        case ShotOutcome::Undershoot: lo = mid; break;
        case ShotOutcome::Overshoot: hi = mid; break;
        case ShotOutcome::Decayed: return mid;
        }
    }
    return 0.5 * (lo + hi);
}

double proportionality_defect(const EFTrajectory& traj, double c_tilde)
{
    if (traj.states.empty())
        throw Error(ErrorKind::EmptyTrajectory, "proportionality defect of an empty trajectory");
    double sup_defect = 0.0;
    double sup_u = 0.0;
    for (const EFState& s : traj.states) {
        sup_defect = std::max(sup_defect, std::abs(s.y_u - c_tilde * s.y_v));
        sup_u = std::max(sup_u, std::abs(s.y_u));
    }
    if (sup_u == 0.0)
        return sup_defect == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return sup_defect / sup_u;
}

namespace {

// Argmax of one component: locate the largest sample, then the root of the
// (quadratic) derivative of the cubic Hermite interpolant on the adjacent
// step where the slope changes sign.
double interpolated_argmax(const EFTrajectory& traj, double EFState::*y, double EFState::*dy)
{
    const auto& st = traj.states;
    if (st.size() < 3)
        throw Error(ErrorKind::EmptyTrajectory, "maximum location needs at least 3 states");
    std::size_t k = 0;
    for (std::size_t i = 1; i < st.size(); ++i)
        if (st[i].*y > st[k].*y)
            k = i;
    if (k == 0 || k + 1 == st.size())
        throw Error(ErrorKind::MaximumOnBoundary,
                    fmt::format("maximum at the trajectory end t = {}", st[k].t));

    const double dir = st.back().t > st.front().t ? 1.0 : -1.0;
    // Forward in t the slope goes from >= 0 to <= 0 across the maximum.
    const std::size_t i0 = dir * (st[k].*dy) > 0.0 ? k : k - 1;
    const EFState& a = st[i0];
    const EFState& b = st[i0 + 1];
    const double h = b.t - a.t;
    const double y0 = a.*y, y1 = b.*y, m0 = a.*dy * h, m1 = b.*dy * h;
    // d/dtheta of the Hermite cubic: A theta^2 + B theta + C
    const double A = 6.0 * y0 + 3.0 * m0 - 6.0 * y1 + 3.0 * m1;
    const double B = -6.0 * y0 - 4.0 * m0 + 6.0 * y1 - 2.0 * m1;
    const double C = m0;
    double theta = 0.5;
    if (m0 == 0.0) {
        theta = 0.0;
    } else if (m1 == 0.0) {
        theta = 1.0;
    } else if (std::abs(A) <= 1e-14 * (std::abs(B) + std::abs(C))) {
        theta = -C / B;
    } else {
        const double disc = std::max(B * B - 4.0 * A * C, 0.0);
        const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
        const double r1 = q / A;
        const double r2 = q != 0.0 ? C / q : r1;
        const auto inside = [](double r) { return r >= -1e-9 && r <= 1.0 + 1e-9; };
        theta = inside(r1) && !inside(r2) ? r1 : r2;
        if (inside(r1) && inside(r2))
            theta = std::abs(r1 - 0.5) < std::abs(r2 - 0.5) ? r1 : r2;
    }
    theta = std::clamp(theta, 0.0, 1.0);
    return a.t + theta * h;
}

} // namespace

std::pair<double, double> simultaneous_max_check(const EFTrajectory& traj)
{
    return {interpolated_argmax(traj, &EFState::y_u, &EFState::p_u),
            interpolated_argmax(traj, &EFState::y_v, &EFState::p_v)};
}

double scalar_energy(const EFState& state, const ProblemParams& p)
{
    const double kappa2 = p.lambda_n() - p.gamma();
    const double y = state.y_u;
    return 0.5 * state.p_u * state.p_u - 0.5 * kappa2 * y * y + std::pow(std::abs(y), p.two_star()) / p.two_star();
}

namespace {

void require_positive_grid(std::span<const double> grid)
{
    if (grid.empty())
        throw Error(ErrorKind::NonpositiveArgument, "empty radial grid");
    for (double r : grid)
        if (!(r > 0.0))
            throw Error(ErrorKind::NonpositiveArgument, fmt::format("grid radius {} must be positive", r));
}

template <std::size_t N>
double normalized(const std::array<double, N>& terms)
{
    double sum = 0.0;
    double largest = 1.0;
    for (double t : terms) {
        sum += t;
        largest = std::max(largest, std::abs(t));
    }
    return std::abs(sum) / largest;
}

} // namespace

std::pair<double, double> radial_system_residual(const SynchronizedFamily& family, std::span<const double> grid)
{
    require_positive_grid(grid);
    const ProblemParams& p = family.profile.params();
    const double n = p.n();
    const double gamma = p.gamma();
    const double nu = p.nu(), a = p.alpha(), b = p.beta(), e = p.two_star() - 1.0;
    double max_u = 0.0, max_v = 0.0;
    for (double r : grid) {
        const RadialDerivatives d = family.profile.derivatives(r);
        const double u = family.c1 * d.u, du = family.c1 * d.du, d2u = family.c1 * d.d2u;
        const double v = family.c2 * d.u, dv = family.c2 * d.du, d2v = family.c2 * d.d2u;
        // (r^{n-1} w')' / r^{n-1} = w'' + (n-1) w'/r
        const std::array<double, 5> eq_u{d2u, (n - 1) * du / r, gamma * u / (r * r), std::pow(u, e),
                                         nu * a * std::pow(u, a - 1.0) * std::pow(v, b)};
        const std::array<double, 5> eq_v{d2v, (n - 1) * dv / r, gamma * v / (r * r), std::pow(v, e),
                                         nu * b * std::pow(u, a) * std::pow(v, b - 1.0)};
        max_u = std::max(max_u, normalized(eq_u));
        max_v = std::max(max_v, normalized(eq_v));
    }
    return {max_u, max_v};
}

std::pair<double, double> weighted_system_residual(const SynchronizedFamily& family, double tau,
                                                   std::span<const double> grid)
{
    const ProblemParams& p = family.profile.params();
    const double n = p.n();
    const double gamma = p.gamma();
    const double defect = tau * tau - (n - 2) * tau + gamma;
    if (std::abs(defect) > 1e-12 * std::max(1.0, std::abs(gamma) + (n - 2) * std::abs(tau)))
        throw Error(ErrorKind::TauNotARoot,
                    fmt::format("tau = {} does not solve tau^2 - (n-2) tau + gamma = 0 (defect {})", tau, defect));
    require_positive_grid(grid);
    const double nu = p.nu(), a = p.alpha(), b = p.beta(), e = p.two_star() - 1.0;
    double max_u = 0.0, max_v = 0.0;
    for (double r : grid) {
        const RadialDerivatives d = family.profile.weighted_derivatives(r, tau);
        const double u = family.c1 * d.u, du = family.c1 * d.du, d2u = family.c1 * d.d2u;
        const double v = family.c2 * d.u, dv = family.c2 * d.du, d2v = family.c2 * d.d2u;
        // Divided by r^{n-1-2 tau}: weight r^{-(2*-2) tau} on the nonlinear terms.
        const double weight = std::pow(r, -(p.two_star() - 2.0) * tau);
        const double drift = (n - 1 - 2.0 * tau) / r;
        const std::array<double, 4> eq_u{d2u, drift * du, weight * std::pow(u, e),
                                         weight * nu * a * std::pow(u, a - 1.0) * std::pow(v, b)};
        const std::array<double, 4> eq_v{d2v, drift * dv, weight * std::pow(v, e),
                                         weight * nu * b * std::pow(u, a) * std::pow(v, b - 1.0)};
        max_u = std::max(max_u, normalized(eq_u));
        max_v = std::max(max_v, normalized(eq_v));
    }
    return {max_u, max_v};
}

std::pair<double, double> ef_system_residual(const SynchronizedFamily& family, std::span<const double> t_grid)
{
    if (t_grid.empty())
        throw Error(ErrorKind::PreconditionViolated, "empty t grid");
    const ProblemParams& p = family.profile.params();
    const auto& d = family.profile.derived();
    const double kappa2 = d.kappa * d.kappa;
    const double nu = p.nu(), a = p.alpha(), b = p.beta(), e = p.two_star() - 1.0;
    const double t0 = std::log(family.profile.mu());
    double max_u = 0.0, max_v = 0.0;
    for (double t : t_grid) {
        const ExactProfile u = exact_component(family.c1 * d.amplitude, d.kappa, d.delta, t - t0);
        const ExactProfile v = exact_component(family.c2 * d.amplitude, d.kappa, d.delta, t - t0);
        const std::array<double, 4> eq_u{u.d2y, -kappa2 * u.y, std::pow(u.y, e),
                                         nu * a * std::pow(u.y, a - 1.0) * std::pow(v.y, b)};
        const std::array<double, 4> eq_v{v.d2y, -kappa2 * v.y, std::pow(v.y, e),
                                         nu * b * std::pow(u.y, a) * std::pow(v.y, b - 1.0)};
        max_u = std::max(max_u, normalized(eq_u));
        max_v = std::max(max_v, normalized(eq_v));
    }
    return {max_u, max_v};
}

void write_trajectory_csv(std::ostream& out, const EFTrajectory& traj)
{
    out << "t,y_u,p_u,y_v,p_v\n";
    for (const EFState& s : traj.states)
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.y_u, s.p_u, s.y_v, s.p_v);
}

} // namespace hsds
