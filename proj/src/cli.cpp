#include "hsds/cli.hpp"

#include "hsds/coupling.hpp"
#include "hsds/error.hpp"
#include "hsds/ode.hpp"
#include "hsds/params.hpp"
#include "hsds/scalar.hpp"
#include "hsds/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace hsds::cli {

namespace {

struct ParamInputs {
    int n = 0;
    double gamma = 0.0;
    std::optional<double> gamma1;
    std::optional<double> gamma2;
    double nu = 1.0;
    std::optional<double> alpha;
    std::optional<double> beta;
    double mu0 = 1.0;
    std::string format;
    std::string out_path;
    std::optional<double> tol;

    ProblemParams build() const
    {
        const double g1 = gamma1.value_or(gamma);
        const double g2 = gamma2.value_or(gamma);
        const double two_star = critical_exponent(n);
        const double a = alpha ? *alpha : (beta ? two_star - *beta : 0.5 * two_star);
        const double b = beta.value_or(two_star - a);
        return ProblemParams(n, g1, g2, nu, a, b);
    }
};

void add_param_options(CLI::App* cmd, ParamInputs& in, const std::string& default_format)
{
    cmd->add_option("--n", in.n, "Space dimension (>= 3)")->required();
    cmd->add_option("--gamma", in.gamma, "Hardy coefficient, 0 <= gamma < ((n-2)/2)^2")->capture_default_str();
    cmd->add_option("--gamma1", in.gamma1, "Hardy coefficient of the first equation (overrides --gamma)");
    cmd->add_option("--gamma2", in.gamma2, "Hardy coefficient of the second equation (overrides --gamma)");
    cmd->add_option("--nu", in.nu, "Coupling parameter nu >= 0")->capture_default_str();
    cmd->add_option("--alpha", in.alpha, "Coupling exponent alpha; beta = 2* - alpha (default 2*/2)");
    cmd->add_option("--beta", in.beta, "Coupling exponent beta; must satisfy alpha + beta = 2*");
    cmd->add_option("--mu0", in.mu0, "Profile scale mu0 > 0")->capture_default_str();
    in.format = default_format;
    cmd->add_option("--format", in.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    cmd->add_option("--out", in.out_path, "Write output to this path instead of stdout");
    cmd->add_option("--tol", in.tol, "Tolerance override (integration / shooting)");
}

// Output sink that is either the caller's stream or a file opened up front.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::out | std::ios::trunc);
            if (!file_)
                throw Error(ErrorKind::IoError, fmt::format("cannot open '{}' for writing", path));
            stream_ = &file_;
        }
    }

    std::ostream& stream() { return *stream_; }

    void finish()
    {
        stream_->flush();
        if (!*stream_)
            throw Error(ErrorKind::IoError, "failed to write output");
    }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string g17(double x)
{
    return fmt::format("{:.17g}", x);
}

int exit_code_for(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::BracketNotFound: return kBracketNotFound;
    case ErrorKind::IoError: return kUnwritableOutput;
    default: return kInvalidParams;
    }
}

nlohmann::ordered_json params_json(const ProblemParams& p)
{
    return {{"n", p.n()},   {"gamma1", p.gamma1()}, {"gamma2", p.gamma2()},
            {"nu", p.nu()}, {"alpha", p.alpha()},   {"beta", p.beta()}};
}

int cmd_classify(const ParamInputs& in, std::ostream& out, std::ostream& err)
{
    const ProblemParams p = in.build();
    const Classification cls = classify(p, in.mu0);
    for (const std::string& w : cls.warnings)
        err << "warning: " << w << '\n';

    Sink sink(in.out_path, out);
    std::ostream& os = sink.stream();
    if (in.format == "json") {
        nlohmann::ordered_json j;
        j["params"] = params_json(p);
        j["mu0"] = in.mu0;
        j["families"] = nlohmann::ordered_json::array();
        for (const SynchronizedFamily& f : cls.families)
            j["families"].push_back(
                {{"c_tilde", f.root.c_tilde}, {"c1", f.c1}, {"c2", f.c2}, {"f_prime", f.root.f_prime}});
        j["degenerate_roots"] = nlohmann::ordered_json::array();
        for (const CouplingRoot& r : cls.degenerate_roots)
            j["degenerate_roots"].push_back({{"c_tilde", r.c_tilde}, {"f_prime", r.f_prime}});
        j["warnings"] = cls.warnings;
        os << j.dump(2) << '\n';
    } else {
        os << "c_tilde,c1,c2,f_prime\n";
        for (const SynchronizedFamily& f : cls.families)
            os << fmt::format("{},{},{},{}\n", g17(f.root.c_tilde), g17(f.c1), g17(f.c2), g17(f.root.f_prime));
    }
    sink.finish();
    return cls.families.empty() ? kDegenerateOnly : kOk;
}

int cmd_verify(const ParamInputs& in, double perturbation, std::ostream& out, std::ostream& err)
{
    const ProblemParams p = in.build();
    VerificationOptions opts;
    opts.amplitude_perturbation = perturbation;
    if (in.tol)
        opts.integration_tol = *in.tol;
    const VerificationReport report = full_verification(p, in.mu0, opts);
    Sink sink(in.out_path, out);
    if (in.format == "json")
        sink.stream() << to_json(report).dump(2) << '\n';
    else if (in.format == "csv")
        write_report_csv(sink.stream(), report);
    else
        sink.stream() << to_text(report);
    sink.finish();
    for (const Check& c : report.checks)
        if (!c.pass)
            err << fmt::format("FAILED {}: {} {} {}\n", c.name, g17(c.measured), to_string(c.comparison),
                               g17(c.threshold));
    return report.overall ? kOk : kCheckFailed;
}

int cmd_shoot(const ParamInputs& in, const ShootingOptions& base, std::ostream& out, std::ostream& err)
{
    const ProblemParams p = in.build();
    const Classification cls = classify(p, in.mu0);
    for (const std::string& w : cls.warnings)
        err << "warning: " << w << '\n';
    if (cls.families.empty())
        return kDegenerateOnly;
    ShootingOptions opts = base;
    if (in.tol)
        opts.tol = *in.tol;
    const auto& d = p.derived();

    struct Row {
        double c_tilde, a_star, target, rel_error;
    };
    std::vector<Row> rows;
    for (const SynchronizedFamily& f : cls.families) {
        const double a_star = shoot_synchronized(p, f.root, opts);
        const double target = f.c1 * d.amplitude * std::pow(2.0, -d.delta);
        rows.push_back({f.root.c_tilde, a_star, target, std::abs(a_star - target) / target});
    }
    Sink sink(in.out_path, out);
    std::ostream& os = sink.stream();
    if (in.format == "json") {
        nlohmann::ordered_json j;
        j["params"] = params_json(p);
        j["shots"] = nlohmann::ordered_json::array();
        for (const Row& r : rows)
            j["shots"].push_back({{"c_tilde", r.c_tilde},
                                  {"a_star", r.a_star},
                                  {"closed_form", r.target},
                                  {"relative_error", r.rel_error}});
        os << j.dump(2) << '\n';
    } else {
        os << "c_tilde,a_star,closed_form,relative_error\n";
        for (const Row& r : rows)
            os << fmt::format("{},{},{},{}\n", g17(r.c_tilde), g17(r.a_star), g17(r.target), g17(r.rel_error));
    }
    sink.finish();
    return kOk;
}

struct SweepInputs {
    std::vector<double> nu_range;
    std::vector<double> alpha_range;
    int samples = 20;
    unsigned workers = 0;
};

struct SweepRow {
    ProblemParams params;
    std::vector<CouplingRoot> roots;
};

int cmd_sweep(const ParamInputs& in, const SweepInputs& sw, std::ostream& out, std::ostream& err)
{
    const bool over_nu = !sw.nu_range.empty();
    if (over_nu == !sw.alpha_range.empty())
        throw Error(ErrorKind::InvalidParameter, "give exactly one of --nu-range or --alpha-range");
    const std::vector<double>& range = over_nu ? sw.nu_range : sw.alpha_range;
    if (range.size() != 2 || !(range[0] < range[1]) || sw.samples < 2)
        throw Error(ErrorKind::InvalidParameter, "sweep range needs lo < hi and at least 2 samples");

    std::vector<ProblemParams> grid;
    for (int i = 0; i < sw.samples; ++i) {
        const double x = i + 1 == sw.samples ? range[1] : range[0] + (range[1] - range[0]) * i / (sw.samples - 1);
        ParamInputs sample = in;
        if (over_nu) {
            sample.nu = x;
        } else {
            sample.alpha = x;
            sample.beta.reset();
        }
        grid.push_back(sample.build());
    }

    // Workers claim sample indices; rows are written back by index.
    std::vector<std::optional<SweepRow>> rows(grid.size());
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::max(1u, std::min<unsigned>(sw.workers ? sw.workers : std::thread::hardware_concurrency(),
                                        unsigned(grid.size())));
    const auto work = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++)
            rows[i] = SweepRow{grid[i], find_positive_roots(grid[i]).roots};
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (std::thread& t : pool)
        t.join();

    Sink sink(in.out_path, out);
    std::ostream& os = sink.stream();
    os << "n,gamma,nu,alpha,beta,root_count,degenerate_count,roots\n";
    for (const auto& row : rows) {
        const ProblemParams& p = row->params;
        std::vector<std::string> simple;
        int degenerate = 0;
        for (const CouplingRoot& r : row->roots) {
            if (r.is_degenerate)
                ++degenerate;
            else
                simple.push_back(g17(r.c_tilde));
        }
        os << fmt::format("{},{},{},{},{},{},{},{}\n", p.n(), g17(p.gamma1()), g17(p.nu()), g17(p.alpha()),
                          g17(p.beta()), simple.size(), degenerate, fmt::join(simple, ";"));
    }
    sink.finish();
    (void)err;
    return kOk;
}

struct ExportInputs {
    std::string kind = "profile";
    std::string source = "exact";
    int points = 2048;
    double t_max = 10.0;
    std::size_t family = 0;
};

int cmd_export(const ParamInputs& in, const ExportInputs& ex, std::ostream& out, std::ostream& err)
{
    const ProblemParams p = in.build();
    const Classification cls = classify(p, in.mu0);
    for (const std::string& w : cls.warnings)
        err << "warning: " << w << '\n';
    if (cls.families.empty())
        return kDegenerateOnly;
    if (ex.family >= cls.families.size())
        throw Error(ErrorKind::InvalidParameter,
                    fmt::format("family index {} out of range ({} families)", ex.family, cls.families.size()));
    if (ex.points < 2 || !(ex.t_max > 0.0))
        throw Error(ErrorKind::InvalidParameter, "export needs at least 2 points and t_max > 0");
    const SynchronizedFamily& fam = cls.families[ex.family];

    Sink sink(in.out_path, out);
    std::ostream& os = sink.stream();
    if (ex.kind == "profile") {
        const RadialGrid grid = RadialGrid::log_uniform(1e-6, 1e6, ex.points);
        const auto& d = fam.profile.derived();
        os << "r,u,v,r_tau1_u,r_tau2_u\n";
        for (double r : grid.points()) {
            const double base = fam.profile.value(r);
            const double u = fam.c1 * base;
            os << fmt::format("{},{},{},{},{}\n", g17(r), g17(u), g17(fam.c2 * base), g17(std::pow(r, d.tau1) * u),
                              g17(std::pow(r, d.tau2) * u));
        }
    } else {
        const double t0 = std::log(in.mu0);
        EFTrajectory traj;
        if (ex.source == "exact") {
            traj = sample_exact_trajectory(fam, t0 - ex.t_max, t0 + ex.t_max, ex.points);
        } else {
            IntegrateOptions io;
            io.tol = in.tol.value_or(1e-10);
            traj = integrate(exact_ef_solution(fam, t0 - ex.t_max), {t0 - ex.t_max, t0 + ex.t_max}, p, io);
        }
        write_trajectory_csv(os, traj);
    }
    sink.finish();
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Classification and verification of synchronized solutions of the Hardy-Sobolev doubly "
                 "critical system", "hsds"};
    app.require_subcommand(1, 1);

    ParamInputs classify_in, verify_in, shoot_in, sweep_in, export_in;
    auto* classify_cmd = app.add_subcommand("classify", "List the synchronized families (roots of f and c1, c2)");
    add_param_options(classify_cmd, classify_in, "csv");

    auto* verify_cmd = app.add_subcommand("verify", "Run every numerical check and emit the verification report");
    add_param_options(verify_cmd, verify_in, "json");
    double perturbation = 1.0;
    verify_cmd->add_option("--perturb-amplitude", perturbation)->group("");

    auto* shoot_cmd = app.add_subcommand("shoot", "Recover the peak amplitude of each family by shooting");
    add_param_options(shoot_cmd, shoot_in, "csv");
    ShootingOptions shooting;
    shoot_cmd->add_option("--a-lo", shooting.a_lo, "Lower end of the amplitude window")->capture_default_str();
    shoot_cmd->add_option("--a-hi", shooting.a_hi, "Upper end of the amplitude window")->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "Count roots of f over a range of nu or alpha");
    add_param_options(sweep_cmd, sweep_in, "csv");
    SweepInputs sweep;
    sweep_cmd->add_option("--nu-range", sweep.nu_range, "lo hi")->expected(2);
    sweep_cmd->add_option("--alpha-range", sweep.alpha_range, "lo hi")->expected(2);
    sweep_cmd->add_option("--samples", sweep.samples, "Number of samples (>= 2)")->capture_default_str();
    sweep_cmd->add_option("--workers", sweep.workers, "Worker threads (0 = hardware concurrency)");

    auto* export_cmd = app.add_subcommand("export", "Write profile or trajectory data as CSV");
    add_param_options(export_cmd, export_in, "csv");
    ExportInputs exp;
    export_cmd->add_option("--kind", exp.kind, "profile or trajectory")
        ->check(CLI::IsMember({"profile", "trajectory"}))
        ->capture_default_str();
    export_cmd->add_option("--source", exp.source, "Trajectory source")
        ->check(CLI::IsMember({"exact", "integrated"}))
        ->capture_default_str();
    export_cmd->add_option("--points", exp.points, "Grid points")->capture_default_str();
    export_cmd->add_option("--t-max", exp.t_max, "Half-width of the t window around log mu0")->capture_default_str();
    export_cmd->add_option("--family", exp.family, "Family index (ascending C)")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalidParams;
    }

    try {
        if (*classify_cmd)
            return cmd_classify(classify_in, out, err);
        if (*verify_cmd)
            return cmd_verify(verify_in, perturbation, out, err);
        if (*shoot_cmd)
            return cmd_shoot(shoot_in, shooting, out, err);
        if (*sweep_cmd)
            return cmd_sweep(sweep_in, sweep, out, err);
        return cmd_export(export_in, exp, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e);
    }
}

} // namespace hsds::cli
