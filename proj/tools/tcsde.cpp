// tcsde: simulation and convergence experiments for SDEs driven by an
// inverse alpha-stable subordinator.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcsde/analysis.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/report.hpp"
#include "tcsde/solver.hpp"
#include "tcsde/subordinator.hpp"
#include "tcsde/timechange.hpp"

namespace fs = std::filesystem;
using namespace tcsde;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kOutDirEnv = "TCSDE_OUT_DIR";

/// Accepts plain reals and dyadic shorthand such as "2^-13".
double parse_real(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        if (text.rfind("2^", 0) == 0) {
            const int exponent = std::stoi(text.substr(2), &used);
            if (used + 2 == text.size()) return std::ldexp(1.0, exponent);
        } else {
            const double value = std::stod(text, &used);
            if (used == text.size()) return value;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse " + flag + " value '" + text + "'");
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const double value = parse_real(item, "--ladder");
        if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("ladder factors must be integers >= 1");
        out.push_back(static_cast<std::size_t>(value));
    }
    if (out.empty()) throw ConfigError("--ladder must list at least one factor");
    return out;
}

std::vector<MomentCheckRow> parse_grid(const std::string& text) {
    std::vector<MomentCheckRow> rows;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ';')) {
        if (item.empty()) continue;
        std::stringstream fields(item);
        std::string a, b, n;
        if (!std::getline(fields, a, ':') || !std::getline(fields, b, ':') || !std::getline(fields, n)) {
            throw ConfigError("grid rows must look like a:b:n, got '" + item + "'");
        }
        const double order = parse_real(n, "--grid");
        if (order < 1.0 || order != std::floor(order)) throw ConfigError("moment order must be an integer >= 1");
        rows.push_back({parse_real(a, "--grid"), parse_real(b, "--grid"), static_cast<int>(order)});
    }
    if (rows.empty()) throw ConfigError("--grid must contain at least one row");
    return rows;
}

void check_alpha_window(double alpha, bool allow_out_of_theory) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (alpha <= 0.5 && !allow_out_of_theory) {
        throw ConfigError("alpha <= 1/2 is outside the rate theorem; pass --allow-out-of-theory to run anyway");
    }
}

std::string out_of_theory_label(double alpha) { return alpha > 0.5 ? "false" : "true"; }

fs::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
    return "out";
}

/// --out if given, else $TCSDE_OUT_DIR/<fallback_name>, else stdout.
class OutputTarget {
public:
    OutputTarget(const std::string& flag_value, const std::string& fallback_name) {
        fs::path path;
        if (!flag_value.empty()) {
            path = flag_value;
        } else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
            path = fs::path(env) / fallback_name;
        }
        if (!path.empty()) {
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

struct SimulateArgs {
    double alpha = 0.8;
    double drift = 0.0;
    std::string delta = "2^-10";
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;
    std::string output = "path";
    std::string grid = "0.01";
    std::string out;
    bool allow_out_of_theory = false;
};

int run_simulate(const SimulateArgs& a) {
    check_alpha_window(a.alpha, a.allow_out_of_theory);
    const SubordinatorSpec spec{a.alpha, a.drift, parse_real(a.delta, "--delta")};
    spec.validate();
    RandomStream stream({a.seed, a.realization, SubstreamTag::Subordinator});
    const SubordinatorPath path = sample_path(spec, a.horizon, stream);

    OutputTarget target(a.out, "simulate.csv");
    std::ostream& out = target.stream();
    ConfigEcho echo = {{"command", "simulate"},
                       {"alpha", format_double(spec.alpha)},
                       {"drift", format_double(spec.drift)},
                       {"delta", format_double(spec.inner_step)},
                       {"horizon", format_double(a.horizon)},
                       {"seed", std::to_string(a.seed)},
                       {"realization", std::to_string(a.realization)},
                       {"output", a.output},
                       {"out_of_theory", out_of_theory_label(spec.alpha)}};
    if (a.output == "path") {
        write_comment_header(out, echo);
        out << "t,D\n";
        for (std::size_t i = 0; i < path.values.size(); ++i) {
            out << format_double(static_cast<double>(i) * spec.inner_step) << ',' << format_double(path.values[i])
                << '\n';
        }
    } else if (a.output == "inverse") {
        const double grid = parse_real(a.grid, "--grid");
        const std::size_t steps = grid_steps(a.horizon, grid);
        echo.emplace_back("grid", format_double(grid));
        write_comment_header(out, echo);
        out << "t,E_tilde\n";
        for (std::size_t n = 0; n <= steps; ++n) {
            const double t = std::min(static_cast<double>(n) * grid, a.horizon);
            out << format_double(t) << ',' << format_double(inverse_at(path, t)) << '\n';
        }
    } else {
        throw ConfigError("--output must be path or inverse");
    }
    return 0;
}

struct SolveArgs {
    std::string system = "paper2d";
    std::string params;
    double alpha = 0.8;
    double drift = 0.0;
    std::string dt = "2^-10";
    std::string delta;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;
    bool keep_path = false;
    std::string out;
    std::string dump_drivers;
    bool allow_out_of_theory = false;
};

int run_solve(const SolveArgs& a) {
    check_alpha_window(a.alpha, a.allow_out_of_theory);
    const SdeSystem system = make_builtin(a.system, parse_params(a.params));
    const double dt = parse_real(a.dt, "--dt");
    const double delta = a.delta.empty() ? dt : parse_real(a.delta, "--delta");
    const SubordinatorSpec spec{a.alpha, a.drift, delta};
    spec.validate();
    const TimeChangeDrivers drivers = build_fine_drivers(spec, a.horizon, dt, system.m, a.seed, a.realization);

    ConfigEcho echo = {{"command", "solve"},
                       {"system", system.name},
                       {"alpha", format_double(spec.alpha)},
                       {"drift", format_double(spec.drift)},
                       {"dt", format_double(dt)},
                       {"delta", format_double(delta)},
                       {"T", format_double(a.horizon)},
                       {"seed", std::to_string(a.seed)},
                       {"realization", std::to_string(a.realization)},
                       {"keep_path", a.keep_path ? "true" : "false"},
                       {"out_of_theory", out_of_theory_label(spec.alpha)}};
    for (const auto& [k, v] : system.params) echo.emplace_back("param." + k, format_double(v));

    if (!a.dump_drivers.empty()) {
        std::ofstream dump(a.dump_drivers, std::ios::binary);
        if (!dump) throw std::runtime_error("cannot open " + a.dump_drivers + " for writing");
        write_comment_header(dump, echo);
        dump << "n,t,E,dE";
        for (std::size_t i = 1; i <= drivers.dims; ++i) dump << ",dB_" << i;
        dump << '\n';
        for (std::size_t n = 0; n < drivers.steps; ++n) {
            dump << n << ',' << format_double(drivers.time(n)) << ',' << format_double(drivers.e_values[n]) << ','
                 << format_double(drivers.delta_e[n]);
            for (double db : drivers.increment_b(n)) dump << ',' << format_double(db);
            dump << '\n';
        }
    }

    const EmTrajectory traj = em_solve(system, drivers, a.keep_path);
    OutputTarget target(a.out, "solve.csv");
    std::ostream& out = target.stream();
    write_comment_header(out, echo);
    out << "n,t,E";
    for (std::size_t i = 1; i <= system.d; ++i) out << ",X_" << i;
    out << '\n';
    const auto row = [&](std::size_t n, std::span<const double> x) {
        out << n << ',' << format_double(drivers.time(n)) << ',' << format_double(drivers.e_values[n]);
        for (double v : x) out << ',' << format_double(v);
        out << '\n';
    };
    if (a.keep_path) {
        for (std::size_t n = 0; n <= traj.steps; ++n) row(n, traj.state(n));
    } else {
        row(0, system.initial_state);
        row(traj.steps, traj.terminal);
    }
    return 0;
}

struct ConvergeArgs {
    std::string system = "paper2d";
    std::string params;
    std::vector<double> alphas;
    double drift = 0.0;
    std::string profile = "desk";
    std::optional<std::size_t> samples;
    std::string dt_ref;
    std::string ladder = "8,16,32,64";
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned threads = 0;
    bool allow_out_of_theory = false;
};

int run_converge(const ConvergeArgs& a) {
    const Profile profile = parse_profile(a.profile);
    const ProfileDefaults defaults = profile_defaults(profile);
    const std::vector<double> alphas = a.alphas.empty() ? std::vector<double>{0.6, 0.8} : a.alphas;
    for (double alpha : alphas) check_alpha_window(alpha, a.allow_out_of_theory);
    const SdeSystem system = make_builtin(a.system, parse_params(a.params));
    const double dt_ref = a.dt_ref.empty() ? defaults.dt_ref : parse_real(a.dt_ref, "--dt-ref");
    const std::size_t samples = a.samples.value_or(defaults.samples);
    const std::vector<std::size_t> ladder = parse_ladder(a.ladder);

    std::vector<ConvergenceReport> reports;
    for (double alpha : alphas) {
        ConvergenceConfig config;
        config.system = system;
        config.spec = {alpha, a.drift, dt_ref};
        config.horizon = a.horizon;
        config.dt_ref = dt_ref;
        config.ladder = ladder;
        config.samples = samples;
        config.master_seed = a.seed;
        config.threads = a.threads;
        config.allow_out_of_theory = a.allow_out_of_theory;
        reports.push_back(run_convergence_study(config));
        const auto& r = reports.back();
        std::cerr << "[converge] alpha=" << alpha << " drift=" << a.drift << " fitted=" << r.fit.slope
                  << " theoretical=" << r.theoretical_rate << " r2=" << r.fit.r_squared << '\n';
    }

    std::string alpha_list;
    std::string ladder_list;
    for (double alpha : alphas) alpha_list += (alpha_list.empty() ? "" : ";") + format_double(alpha);
    for (std::size_t f : ladder) ladder_list += (ladder_list.empty() ? "" : ";") + std::to_string(f);
    bool any_out_of_theory = false;
    for (double alpha : alphas) any_out_of_theory = any_out_of_theory || alpha <= 0.5;
    ConfigEcho echo = {{"command", "converge"},
                       {"system", system.name},
                       {"alphas", alpha_list},
                       {"drift", format_double(a.drift)},
                       {"profile", to_string(profile)},
                       {"T", format_double(a.horizon)},
                       {"dt_ref", format_double(dt_ref)},
                       {"ladder", ladder_list},
                       {"M", std::to_string(samples)},
                       {"seed", std::to_string(a.seed)},
                       {"out_of_theory", any_out_of_theory ? "true" : "false"}};
    for (const auto& [k, v] : system.params) echo.emplace_back("param." + k, format_double(v));
    const fs::path dir = resolve_out_dir(a.out_dir);
    for (const auto& p : write_convergence_outputs(dir, reports, echo)) std::cout << p.string() << '\n';
    return 0;
}

struct MomentsArgs {
    double alpha = 0.7;
    std::string grid = "0.5:1:1;0.5:1:2;0.5:1:4";
    std::size_t paths = 100000;
    std::string delta = "2^-10";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
    bool allow_out_of_theory = false;
};

int run_verify_moments(const MomentsArgs& a) {
    check_alpha_window(a.alpha, a.allow_out_of_theory);
    const SubordinatorSpec spec{a.alpha, 0.0, parse_real(a.delta, "--delta")};
    spec.validate();
    const std::vector<MomentCheckRow> rows = parse_grid(a.grid);
    const auto checks = verify_moment_bounds(spec, rows, a.paths, a.seed, a.threads);

    OutputTarget target(a.out, "moments.csv");
    std::ostream& out = target.stream();
    write_comment_header(out, {{"command", "verify-moments"},
                               {"alpha", format_double(spec.alpha)},
                               {"delta", format_double(spec.inner_step)},
                               {"grid", a.grid},
                               {"paths", std::to_string(a.paths)},
                               {"seed", std::to_string(a.seed)},
                               {"out_of_theory", out_of_theory_label(spec.alpha)}});
    out << "alpha,a,b,n,estimate,std_error,lower,upper,pass\n";
    bool all_pass = true;
    for (const auto& c : checks) {
        out << format_double(spec.alpha) << ',' << format_double(c.row.t_a) << ',' << format_double(c.row.t_b) << ','
            << c.row.order << ',' << format_double(c.estimate.mean) << ',' << format_double(c.estimate.std_error)
            << ',' << format_double(c.bounds.lower) << ',' << format_double(c.bounds.upper) << ','
            << (c.pass ? "true" : "false") << '\n';
        all_pass = all_pass && c.pass;
    }
    std::cerr << "[verify-moments] " << (all_pass ? "all rows within bounds" : "some rows outside bounds") << '\n';
    return 0;
}

struct ReproArgs {
    std::string profile = "desk";
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

int run_repro(const ReproArgs& a) {
    ReproOptions options;
    options.profile = parse_profile(a.profile);
    options.out_dir = resolve_out_dir(a.out_dir);
    options.master_seed = a.seed;
    options.threads = a.threads;
    const RunManifest manifest = repro(options, &std::cerr);
    std::cout << (options.out_dir / "manifest.json").string() << '\n';
    for (const auto& f : manifest.files) std::cout << f.sha256 << "  " << f.path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-changed SDE simulation and strong-convergence experiments"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Sample a subordinator path or its inverse");
    simulate->add_option("--alpha", sim.alpha, "Stability index in (0,1)")->capture_default_str();
    simulate->add_option("--drift", sim.drift, "Linear drift of the subordinator")->capture_default_str();
    simulate->add_option("--delta", sim.delta, "Inner step (number or 2^k)")->capture_default_str();
    simulate->add_option("--horizon", sim.horizon, "Time horizon T")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    simulate->add_option("--realization", sim.realization, "Realization index")->capture_default_str();
    simulate->add_option("--output", sim.output, "path (t,D) or inverse (t,E_tilde)")->capture_default_str();
    simulate->add_option("--grid", sim.grid, "Grid step for --output inverse")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output CSV (default stdout)");
    simulate->add_flag("--allow-out-of-theory", sim.allow_out_of_theory, "Permit alpha <= 1/2");

    SolveArgs sol;
    auto* solve = app.add_subcommand("solve", "Solve one realization with the equidistant EM scheme");
    solve->add_option("--system", sol.system, "paper2d, expdecay or geometric")->capture_default_str();
    solve->add_option("--params", sol.params, "Builtin parameters k=v,...");
    solve->add_option("--alpha", sol.alpha, "Stability index in (0,1)")->capture_default_str();
    solve->add_option("--drift", sol.drift, "Linear drift of the subordinator")->capture_default_str();
    solve->add_option("--dt", sol.dt, "Outer step (number or 2^k)")->capture_default_str();
    solve->add_option("--delta", sol.delta, "Inner subordinator step (default: dt)");
    solve->add_option("--T", sol.horizon, "Terminal time")->capture_default_str();
    solve->add_option("--seed", sol.seed, "Master seed")->capture_default_str();
    solve->add_option("--realization", sol.realization, "Realization index")->capture_default_str();
    solve->add_flag("--keep-path", sol.keep_path, "Emit every grid state, not just X_0 and X_N");
    solve->add_option("--out", sol.out, "Output CSV (default stdout)");
    solve->add_option("--dump-drivers", sol.dump_drivers, "Write n,t,E,dE,dB_* to this CSV");
    solve->add_flag("--allow-out-of-theory", sol.allow_out_of_theory, "Permit alpha <= 1/2");

    ConvergeArgs conv;
    std::size_t conv_samples = 0;
    auto* converge = app.add_subcommand("converge", "Coupled Monte Carlo strong-convergence study");
    converge->add_option("--system", conv.system, "paper2d, expdecay or geometric")->capture_default_str();
    converge->add_option("--params", conv.params, "Builtin parameters k=v,...");
    converge->add_option("--alpha", conv.alphas, "Stability index; repeat for a sweep (default 0.6 0.8)");
    converge->add_option("--drift", conv.drift, "Linear drift of the subordinator")->capture_default_str();
    converge->add_option("--profile", conv.profile, "desk (2^-13, M=2000) or paper (2^-15, M=10^4)")
        ->capture_default_str();
    auto* m_opt = converge->add_option("--M", conv_samples, "Monte Carlo sample count (overrides profile)");
    converge->add_option("--dt-ref", conv.dt_ref, "Reference step (overrides profile)");
    converge->add_option("--ladder", conv.ladder, "Coarsening factors relative to dt_ref")->capture_default_str();
    converge->add_option("--T", conv.horizon, "Terminal time")->capture_default_str();
    converge->add_option("--seed", conv.seed, "Master seed")->capture_default_str();
    converge->add_option("--out-dir", conv.out_dir, "Output directory (default $TCSDE_OUT_DIR or ./out)");
    converge->add_option("--threads", conv.threads, "Worker threads (0: all cores)")->capture_default_str();
    converge->add_flag("--allow-out-of-theory", conv.allow_out_of_theory, "Permit alpha <= 1/2");

    MomentsArgs mom;
    auto* moments = app.add_subcommand("verify-moments", "Check inverse-subordinator moments against their bounds");
    moments->add_option("--alpha", mom.alpha, "Stability index in (0,1)")->capture_default_str();
    moments->add_option("--grid", mom.grid, "Rows a:b:n separated by ';'")->capture_default_str();
    moments->add_option("--paths", mom.paths, "Monte Carlo paths")->capture_default_str();
    moments->add_option("--delta", mom.delta, "Inner subordinator step")->capture_default_str();
    moments->add_option("--seed", mom.seed, "Master seed")->capture_default_str();
    moments->add_option("--threads", mom.threads, "Worker threads (0: all cores)")->capture_default_str();
    moments->add_option("--out", mom.out, "Output CSV (default stdout)");
    moments->add_flag("--allow-out-of-theory", mom.allow_out_of_theory, "Permit alpha <= 1/2");

    ReproArgs rep;
    auto* repro_cmd = app.add_subcommand("repro", "Regenerate the convergence table and figure data");
    repro_cmd->add_option("--profile", rep.profile, "desk or paper")->capture_default_str();
    repro_cmd->add_option("--out-dir", rep.out_dir, "Output directory (default $TCSDE_OUT_DIR or ./out)");
    repro_cmd->add_option("--seed", rep.seed, "Master seed")->capture_default_str();
    repro_cmd->add_option("--threads", rep.threads, "Worker threads (0: all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*solve) return run_solve(sol);
        if (*converge) {
            if (*m_opt) conv.samples = conv_samples;
            return run_converge(conv);
        }
        if (*moments) return run_verify_moments(mom);
        if (*repro_cmd) return run_repro(rep);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ResourceError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
