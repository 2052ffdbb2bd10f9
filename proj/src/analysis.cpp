#include "tcsde/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <utility>

#include "tcsde/errors.hpp"
#include "tcsde/parallel.hpp"
#include "tcsde/solver.hpp"

namespace tcsde {

ProfileDefaults profile_defaults(Profile profile) {
    switch (profile) {
        case Profile::Desk: return {0x1.0p-13, 2000};
        case Profile::Paper: return {0x1.0p-15, 10000};
    }
    return {0x1.0p-13, 2000};
}

Profile parse_profile(const std::string& name) {
    if (name == "desk") return Profile::Desk;
    if (name == "paper") return Profile::Paper;
    throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

std::string to_string(Profile profile) { return profile == Profile::Paper ? "paper" : "desk"; }

void ConvergenceConfig::validate() const {
    SubordinatorSpec effective = spec;
    effective.inner_step = dt_ref;
    effective.validate(!allow_out_of_theory);
    if (samples < 2) throw ConfigError("sample count M must be >= 2");
    if (ladder.empty()) throw ConfigError("ladder must not be empty");
    if (!std::is_sorted(ladder.begin(), ladder.end())) throw ConfigError("ladder must be sorted");
    const std::size_t steps = grid_steps(horizon, dt_ref);
    for (std::size_t factor : ladder) {
        if (factor < 1 || steps % factor != 0) {
            throw ConfigError("ladder factor " + std::to_string(factor) + " does not divide T/dt_ref");
        }
    }
    if (system.initial_state.size() != system.d) throw ConfigError("system initial state has wrong dimension");
}

double theoretical_rate(double alpha, double drift) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (drift > 0.0) return 0.5;
    return (1.0 + alpha) / 4.0;
}

LogLogFit fit_loglog(std::span<const LadderError> points) {
    if (points.size() < 2) throw DomainError("log-log fit needs at least two points");
    // Sort a copy so the floating-point sums do not depend on input order.
    std::vector<std::pair<double, double>> xy;
    xy.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.dt > 0.0) || !(p.error > 0.0)) throw DomainError("log-log fit needs positive dt and error");
        xy.emplace_back(std::log2(p.dt), std::log2(p.error));
    }
    std::sort(xy.begin(), xy.end());
    const auto n = static_cast<double>(xy.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : xy) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [x, y] : xy) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if (sxx == 0.0) throw DomainError("log-log fit is degenerate: all dt are equal");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double ss_res = 0.0;
    for (const auto& [x, y] : xy) {
        const double r = y - (fit.intercept + fit.slope * x);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

ConvergenceReport run_convergence_study(const ConvergenceConfig& config,
                                        const std::function<void(std::size_t, std::size_t)>& progress) {
    config.validate();
    SubordinatorSpec spec = config.spec;
    spec.inner_step = config.dt_ref;

    const std::size_t levels = config.ladder.size();
    const std::size_t samples = config.samples;
    const std::size_t d = config.system.d;
    std::vector<double> errors(samples * levels);
    std::atomic<std::size_t> done{0};

    parallel_for(samples, config.threads, [&](std::size_t j) {
        const TimeChangeDrivers fine =
            config.driver_factory
                ? config.driver_factory(j)
                : build_fine_drivers(spec, config.horizon, config.dt_ref, config.system.m, config.master_seed, j);
        try {
            const std::vector<double> reference = em_terminal(config.system, fine);
            for (std::size_t l = 0; l < levels; ++l) {
                const std::vector<double> coarse = em_terminal(config.system, coarsen(fine, config.ladder[l]));
                double sq = 0.0;
                for (std::size_t i = 0; i < d; ++i) sq += (coarse[i] - reference[i]) * (coarse[i] - reference[i]);
                errors[j * levels + l] = std::sqrt(sq);
            }
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " in realization " + std::to_string(j), e.step(), j);
        }
        if (progress) progress(++done, samples);
    });

    ConvergenceReport report;
    report.system = config.system.name;
    report.alpha = spec.alpha;
    report.drift = spec.drift;
    report.horizon = config.horizon;
    report.dt_ref = config.dt_ref;
    report.samples = samples;
    report.master_seed = config.master_seed;
    report.out_of_theory = !(spec.alpha > 0.5);
    report.theoretical_rate = theoretical_rate(spec.alpha, spec.drift);

    const auto count = static_cast<double>(samples);
    for (std::size_t l = 0; l < levels; ++l) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t j = 0; j < samples; ++j) {
            const double e = errors[j * levels + l];
            sum += e;
            sum_sq += e * e;
        }
        const double mean = sum / count;
        const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
        if (!(mean > 0.0)) {
            throw NumericalError("strong error is zero at ladder factor " + std::to_string(config.ladder[l]) +
                                 ": coarse and reference solutions coincide");
        }
        report.entries.push_back({config.ladder[l], config.dt_ref * static_cast<double>(config.ladder[l]), mean,
                                  std::sqrt(variance / count)});
    }
    if (levels >= 2) report.fit = fit_loglog(report.entries);
    return report;
}

std::vector<MomentCheck> verify_moment_bounds(const SubordinatorSpec& spec, std::span<const MomentCheckRow> rows,
                                              std::size_t n_paths, std::uint64_t master_seed, unsigned threads) {
    std::vector<MomentCheck> out(rows.size());
    std::map<std::pair<double, double>, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        out[r].row = row;
        out[r].bounds = lemma3_bounds(spec.alpha, row.t_a, row.t_b, row.order);
        groups[{row.t_a, row.t_b}].push_back(r);
    }
    for (const auto& [interval, members] : groups) {
        std::vector<int> orders;
        for (std::size_t r : members) orders.push_back(rows[r].order);
        const auto estimates =
            empirical_moments(spec, interval.first, interval.second, orders, n_paths, master_seed, threads);
        for (std::size_t k = 0; k < members.size(); ++k) {
            auto& check = out[members[k]];
            check.estimate = estimates[k];
            const double slack = 3.0 * check.estimate.std_error;
            check.pass = check.estimate.mean >= check.bounds.lower - slack &&
                         check.estimate.mean <= check.bounds.upper + slack;
        }
    }
    return out;
}

}  // namespace tcsde
