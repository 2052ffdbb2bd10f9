#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcsde/sde.hpp"
#include "tcsde/subordinator.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

enum class Profile { Desk, Paper };

struct ProfileDefaults {
    double dt_ref;
    std::size_t samples;
};

ProfileDefaults profile_defaults(Profile profile);
Profile parse_profile(const std::string& name);
std::string to_string(Profile profile);

struct ConvergenceConfig {
    SdeSystem system;
    SubordinatorSpec spec;  // inner_step is overridden by dt_ref
    double horizon = 1.0;
    double dt_ref = 0x1.0p-15;
    std::vector<std::size_t> ladder = {8, 16, 32, 64};
    std::size_t samples = 10000;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
    bool allow_out_of_theory = false;
    /// Replaces the sampled drivers of realization j; test hook.
    std::function<TimeChangeDrivers(std::uint64_t realization)> driver_factory;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

struct LadderError {
    std::size_t factor = 0;
    double dt = 0.0;
    double error = 0.0;
    double std_error = 0.0;

    friend bool operator==(const LadderError&, const LadderError&) = default;
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;

    friend bool operator==(const LogLogFit&, const LogLogFit&) = default;
};

struct ConvergenceReport {
    std::string system;
    double alpha = 0.0;
    double drift = 0.0;
    double horizon = 1.0;
    double dt_ref = 0.0;
    std::size_t samples = 0;
    std::uint64_t master_seed = 0;
    bool out_of_theory = false;
    std::vector<LadderError> entries;  // ascending dt
    LogLogFit fit;
    double theoretical_rate = 0.0;

    friend bool operator==(const ConvergenceReport&, const ConvergenceReport&) = default;
};

/// (1 + alpha) / 4 for the pure stable clock; 1/2 once the subordinator has
/// a positive linear drift.
double theoretical_rate(double alpha, double drift = 0.0);

/// Ordinary least squares of log2(error) on log2(dt).
LogLogFit fit_loglog(std::span<const LadderError> points);

/**
 * Coupled strong-error study. Realization j samples one fine driver set at
 * dt_ref, solves it for the reference X^j(T), and re-solves the coarsened
 * drivers for every ladder factor. e_i is the mean Euclidean norm of the
 * terminal differences. Per-realization results are reduced in index order,
 * so the report does not depend on the thread count.
 *
 * Throws NumericalError if any e_i is exactly zero (reference and coarse
 * solution coincide, i.e. the ladder is degenerate).
 */
ConvergenceReport run_convergence_study(const ConvergenceConfig& config,
                                        const std::function<void(std::size_t done, std::size_t total)>& progress = {});

struct MomentCheckRow {
    double t_a = 0.0;
    double t_b = 0.0;
    int order = 1;
};

struct MomentCheck {
    MomentCheckRow row;
    MomentEstimate estimate;
    MomentBounds bounds;
    bool pass = false;
};

/// Checks empirical_moment against lemma3_bounds within 3 standard errors.
/// Rows sharing (t_a, t_b) reuse the same sampled paths.
std::vector<MomentCheck> verify_moment_bounds(const SubordinatorSpec& spec, std::span<const MomentCheckRow> rows,
                                              std::size_t n_paths, std::uint64_t master_seed, unsigned threads = 0);

}  // namespace tcsde
