#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tcsde/errors.hpp"
#include "tcsde/rng.hpp"

namespace tcsde {

/**
 * Drifted alpha-stable subordinator D with Laplace exponent
 * psi(s) = drift * s + s^alpha, sampled on an inner grid of step inner_step.
 */
struct SubordinatorSpec {
    double alpha = 0.8;
    double drift = 0.0;
    double inner_step = 0x1.0p-15;

    /// Throws ConfigError unless 0 < alpha < 1, drift >= 0, inner_step > 0.
    /// With require_rate_window, additionally requires alpha in (1/2, 1).
    void validate(bool require_rate_window = false) const;
};

/// Default cap on the number of stored path values.
inline constexpr std::size_t kDefaultMaxPathEntries = std::size_t{1} << 31;

/// D(i * delta), i = 0..len-1, extended until the last value exceeds horizon.
struct SubordinatorPath {
    SubordinatorSpec spec;
    double horizon = 0.0;
    std::vector<double> values;

    double delta() const { return spec.inner_step; }
};

/// Stable increment over step delta for given V in (-pi/2, pi/2) and W > 0.
///
/// Evaluates the Chambers-Mallows-Stuck/Kanter form for the unit-step
/// variate Z and returns delta^(1/alpha) * Z, which is the step-delta
/// increment by self-similarity.
double stable_increment_from(double alpha, double delta, double v, double w);

/// Draws V = pi * (u - 1/2) and W ~ Exp(1) from the stream.
double sample_stable_increment(double alpha, double delta, RandomStream& stream);

/// Same increment with the (alpha, delta) constants folded once; for loops.
class StableSampler {
public:
    StableSampler(double alpha, double delta);

    double operator()(double v, double w) const;
    double operator()(RandomStream& stream) const;

private:
    double alpha_;
    double inv_alpha_;
    double ratio_;
    double scale_;
};

/// Accumulates next_increment() + drift * delta from D(0) = 0 until the
/// value exceeds horizon. next_increment supplies the stable part only.
template <typename IncrementSource>
SubordinatorPath build_path(const SubordinatorSpec& spec, double horizon, IncrementSource&& next_increment,
                            std::size_t max_entries = kDefaultMaxPathEntries) {
    spec.validate();
    if (!(horizon > 0.0)) throw DomainError("subordinator path horizon must be positive");
    SubordinatorPath path{spec, horizon, {}};
    const double drift_step = spec.drift * spec.inner_step;
    double value = 0.0;
    path.values.push_back(value);
    while (value <= horizon) {
        if (path.values.size() >= max_entries) {
            throw ResourceError("subordinator path exceeds the configured entry cap");
        }
        value += next_increment() + drift_step;
        path.values.push_back(value);
    }
    return path;
}

SubordinatorPath sample_path(const SubordinatorSpec& spec, double horizon, RandomStream& stream,
                             std::size_t max_entries = kDefaultMaxPathEntries);

/// D(u) sampled as the sum of u/inner_step increments (u/inner_step integral).
double sample_value_at(const SubordinatorSpec& spec, double u, RandomStream& stream);

/// E~(t) = (min{n >= 1 : D(n delta) > t} - 1) * delta, by binary search.
double inverse_at(const SubordinatorPath& path, double t);

/// E~ evaluated at t_n = n * dt for n = 0..steps.
std::vector<double> inverse_on_grid(const SubordinatorPath& path, double dt, std::size_t steps);

struct MomentEstimate {
    int order = 1;
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of E[|E(t_b) - E(t_a)|^order] via E~ on the spec's grid.
/// Path j uses the SUBORDINATOR stream of realization j under master_seed.
MomentEstimate empirical_moment(const SubordinatorSpec& spec, double t_a, double t_b, int order,
                                std::size_t n_paths, std::uint64_t master_seed, unsigned threads = 0);

/// Same estimate for several orders, sharing the sampled paths.
std::vector<MomentEstimate> empirical_moments(const SubordinatorSpec& spec, double t_a, double t_b,
                                              std::span<const int> orders, std::size_t n_paths,
                                              std::uint64_t master_seed, unsigned threads = 0);

struct MomentBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided bound on E[|E(b) - E(a)|^n] for the inverse alpha-stable
/// subordinator, 0 < a < b:
///   ((b-a)/b)^(1-alpha) n! (b-a)^(n alpha) / (Gamma((n-1)alpha+2) Gamma(alpha))
///   <= E[...] <=
///   ((b-a)/b)^(1-alpha) n! (b-a)^(n alpha) / Gamma(n alpha + 1)
MomentBounds lemma3_bounds(double alpha, double t_a, double t_b, int order);

/// E[E(t)^n] = n! t^(n alpha) / Gamma(n alpha + 1) for the pure stable case.
double inverse_moment_closed_form(double alpha, double t, int order);

}  // namespace tcsde
