#include "tcsde/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tcsde/parallel.hpp"

namespace tcsde {

void SubordinatorSpec::validate(bool require_rate_window) const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    if (require_rate_window && !(alpha > 0.5)) {
        throw ConfigError("alpha must lie in (1/2, 1) for the strong-rate setting, got " + std::to_string(alpha));
    }
    if (!(drift >= 0.0) || !std::isfinite(drift)) throw ConfigError("drift must be finite and >= 0");
    if (!(inner_step > 0.0) || !std::isfinite(inner_step)) throw ConfigError("inner step must be positive");
}

StableSampler::StableSampler(double alpha, double delta)
    : alpha_(alpha), inv_alpha_(1.0 / alpha), ratio_((1.0 - alpha) / alpha), scale_(std::pow(delta, 1.0 / alpha)) {}

double StableSampler::operator()(double v, double w) const {
    const double shifted = alpha_ * (v + std::numbers::pi / 2.0);
    // sin(a) / cos(v)^(1/alpha) * (cos(v - a) / w)^((1-alpha)/alpha), one exp
    const double z =
        std::sin(shifted) * std::exp(ratio_ * std::log(std::cos(v - shifted) / w) - inv_alpha_ * std::log(std::cos(v)));
    const double increment = scale_ * z;
    if (!std::isfinite(increment) || increment < 0.0) {
        throw NumericalError("stable increment is not a finite non-negative number");
    }
    return increment;
}

double StableSampler::operator()(RandomStream& stream) const {
    const double v = std::numbers::pi * (stream.uniform_open() - 0.5);
    const double w = stream.exponential();
    return (*this)(v, w);
}

double stable_increment_from(double alpha, double delta, double v, double w) {
    return StableSampler(alpha, delta)(v, w);
}

double sample_stable_increment(double alpha, double delta, RandomStream& stream) {
    return StableSampler(alpha, delta)(stream);
}

SubordinatorPath sample_path(const SubordinatorSpec& spec, double horizon, RandomStream& stream,
                             std::size_t max_entries) {
    const StableSampler draw(spec.alpha, spec.inner_step);
    return build_path(spec, horizon, [&] { return draw(stream); }, max_entries);
}

double sample_value_at(const SubordinatorSpec& spec, double u, RandomStream& stream) {
    spec.validate();
    const double ratio = u / spec.inner_step;
    const auto steps = static_cast<std::uint64_t>(std::llround(ratio));
    if (u < 0.0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("u must be a non-negative multiple of the inner step");
    }
    const StableSampler draw(spec.alpha, spec.inner_step);
    double value = 0.0;
    for (std::uint64_t i = 0; i < steps; ++i) {
        value += draw(stream);
    }
    return value + spec.drift * u;
}

double inverse_at(const SubordinatorPath& path, double t) {
    if (!(t >= 0.0 && t <= path.horizon)) {
        throw DomainError("inverse_at: t outside [0, horizon]");
    }
    // values[0] = 0 <= t, so the first strictly greater entry has index >= 1.
    const auto first = std::upper_bound(path.values.begin(), path.values.end(), t);
    const auto n = static_cast<double>(first - path.values.begin());
    return (n - 1.0) * path.delta();
}

std::vector<double> inverse_on_grid(const SubordinatorPath& path, double dt, std::size_t steps) {
    std::vector<double> out(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        const double t = std::min(static_cast<double>(n) * dt, path.horizon);
        out[n] = inverse_at(path, t);
    }
    return out;
}

std::vector<MomentEstimate> empirical_moments(const SubordinatorSpec& spec, double t_a, double t_b,
                                              std::span<const int> orders, std::size_t n_paths,
                                              std::uint64_t master_seed, unsigned threads) {
    spec.validate();
    if (!(t_a >= 0.0 && t_a < t_b)) throw DomainError("moment interval requires 0 <= t_a < t_b");
    if (n_paths < 2) throw ConfigError("moment estimate needs at least two paths");
    for (int order : orders) {
        if (order < 1) throw DomainError("moment order must be >= 1");
    }

    std::vector<double> increments(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t j) {
        RandomStream stream({master_seed, j, SubstreamTag::Subordinator});
        const SubordinatorPath path = sample_path(spec, t_b, stream);
        increments[j] = inverse_at(path, t_b) - inverse_at(path, t_a);
    });

    std::vector<MomentEstimate> out;
    out.reserve(orders.size());
    const auto count = static_cast<double>(n_paths);
    for (int order : orders) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (double inc : increments) {
            const double p = std::pow(inc, order);
            sum += p;
            sum_sq += p * p;
        }
        const double mean = sum / count;
        const double variance = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
        out.push_back({order, mean, std::sqrt(variance / count)});
    }
    return out;
}

MomentEstimate empirical_moment(const SubordinatorSpec& spec, double t_a, double t_b, int order,
                                std::size_t n_paths, std::uint64_t master_seed, unsigned threads) {
    const int orders[] = {order};
    return empirical_moments(spec, t_a, t_b, orders, n_paths, master_seed, threads).front();
}

MomentBounds lemma3_bounds(double alpha, double t_a, double t_b, int order) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(t_a > 0.0 && t_a < t_b)) throw DomainError("moment bounds require 0 < t_a < t_b");
    if (order < 1) throw DomainError("moment order must be >= 1");
    const double n = order;
    const double width = t_b - t_a;
    const double common = std::pow(width / t_b, 1.0 - alpha) * std::tgamma(n + 1.0) * std::pow(width, n * alpha);
    return {common / (std::tgamma((n - 1.0) * alpha + 2.0) * std::tgamma(alpha)),
            common / std::tgamma(n * alpha + 1.0)};
}

double inverse_moment_closed_form(double alpha, double t, int order) {
    const double n = order;
    return std::tgamma(n + 1.0) * std::pow(t, n * alpha) / std::tgamma(n * alpha + 1.0);
}

}  // namespace tcsde
