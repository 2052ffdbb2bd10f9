#include "tcsde/timechange.hpp"

#include <cmath>
#include <utility>

namespace tcsde {

namespace {

void fill_increments(TimeChangeDrivers& d) {
    const std::size_t m = d.dims;
    d.delta_e.resize(d.steps);
    d.delta_b.resize(d.steps * m);
    for (std::size_t n = 0; n < d.steps; ++n) {
        d.delta_e[n] = d.e_values[n + 1] - d.e_values[n];
        for (std::size_t i = 0; i < m; ++i) {
            d.delta_b[n * m + i] = d.b_values[(n + 1) * m + i] - d.b_values[n * m + i];
        }
    }
}

}  // namespace

std::size_t grid_steps(double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) throw ConfigError("horizon and step must be positive");
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
        throw ConfigError("horizon is not an integral multiple of the step");
    }
    return static_cast<std::size_t>(rounded);
}

TimeChangeDrivers drivers_from_inverse(std::vector<double> e_values, double dt, std::size_t dims,
                                       RandomStream& brownian) {
    if (dims < 1) throw ConfigError("Brownian dimension must be >= 1");
    if (e_values.size() < 2) throw ConfigError("driver grid needs at least one step");
    TimeChangeDrivers d;
    d.dt = dt;
    d.steps = e_values.size() - 1;
    d.dims = dims;
    d.e_values = std::move(e_values);
    d.b_values.assign((d.steps + 1) * dims, 0.0);
    for (std::size_t n = 0; n < d.steps; ++n) {
        const double de = d.e_values[n + 1] - d.e_values[n];
        const double scale = de > 0.0 ? std::sqrt(de) : 0.0;
        for (std::size_t i = 0; i < dims; ++i) {
            const double xi = brownian.normal();
            const double prev = d.b_values[n * dims + i];
            d.b_values[(n + 1) * dims + i] = scale > 0.0 ? prev + scale * xi : prev;
        }
    }
    fill_increments(d);
    return d;
}

TimeChangeDrivers build_fine_drivers(const SubordinatorSpec& spec, double horizon, double dt_fine, std::size_t dims,
                                     std::uint64_t master_seed, std::uint64_t realization) {
    const std::size_t steps = grid_steps(horizon, dt_fine);
    RandomStream sub({master_seed, realization, SubstreamTag::Subordinator});
    const SubordinatorPath path = sample_path(spec, horizon, sub);
    RandomStream brownian({master_seed, realization, SubstreamTag::Brownian});
    return drivers_from_inverse(inverse_on_grid(path, dt_fine, steps), dt_fine, dims, brownian);
}

TimeChangeDrivers build_identity_clock_drivers(double horizon, double dt, std::size_t dims,
                                               std::uint64_t master_seed, std::uint64_t realization) {
    const std::size_t steps = grid_steps(horizon, dt);
    SubordinatorSpec spec{0.5, 1.0, dt};
    const SubordinatorPath path = build_path(spec, horizon, [] { return 0.0; });
    RandomStream brownian({master_seed, realization, SubstreamTag::Brownian});
    return drivers_from_inverse(inverse_on_grid(path, dt, steps), dt, dims, brownian);
}

TimeChangeDrivers coarsen(const TimeChangeDrivers& fine, std::size_t factor) {
    if (factor < 1 || fine.steps % factor != 0) {
        throw ConfigError("coarsening factor must divide the number of fine steps");
    }
    TimeChangeDrivers c;
    c.dt = fine.dt * static_cast<double>(factor);
    c.steps = fine.steps / factor;
    c.dims = fine.dims;
    const std::size_t m = fine.dims;
    c.e_values.resize(c.steps + 1);
    c.b_values.resize((c.steps + 1) * m);
    for (std::size_t k = 0; k <= c.steps; ++k) {
        c.e_values[k] = fine.e_values[k * factor];
        for (std::size_t i = 0; i < m; ++i) c.b_values[k * m + i] = fine.b_values[k * factor * m + i];
    }
    fill_increments(c);
    return c;
}

}  // namespace tcsde
