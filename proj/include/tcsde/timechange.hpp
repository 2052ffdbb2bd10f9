#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tcsde/subordinator.hpp"

namespace tcsde {

/**
 * Driver increments (dE_n, dB_n) of one realization on the grid t_n = n dt.
 *
 * Cumulative values E~(t_n) and B(E~(t_n)) are the source of truth; the
 * increments are their differences. Coarsening subsamples the cumulative
 * arrays, so coarse increments are the exact block sums of the fine ones and
 * coarsen(coarsen(x, a), b) equals coarsen(x, a * b) bit for bit.
 */
struct TimeChangeDrivers {
    double dt = 0.0;
    std::size_t steps = 0;   // N
    std::size_t dims = 1;    // m
    std::vector<double> e_values;  // N + 1
    std::vector<double> b_values;  // (N + 1) * m, row n holds B(E~(t_n))
    std::vector<double> delta_e;   // N
    std::vector<double> delta_b;   // N * m, row n holds dB_n

    double horizon() const { return dt * static_cast<double>(steps); }
    double time(std::size_t n) const { return dt * static_cast<double>(n); }
    double terminal_e() const { return e_values.back(); }
    std::span<const double> increment_b(std::size_t n) const { return {delta_b.data() + n * dims, dims}; }
    std::span<const double> terminal_b() const { return {b_values.data() + steps * dims, dims}; }

    friend bool operator==(const TimeChangeDrivers&, const TimeChangeDrivers&) = default;
};

/// Exact number of steps T / dt; throws ConfigError when not integral.
std::size_t grid_steps(double horizon, double dt);

/**
 * Builds drivers from a given E~ grid (e_values, length N + 1) by drawing
 * dB_n = sqrt(dE_n) * xi_n with xi_n ~ N(0, I_m) from `brownian`.
 * m normals are consumed at every step, including frozen ones.
 */
TimeChangeDrivers drivers_from_inverse(std::vector<double> e_values, double dt, std::size_t dims,
                                       RandomStream& brownian);

/// Samples a subordinator path on the spec's inner grid (spec.inner_step)
/// and builds the drivers at resolution dt_fine for realization `realization`.
TimeChangeDrivers build_fine_drivers(const SubordinatorSpec& spec, double horizon, double dt_fine, std::size_t dims,
                                     std::uint64_t master_seed, std::uint64_t realization);

/// Drivers for E(t) = t (pure unit drift with the stable part switched off).
TimeChangeDrivers build_identity_clock_drivers(double horizon, double dt, std::size_t dims,
                                               std::uint64_t master_seed, std::uint64_t realization);

/// Same (E, B o E) path at step factor * dt.
TimeChangeDrivers coarsen(const TimeChangeDrivers& fine, std::size_t factor);

}  // namespace tcsde
