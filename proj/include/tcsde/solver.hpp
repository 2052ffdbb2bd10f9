#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tcsde/sde.hpp"
#include "tcsde/timechange.hpp"

namespace tcsde {

/// Output of em_solve. `states` holds (N + 1) * d values when the full path
/// was requested and is empty otherwise; `terminal` is always X_N.
/// The scheme's continuous-time extension is piecewise constant:
/// X(t) = X_n on [t_n, t_{n+1}).
struct EmTrajectory {
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t d = 1;
    std::vector<double> states;
    std::vector<double> terminal;

    std::span<const double> state(std::size_t n) const { return {states.data() + n * d, d}; }
};

/**
 * Equidistant-step Euler-Maruyama:
 *   X_{n+1} = X_n + f(X_n) dE_n + g(X_n) dB_n.
 *
 * Steps with dE_n = 0 (so dB_n = 0) leave the state untouched and skip the
 * coefficient evaluations. Throws NumericalError carrying the step index when
 * the state stops being finite.
 */
EmTrajectory em_solve(const SdeSystem& system, const TimeChangeDrivers& drivers, bool keep_path = false);

/// Terminal value only; the hot path of the convergence study.
std::vector<double> em_terminal(const SdeSystem& system, const TimeChangeDrivers& drivers);

/**
 * Independent estimate of X(T) through the duality X(T) = Y(E(T)), Y the
 * classical SDE dY = f(Y) du + g(Y) dW(u).
 *
 * Runs classical EM on [0, E(T)] with inner_refine * N uniform steps. W at
 * the operational grid points is filled in by Brownian-bridge sampling
 * between the known values W(E~(t_n)) = B(E~(t_n)), using the BRIDGE
 * substream of (master_seed, realization). Returns X_0 when E(T) = 0.
 */
std::vector<double> duality_solve(const SdeSystem& system, const TimeChangeDrivers& drivers, std::size_t inner_refine,
                                  std::uint64_t master_seed, std::uint64_t realization);

}  // namespace tcsde
