#include "tcsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcsde/errors.hpp"

namespace tcsde {

namespace {

void check_dims(const SdeSystem& system, const TimeChangeDrivers& drivers) {
    if (system.m != drivers.dims) {
        throw ConfigError("system noise dimension " + std::to_string(system.m) +
                          " does not match driver dimension " + std::to_string(drivers.dims));
    }
    if (system.initial_state.size() != system.d) throw ConfigError("initial state has wrong dimension");
}

bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// x += f(x) * de + g(x) * db, using caller-owned scratch.
void em_step(const SdeSystem& system, std::vector<double>& x, double de, std::span<const double> db,
             std::vector<double>& f, std::vector<double>& g) {
    const std::size_t d = system.d;
    const std::size_t m = system.m;
    system.drift(x, f);
    system.diffusion(x, g);
    for (std::size_t i = 0; i < d; ++i) {
        double noise = 0.0;
        for (std::size_t j = 0; j < m; ++j) noise += g[i * m + j] * db[j];
        x[i] += f[i] * de + noise;
    }
}

template <typename OnStep>
std::vector<double> run_em(const SdeSystem& system, const TimeChangeDrivers& drivers, OnStep&& on_step) {
    check_dims(system, drivers);
    std::vector<double> x = system.initial_state;
    std::vector<double> f(system.d);
    std::vector<double> g(system.d * system.m);
    for (std::size_t n = 0; n < drivers.steps; ++n) {
        const double de = drivers.delta_e[n];
        if (de != 0.0) {
            em_step(system, x, de, drivers.increment_b(n), f, g);
            if (!all_finite(x)) {
                throw NumericalError("non-finite EM state at step " + std::to_string(n + 1), n + 1);
            }
        }
        on_step(n + 1, x);
    }
    return x;
}

}  // namespace

EmTrajectory em_solve(const SdeSystem& system, const TimeChangeDrivers& drivers, bool keep_path) {
    EmTrajectory out;
    out.dt = drivers.dt;
    out.steps = drivers.steps;
    out.d = system.d;
    if (keep_path) {
        out.states.reserve((drivers.steps + 1) * system.d);
        out.states.insert(out.states.end(), system.initial_state.begin(), system.initial_state.end());
        out.terminal = run_em(system, drivers, [&](std::size_t, const std::vector<double>& x) {
            out.states.insert(out.states.end(), x.begin(), x.end());
        });
    } else {
        out.terminal = run_em(system, drivers, [](std::size_t, const std::vector<double>&) {});
    }
    return out;
}

std::vector<double> em_terminal(const SdeSystem& system, const TimeChangeDrivers& drivers) {
    return run_em(system, drivers, [](std::size_t, const std::vector<double>&) {});
}

std::vector<double> duality_solve(const SdeSystem& system, const TimeChangeDrivers& drivers, std::size_t inner_refine,
                                  std::uint64_t master_seed, std::uint64_t realization) {
    check_dims(system, drivers);
    if (inner_refine < 1) throw ConfigError("inner_refine must be >= 1");
    std::vector<double> y = system.initial_state;
    const double e_terminal = drivers.terminal_e();
    if (!(e_terminal > 0.0)) return y;

    const std::size_t m = drivers.dims;
    const std::size_t inner_steps = inner_refine * drivers.steps;
    const double h = e_terminal / static_cast<double>(inner_steps);
    RandomStream bridge({master_seed, realization, SubstreamTag::Bridge});

    // Anchor: latest point where W is known (a knot or the previous grid point).
    double u_anchor = 0.0;
    std::vector<double> w_anchor(m, 0.0);
    std::vector<double> w_grid(m, 0.0);  // W at the previous operational grid point
    std::vector<double> w_here(m);
    std::vector<double> dw(m);
    std::size_t knot = 0;

    std::vector<double> f(system.d);
    std::vector<double> g(system.d * m);
    for (std::size_t k = 1; k <= inner_steps; ++k) {
        const double u = k == inner_steps ? e_terminal : static_cast<double>(k) * h;
        while (knot <= drivers.steps && drivers.e_values[knot] <= u) {
            if (drivers.e_values[knot] > u_anchor) {
                u_anchor = drivers.e_values[knot];
                for (std::size_t i = 0; i < m; ++i) w_anchor[i] = drivers.b_values[knot * m + i];
            }
            ++knot;
        }
        if (u == u_anchor) {
            w_here = w_anchor;
        } else {
            // Brownian bridge from the anchor to the next knot on the right.
            const double e_right = drivers.e_values[knot];
            const double width = e_right - u_anchor;
            const double weight = (u - u_anchor) / width;
            const double sd = std::sqrt((u - u_anchor) * (e_right - u) / width);
            for (std::size_t i = 0; i < m; ++i) {
                const double b_right = drivers.b_values[knot * m + i];
                w_here[i] = w_anchor[i] + weight * (b_right - w_anchor[i]) + sd * bridge.normal();
            }
            u_anchor = u;
            w_anchor = w_here;
        }
        for (std::size_t i = 0; i < m; ++i) dw[i] = w_here[i] - w_grid[i];
        w_grid = w_here;
        em_step(system, y, h, dw, f, g);
        if (!all_finite(y)) {
            throw NumericalError("non-finite duality state at inner step " + std::to_string(k), k, realization);
        }
    }
    return y;
}

}  // namespace tcsde
