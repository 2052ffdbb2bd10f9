#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stats_support.hpp"
#include "tcsde/errors.hpp"
#include "tcsde/solver.hpp"

namespace tcsde {
namespace {

SdeSystem constant_system(double f, double g) {
    SdeSystem sys;
    sys.name = "constant";
    sys.drift = [f](std::span<const double>, std::span<double> out) { out[0] = f; };
    sys.diffusion = [g](std::span<const double>, std::span<double> out) { out[0] = g; };
    sys.initial_state = {0.75};
    return sys;
}

TimeChangeDrivers sample_drivers(double alpha, double dt, std::size_t m, std::uint64_t j) {
    return build_fine_drivers({alpha, 0.0, dt}, 1.0, dt, m, 100, j);
}

TEST(EmSolve, ZeroCoefficientsKeepInitialState) {
    const EmTrajectory traj = em_solve(constant_system(0.0, 0.0), sample_drivers(0.7, 0x1.0p-8, 1, 0), true);
    ASSERT_EQ(traj.states.size(), traj.steps + 1);
    for (double x : traj.states) EXPECT_EQ(x, 0.75);
}

TEST(EmSolve, UnitDriftTelescopes) {
    for (std::uint64_t j = 0; j < 10; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.6, 0x1.0p-12, 1, j);
        const EmTrajectory traj = em_solve(constant_system(1.0, 0.0), d);
        EXPECT_EQ(traj.terminal[0], 0.75 + d.terminal_e());
        EXPECT_TRUE(traj.states.empty());
    }
}

TEST(EmSolve, DeterministicAcrossRuns) {
    const SdeSystem sys = builtin_paper_example();
    const EmTrajectory a = em_solve(sys, sample_drivers(0.8, 0x1.0p-10, 2, 5), true);
    const EmTrajectory b = em_solve(sys, sample_drivers(0.8, 0x1.0p-10, 2, 5), true);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.terminal, b.terminal);
    EXPECT_EQ(em_terminal(sys, sample_drivers(0.8, 0x1.0p-10, 2, 5)), a.terminal);
}

TEST(EmSolve, FrozenIntervalsCanBeRemoved) {
    const SdeSystem sys = builtin_paper_example();
    for (std::uint64_t j = 0; j < 10; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.55, 0x1.0p-10, 2, j);
        // Rebuild the grid without its frozen steps.
        TimeChangeDrivers compact;
        compact.dt = d.dt;
        compact.dims = d.dims;
        compact.e_values.push_back(0.0);
        compact.b_values = {0.0, 0.0};
        for (std::size_t n = 0; n < d.steps; ++n) {
            if (d.delta_e[n] == 0.0) continue;
            compact.delta_e.push_back(d.delta_e[n]);
            compact.delta_b.push_back(d.delta_b[2 * n]);
            compact.delta_b.push_back(d.delta_b[2 * n + 1]);
            compact.e_values.push_back(d.e_values[n + 1]);
            compact.b_values.push_back(d.b_values[2 * n + 2]);
            compact.b_values.push_back(d.b_values[2 * n + 3]);
        }
        compact.steps = compact.delta_e.size();
        ASSERT_LT(compact.steps, d.steps);
        EXPECT_EQ(em_terminal(sys, compact), em_terminal(sys, d));
    }
}

TEST(EmSolve, IdentityClockIsClassicalEulerMaruyama) {
    const SdeSystem sys = builtin_paper_example();
    const TimeChangeDrivers d = build_identity_clock_drivers(1.0, 0x1.0p-9, 2, 3, 0);
    // Classical EM for dX = f dt + g dW written out directly.
    double x1 = 1.0, x2 = 2.0;
    for (std::size_t n = 0; n < d.steps; ++n) {
        const double s = x1 + x2;
        const double dw1 = d.delta_b[2 * n], dw2 = d.delta_b[2 * n + 1];
        const double n1 = x1 + (-s * d.dt + (2.0 * s * dw1 + 0.0 * dw2));
        const double n2 = x2 + (-2.0 * s * d.dt + (0.0 * dw1 + s * dw2));
        x1 = n1;
        x2 = n2;
    }
    const auto terminal = em_terminal(sys, d);
    EXPECT_EQ(terminal[0], x1);
    EXPECT_EQ(terminal[1], x2);
}

TEST(EmSolve, ReportsNonFiniteStateWithStep) {
    const SdeSystem sys = builtin_geometric(1e300, 0.0);
    const TimeChangeDrivers d = build_identity_clock_drivers(1.0, 0.25, 1, 0, 0);
    try {
        em_terminal(sys, d);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.step(), 2u);
    }
}

TEST(EmSolve, DimensionMismatch) {
    EXPECT_THROW(em_terminal(builtin_paper_example(), sample_drivers(0.7, 0.125, 1, 0)), ConfigError);
}

TEST(EmSolve, DecayErrorBoundedBySquaredIncrements) {
    // X_N = prod(1 - dE_n); |log X_N + E(T)| <= sum dE_n^2 for dE_n <= 1/2.
    const SdeSystem sys = builtin_exponential_decay(1.0);
    for (std::uint64_t j = 0; j < 50; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.8, 0x1.0p-15, 1, j);
        double sum_sq = 0.0;
        for (double de : d.delta_e) sum_sq += de * de;
        const double exact = (*sys.oracle)(d.terminal_e(), d.terminal_b())[0];
        const double em = em_terminal(sys, d)[0];
        EXPECT_LE(std::abs(std::log(em) - std::log(exact)), sum_sq + 1e-14);
        EXPECT_LT(std::abs(em - exact), 1e-3);
    }
}

TEST(DualitySolve, EmptyOperationalInterval) {
    TimeChangeDrivers d;
    d.dt = 0.25;
    d.steps = 4;
    d.dims = 2;
    d.e_values.assign(5, 0.0);
    d.b_values.assign(10, 0.0);
    d.delta_e.assign(4, 0.0);
    d.delta_b.assign(8, 0.0);
    EXPECT_EQ(duality_solve(builtin_paper_example(), d, 4, 0, 0), (std::vector<double>{1.0, 2.0}));
}

TEST(DualitySolve, DeterministicDecayMatchesOracle) {
    const SdeSystem sys = builtin_exponential_decay(1.0);
    for (std::uint64_t j = 0; j < 20; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.7, 0x1.0p-10, 1, j);
        const double exact = (*sys.oracle)(d.terminal_e(), d.terminal_b())[0];
        const double dual = duality_solve(sys, d, 4, 1, j)[0];
        // Classical uniform-step Euler for y' = -y: relative error <= E(T) h.
        const double h = d.terminal_e() / static_cast<double>(4 * d.steps);
        EXPECT_LE(std::abs(dual - exact), exact * d.terminal_e() * h + 1e-15);
    }
}

TEST(DualitySolve, GeometricMatchesOracleInMean) {
    const SdeSystem sys = builtin_geometric(0.5, 0.5);
    std::vector<double> errors;
    for (std::uint64_t j = 0; j < 1000; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.8, 0x1.0p-8, 1, j);
        const double exact = (*sys.oracle)(d.terminal_e(), d.terminal_b())[0];
        errors.push_back(duality_solve(sys, d, 8, 2, j)[0] - exact);
    }
    const auto est = testing::mean_and_error(errors);
    EXPECT_LE(std::abs(est.mean), 4.0 * est.std_error + 0.01);
    double l1 = 0.0;
    for (double e : errors) l1 += std::abs(e);
    EXPECT_LT(l1 / 1000.0, 0.05);
}

TEST(DualitySolve, AgreesWithEquidistantSchemeOnPaperExample) {
    // Two discretisations of the same coupled path converge to one limit.
    const SdeSystem sys = builtin_paper_example();
    double gap = 0.0;
    for (std::uint64_t j = 0; j < 200; ++j) {
        const TimeChangeDrivers d = sample_drivers(0.8, 0x1.0p-12, 2, j);
        const auto em = em_terminal(sys, d);
        const auto dual = duality_solve(sys, d, 2, 3, j);
        gap += std::hypot(em[0] - dual[0], em[1] - dual[1]);
    }
    EXPECT_LT(gap / 200.0, 0.5);
}

}  // namespace
}  // namespace tcsde
