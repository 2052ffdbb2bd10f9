#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "stats_support.hpp"
#include "tcsde/subordinator.hpp"

namespace tcsde {
namespace {

TEST(SubordinatorSpec, Validation) {
    EXPECT_NO_THROW((SubordinatorSpec{0.3, 0.0, 0.1}.validate()));
    EXPECT_THROW((SubordinatorSpec{0.3, 0.0, 0.1}.validate(true)), ConfigError);
    EXPECT_THROW((SubordinatorSpec{0.5, 0.0, 0.1}.validate(true)), ConfigError);
    EXPECT_NO_THROW((SubordinatorSpec{0.51, 0.0, 0.1}.validate(true)));
    EXPECT_THROW((SubordinatorSpec{1.0, 0.0, 0.1}.validate()), ConfigError);
    EXPECT_THROW((SubordinatorSpec{0.0, 0.0, 0.1}.validate()), ConfigError);
    EXPECT_THROW((SubordinatorSpec{0.7, -1.0, 0.1}.validate()), ConfigError);
    EXPECT_THROW((SubordinatorSpec{0.7, 0.0, 0.0}.validate()), ConfigError);
}

// Hand evaluation: alpha = 1/2, V = 0 gives sin(pi/4) * cos(-pi/4) / W.
TEST(StableIncrement, ForcedDraws) {
    EXPECT_NEAR(stable_increment_from(0.5, 1.0, 0.0, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(stable_increment_from(0.5, 1.0, 0.0, 4.0), 0.125, 1e-15);
}

TEST(StableIncrement, SelfSimilarScaling) {
    // delta^(1/alpha) factor: alpha = 1/2, delta = 1/4 scales by 1/16.
    EXPECT_NEAR(stable_increment_from(0.5, 0.25, 0.0, 1.0), 0.5 / 16.0, 1e-15);
}

TEST(StableIncrement, PositiveAndFinite) {
    RandomStream s({1, 0, SubstreamTag::Subordinator});
    for (double alpha : {0.1, 0.5, 0.6, 0.9, 0.99}) {
        for (int i = 0; i < 20000; ++i) {
            const double z = sample_stable_increment(alpha, 0x1.0p-10, s);
            ASSERT_TRUE(std::isfinite(z));
            ASSERT_GE(z, 0.0);
        }
    }
}

TEST(StableIncrement, LaplaceTransformMatchesExponent) {
    // E[exp(-s D(1))] = exp(-s^alpha) with D(1) built from 2^10 increments.
    const SubordinatorSpec spec{0.7, 0.0, 0x1.0p-10};
    std::vector<double> samples(100000);
    for (std::size_t j = 0; j < samples.size(); ++j) {
        RandomStream s({11, j, SubstreamTag::Subordinator});
        samples[j] = std::exp(-sample_value_at(spec, 1.0, s));
    }
    const auto est = testing::mean_and_error(samples);
    EXPECT_NEAR(est.mean, std::exp(-1.0), 0.01);
    EXPECT_LE(std::abs(est.mean - std::exp(-1.0)), 4.0 * est.std_error);
}

TEST(StableIncrement, DriftedLaplaceTransform) {
    const SubordinatorSpec spec{0.6, 1.0, 0x1.0p-8};
    for (double s_val : {0.5, 1.0, 2.0}) {
        std::vector<double> samples(20000);
        for (std::size_t j = 0; j < samples.size(); ++j) {
            RandomStream s({12, j, SubstreamTag::Subordinator});
            samples[j] = std::exp(-s_val * sample_value_at(spec, 1.0, s));
        }
        const auto est = testing::mean_and_error(samples);
        const double exact = std::exp(-(std::pow(s_val, 0.6) + s_val));
        EXPECT_LE(std::abs(est.mean - exact), 4.0 * est.std_error) << "s=" << s_val;
    }
}

TEST(SubordinatorPath, StrictlyIncreasingFromZero) {
    RandomStream s({2, 0, SubstreamTag::Subordinator});
    for (double alpha : {0.55, 0.8}) {
        const SubordinatorPath path = sample_path({alpha, 0.0, 0x1.0p-10}, 1.0, s);
        ASSERT_GE(path.values.size(), 2u);
        EXPECT_EQ(path.values.front(), 0.0);
        EXPECT_GT(path.values.back(), 1.0);
        EXPECT_LE(path.values[path.values.size() - 2], 1.0);
        for (std::size_t i = 1; i < path.values.size(); ++i) ASSERT_GT(path.values[i], path.values[i - 1]);
    }
}

TEST(SubordinatorPath, PureDriftHook) {
    const double delta = 0.125;
    const SubordinatorPath path = build_path({0.7, 1.0, delta}, 2.0, [] { return 0.0; });
    ASSERT_EQ(path.values.size(), 18u);  // 17 * 0.125 > 2 is the first exceedance
    for (std::size_t i = 0; i < path.values.size(); ++i) EXPECT_EQ(path.values[i], static_cast<double>(i) * delta);
}

TEST(SubordinatorPath, EntryCapRaisesResourceError) {
    RandomStream s({3, 0, SubstreamTag::Subordinator});
    EXPECT_THROW(sample_path({0.9, 0.0, 1e-6}, 1.0, s, 100), ResourceError);
}

TEST(SubordinatorPath, RejectsNonPositiveHorizon) {
    RandomStream s({3, 0, SubstreamTag::Subordinator});
    EXPECT_THROW(sample_path({0.9, 0.0, 0.1}, 0.0, s), DomainError);
}

TEST(SubordinatorPath, FirstPassageCountMatchesInverseMean) {
    // The path stops at the first index with D > 1, so (len - 2) * delta = E~(1)
    // and its mean is 1 / Gamma(1 + alpha) up to the delta bias.
    const double alpha = 0.8;
    const double delta = 0x1.0p-10;
    std::vector<double> counts(4000);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        RandomStream s({13, j, SubstreamTag::Subordinator});
        counts[j] = static_cast<double>(sample_path({alpha, 0.0, delta}, 1.0, s).values.size() - 2) * delta;
    }
    const auto est = testing::mean_and_error(counts);
    EXPECT_LE(std::abs(est.mean - 1.0 / std::tgamma(1.0 + alpha)), 4.0 * est.std_error + delta);
}

TEST(InverseAt, DefinitionOnFixedPath) {
    SubordinatorPath path{{0.7, 0.0, 0.5}, 2.5, {0.0, 0.3, 1.2, 1.25, 2.6}};
    EXPECT_EQ(inverse_at(path, 1.0), 0.5);
    EXPECT_EQ(inverse_at(path, 0.0), 0.0);
    EXPECT_EQ(inverse_at(path, 0.29), 0.0);
    EXPECT_EQ(inverse_at(path, 1.2), 1.0);
    EXPECT_EQ(inverse_at(path, 2.5), 1.5);
    EXPECT_THROW(inverse_at(path, -0.1), DomainError);
    EXPECT_THROW(inverse_at(path, 2.6), DomainError);
}

TEST(InverseAt, MonotoneAndRightContinuous) {
    RandomStream s({4, 0, SubstreamTag::Subordinator});
    const SubordinatorPath path = sample_path({0.6, 0.0, 0x1.0p-8}, 1.0, s);
    double prev = 0.0;
    for (int k = 0; k <= 4096; ++k) {
        const double e = inverse_at(path, k / 4096.0);
        ASSERT_GE(e, prev);
        ASSERT_EQ(std::fmod(e, path.delta()), 0.0);
        prev = e;
    }
    for (std::size_t k = 1; k + 1 < path.values.size(); ++k) {
        const double jump = path.values[k];
        if (jump > 1.0) break;
        const double right = std::nextafter(jump, std::numeric_limits<double>::infinity());
        EXPECT_EQ(inverse_at(path, jump), inverse_at(path, right));
        const double left = std::nextafter(jump, 0.0);
        EXPECT_EQ(inverse_at(path, jump) - inverse_at(path, left), path.delta());
    }
}

TEST(InverseAt, RefinementChangesByAtMostCoarseStep) {
    // Surrogate for E - delta <= E~ <= E: the same D observed on grids delta
    // and delta/2 yields inverse approximations within delta of each other.
    const double fine_step = 0x1.0p-11;
    for (std::uint64_t j = 0; j < 50; ++j) {
        RandomStream s({5, j, SubstreamTag::Subordinator});
        SubordinatorPath fine = sample_path({0.7, 0.0, fine_step}, 1.0, s);
        if ((fine.values.size() - 1) % 2 == 1) {
            fine.values.push_back(fine.values.back() + sample_stable_increment(0.7, fine_step, s));
        }
        SubordinatorPath coarse{{0.7, 0.0, 2.0 * fine_step}, 1.0, {}};
        for (std::size_t i = 0; i < fine.values.size(); i += 2) coarse.values.push_back(fine.values[i]);
        ASSERT_GT(coarse.values.back(), 1.0);
        for (int k = 0; k <= 1000; ++k) {
            const double t = k / 1000.0;
            const double diff = inverse_at(fine, t) - inverse_at(coarse, t);
            ASSERT_GE(diff, -1e-15);
            ASSERT_LE(diff, coarse.delta());
        }
    }
}

TEST(InverseOnGrid, MatchesPointwiseEvaluation) {
    RandomStream s({6, 0, SubstreamTag::Subordinator});
    const SubordinatorPath path = sample_path({0.75, 0.0, 0x1.0p-9}, 1.0, s);
    const auto grid = inverse_on_grid(path, 0.125, 8);
    ASSERT_EQ(grid.size(), 9u);
    for (std::size_t n = 0; n <= 8; ++n) EXPECT_EQ(grid[n], inverse_at(path, 0.125 * static_cast<double>(n)));
}

TEST(SelfSimilarity, TerminalValueLawIndependentOfStep) {
    const double alpha = 0.7;
    std::vector<double> coarse(10000), fine(10000);
    for (std::size_t j = 0; j < coarse.size(); ++j) {
        RandomStream a({21, j, SubstreamTag::Subordinator});
        RandomStream b({22, j, SubstreamTag::Subordinator});
        coarse[j] = sample_value_at({alpha, 0.0, 0x1.0p-8}, 1.0, a);
        fine[j] = sample_value_at({alpha, 0.0, 0x1.0p-12}, 1.0, b);
    }
    EXPECT_GT(testing::ks_two_sample_pvalue(coarse, fine), 0.001);
}

TEST(LemmaBounds, HandEvaluatedExample) {
    const MomentBounds b = lemma3_bounds(0.5, 0.5, 1.0, 1);
    EXPECT_NEAR(b.lower, 0.5 / std::sqrt(std::numbers::pi), 1e-12);
    EXPECT_NEAR(b.lower, 0.2821, 1e-4);
    EXPECT_NEAR(b.upper, 0.5 / std::tgamma(1.5), 1e-12);
    EXPECT_NEAR(b.upper, 0.5642, 1e-4);
}

TEST(LemmaBounds, LowerBelowUpperOverSweep) {
    for (double alpha = 0.05; alpha < 1.0; alpha += 0.05) {
        for (int n = 1; n <= 8; ++n) {
            // Ratio of the two denominators is independent of (a, b).
            EXPECT_GT(std::tgamma((n - 1) * alpha + 2.0) * std::tgamma(alpha), std::tgamma(n * alpha + 1.0));
            for (double a : {0.1, 0.5, 0.9}) {
                const MomentBounds b = lemma3_bounds(alpha, a, 1.0, n);
                EXPECT_LT(b.lower, b.upper) << alpha << ' ' << n << ' ' << a;
            }
        }
    }
}

TEST(LemmaBounds, FirstOrderUpperBoundIsLinearInWidth) {
    for (double alpha : {0.6, 0.8}) {
        for (double width : {0.1, 0.01, 0.001}) {
            const double full = lemma3_bounds(alpha, 1.0 - width, 1.0, 1).upper;
            const double half = lemma3_bounds(alpha, 1.0 - width / 2.0, 1.0, 1).upper;
            EXPECT_NEAR(full / half, 2.0, 1e-12);
        }
    }
}

TEST(LemmaBounds, DomainErrors) {
    EXPECT_THROW(lemma3_bounds(0.5, 0.0, 1.0, 1), DomainError);
    EXPECT_THROW(lemma3_bounds(0.5, 1.0, 1.0, 1), DomainError);
    EXPECT_THROW(lemma3_bounds(0.5, 0.5, 1.0, 0), DomainError);
    EXPECT_THROW(lemma3_bounds(1.5, 0.5, 1.0, 1), DomainError);
}

TEST(EmpiricalMoment, ClosedFormMeanAtOrigin) {
    const SubordinatorSpec spec{0.5, 0.0, 0x1.0p-10};
    const MomentEstimate m = empirical_moment(spec, 0.0, 1.0, 1, 100000, 31, 0);
    EXPECT_NEAR(inverse_moment_closed_form(0.5, 1.0, 1), 1.1284, 1e-4);
    EXPECT_LE(std::abs(m.mean - 1.0 / std::tgamma(1.5)), 3.0 * m.std_error + spec.inner_step);
}

TEST(EmpiricalMoment, WithinLemmaBounds) {
    for (double alpha : {0.6, 0.7, 0.8}) {
        const SubordinatorSpec spec{alpha, 0.0, 0x1.0p-10};
        const int orders[] = {1, 2, 4};
        const auto estimates = empirical_moments(spec, 0.5, 1.0, orders, 20000, 32, 0);
        for (const auto& est : estimates) {
            const MomentBounds b = lemma3_bounds(alpha, 0.5, 1.0, est.order);
            EXPECT_GE(est.mean, b.lower - 3.0 * est.std_error) << alpha << ' ' << est.order;
            EXPECT_LE(est.mean, b.upper + 3.0 * est.std_error) << alpha << ' ' << est.order;
        }
    }
}

TEST(EmpiricalMoment, VanishingInterval) {
    const SubordinatorSpec spec{0.7, 0.0, 0x1.0p-10};
    const MomentEstimate wide = empirical_moment(spec, 0.5, 1.0, 1, 2000, 33, 0);
    const MomentEstimate narrow = empirical_moment(spec, 1.0 - spec.inner_step, 1.0, 1, 2000, 33, 0);
    EXPECT_LT(narrow.mean, 0.05 * wide.mean);
    EXPECT_LT(narrow.mean, 0.01);
}

TEST(EmpiricalMoment, Deterministic) {
    const SubordinatorSpec spec{0.7, 0.0, 0x1.0p-8};
    const MomentEstimate a = empirical_moment(spec, 0.2, 1.0, 2, 500, 34, 1);
    const MomentEstimate b = empirical_moment(spec, 0.2, 1.0, 2, 500, 34, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}

}  // namespace
}  // namespace tcsde
