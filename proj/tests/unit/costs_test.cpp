#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "scopf/costs.hpp"

using namespace scopf;

namespace {
const PenaltyTiers kTwoTier{{{0.1, 100.0}, {kInfinity, 1000.0}}};
}

TEST(Penalty, TierArithmetic) {
    EXPECT_DOUBLE_EQ(penalty_value(kTwoTier, 0.05), 5.0);
    EXPECT_DOUBLE_EQ(penalty_value(kTwoTier, 0.25), 160.0);
    EXPECT_DOUBLE_EQ(penalty_value(kTwoTier, -0.25), 160.0);
    EXPECT_EQ(penalty_value(kTwoTier, 0.0), 0.0);
}

TEST(Penalty, SmoothedIsFlatAtZero) {
    const auto s = smoothed_penalty(kTwoTier, 0.0, 1e-3);
    EXPECT_EQ(s.slope, 0.0);
    EXPECT_GE(s.value, 0.0);
}

TEST(Penalty, SmoothedMatchesExactAwayFromKinks) {
    const double mu = 1e-3;
    for (double s : {0.002, 0.05, 0.0989, 0.1011, 0.3, -0.05, -0.3})
        EXPECT_NEAR(smoothed_penalty(kTwoTier, s, mu).value, penalty_value(kTwoTier, s), 1e-12) << s;
}

TEST(Penalty, SmoothingErrorBound) {
    const double mu = 1e-2;
    for (double s = -0.3; s <= 0.3; s += 1e-4) {
        const double err = std::abs(smoothed_penalty(kTwoTier, s, mu).value - penalty_value(kTwoTier, s));
        EXPECT_LE(err, 900.0 * mu / 2 + 1e-12) << s;
    }
}

TEST(Penalty, SmoothedSlopeIsContinuous) {
    const double mu = 1e-3;
    for (double kink : {0.0, 0.1, -0.1}) {
        for (double side : {-mu, mu}) {
            const double x = kink + side;
            const double a = smoothed_penalty(kTwoTier, x - 1e-12, mu).slope;
            const double b = smoothed_penalty(kTwoTier, x + 1e-12, mu).slope;
            EXPECT_NEAR(a, b, 1e-6) << x;
        }
    }
}

TEST(Penalty, SmoothedSlopeMatchesFiniteDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const double mu = 1e-3, h = 1e-7;
    for (int t = 0; t < 500; ++t) {
        const double x = u(rng);
        const double fd = (smoothed_penalty(kTwoTier, x + h, mu).value - smoothed_penalty(kTwoTier, x - h, mu).value) / (2 * h);
        EXPECT_NEAR(smoothed_penalty(kTwoTier, x, mu).slope, fd, 1e-5 * (1 + std::abs(fd))) << x;
    }
}

TEST(Penalty, OverloadIsOneSided) {
    const auto& t = PenaltySpec::defaults().overload;
    EXPECT_EQ(overload_penalty(t, -0.5, 0.0).value, 0.0);
    EXPECT_DOUBLE_EQ(overload_penalty(t, 0.03, 0.0).value, 30.0);
    EXPECT_DOUBLE_EQ(overload_penalty(t, 0.15, 0.0).value, 0.05 * 1e3 + 0.1 * 5e5);
}

TEST(Penalty, DefaultsAreValid) {
    const auto d = PenaltySpec::defaults();
    EXPECT_TRUE(d.imbalance.is_valid());
    EXPECT_TRUE(d.overload.is_valid());
    EXPECT_FALSE((PenaltyTiers{{{0.1, 100.0}, {kInfinity, 50.0}}}).is_valid());
}

TEST(Cost, PiecewiseLinear) {
    const CostFunction c({{0.0, 10.0}, {1.0, 20.0}, {2.0, 50.0}});
    EXPECT_TRUE(c.is_convex());
    EXPECT_DOUBLE_EQ(c(0.0), 0.0);
    EXPECT_DOUBLE_EQ(c(0.5), 5.0);
    EXPECT_DOUBLE_EQ(c(1.5), 20.0);
    EXPECT_DOUBLE_EQ(c(3.0), 80.0);
    EXPECT_DOUBLE_EQ(c(-1.0), -10.0);
    EXPECT_FALSE(CostFunction({{0.0, 20.0}, {1.0, 10.0}}).is_convex());
}

TEST(Cost, SmoothedCostSlope) {
    const CostFunction c({{0.0, 10.0}, {1.0, 20.0}});
    const double mu = 1e-3, h = 1e-7;
    for (double p : {0.2, 0.9985, 0.9995, 1.0, 1.0007, 1.5}) {
        const double fd = (c.evaluate(p + h, mu).value - c.evaluate(p - h, mu).value) / (2 * h);
        EXPECT_NEAR(c.evaluate(p, mu).slope, fd, 1e-6) << p;
    }
    EXPECT_LE(std::abs(c.evaluate(1.0, mu).value - c(1.0)), 10.0 * mu / 2);
}

TEST(SmoothClamp, MatchesClampOutsideWidth) {
    EXPECT_DOUBLE_EQ(soft_clamp(0.5, 0.0, 1.0, 1e-2).value, 0.5);
    EXPECT_DOUBLE_EQ(soft_clamp(2.0, 0.0, 1.0, 1e-2).value, 1.0);
    EXPECT_DOUBLE_EQ(soft_clamp(-2.0, 0.0, 1.0, 1e-2).value, 0.0);
    EXPECT_EQ(soft_clamp(2.0, 0.0, 1.0, 1e-2).slope, 0.0);
    const auto at = soft_clamp(1.0, 0.0, 1.0, 1e-2);
    EXPECT_NEAR(at.slope, 0.5, 1e-12);
}
