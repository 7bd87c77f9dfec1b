#include <gtest/gtest.h>

#include <cmath>

#include "mprcalc/explore.hpp"

using namespace mprcalc;

namespace {

SimConfig reference_base(double sigma2 = 1e-11) {
    SimConfig cfg;
    cfg.channel = reference_channel(sigma2);
    cfg.arrivals = {0.0, 0.1};
    cfg.horizon = 200'000;
    cfg.seed = 314;
    return cfg;
}

const std::vector<double> kQ2Grid = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7};

}  // namespace

TEST(Sweep, LooserDelayTargetGivesSmallerBound) {
    const auto rows = sweep_tradeoff(reference_base(), {0.2}, {2, 5}, {0.01});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_LE(rows[1].pv_bound, rows[0].pv_bound);
    EXPECT_EQ(rows[0].aoi_analytic, rows[1].aoi_analytic);
    EXPECT_FALSE(rows[0].pv_empirical.has_value());
}

TEST(Sweep, SamplingRateTradesDelayForFreshness) {
    const auto rows = sweep_tradeoff(reference_base(), kQ2Grid, {2}, {0.01});
    ASSERT_EQ(rows.size(), kQ2Grid.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GE(rows[i].pv_bound, rows[i - 1].pv_bound);
        EXPECT_LT(rows[i].aoi_analytic, rows[i - 1].aoi_analytic);
    }
    EXPECT_EQ(rows.back().pv_bound, 1.0);
    EXPECT_FALSE(rows.back().stable);
}

TEST(Sweep, TransmitPowerTradesFreshnessForDelay) {
    for (double q2 : {0.2, 0.6}) {
        for (std::int64_t w : {2, 3}) {
            const auto rows = sweep_tradeoff(reference_base(), {q2}, {w}, {0.01, 0.05, 0.1});
            ASSERT_EQ(rows.size(), 3u);
            for (std::size_t i = 1; i < rows.size(); ++i) {
                EXPECT_LT(rows[i].pv_bound, rows[i - 1].pv_bound) << q2 << " " << w;
                EXPECT_GT(rows[i].aoi_analytic, rows[i - 1].aoi_analytic);
            }
        }
    }
}

TEST(Sweep, RowOrderAndEmpiricalColumns) {
    SweepOptions opts;
    opts.with_sim = true;
    opts.reps = 2;
    const auto rows = sweep_tradeoff(reference_base(), {0.2, 0.4}, {1, 3}, {0.01, 0.05}, opts);
    ASSERT_EQ(rows.size(), 8u);
    std::size_t i = 0;
    for (double p1 : {0.01, 0.05})
        for (double q2 : {0.2, 0.4})
            for (std::int64_t w : {1, 3}) {
                EXPECT_EQ(rows[i].p1, p1);
                EXPECT_EQ(rows[i].q2, q2);
                EXPECT_EQ(rows[i].w, w);
                ASSERT_TRUE(rows[i].pv_empirical.has_value());
                ASSERT_TRUE(rows[i].aoi_empirical.has_value());
                EXPECT_LE(*rows[i].pv_empirical, rows[i].pv_bound);
                EXPECT_NEAR(*rows[i].aoi_empirical, rows[i].aoi_analytic, 0.05 * rows[i].aoi_analytic);
                ++i;
            }
    const auto again = sweep_tradeoff(reference_base(), {0.2, 0.4}, {1, 3}, {0.01, 0.05}, opts);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k].pv_bound, again[k].pv_bound);
        EXPECT_EQ(*rows[k].pv_empirical, *again[k].pv_empirical);
        EXPECT_EQ(*rows[k].aoi_empirical, *again[k].aoi_empirical);
    }
}

TEST(Sweep, FailedRowsAreMarkedNotFatal) {
    const auto rows = sweep_tradeoff(reference_base(), {0.2}, {2}, {0.01, -1.0});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].error.has_value());
    ASSERT_TRUE(rows[1].error.has_value());
    EXPECT_FALSE(rows[1].stable);
}

TEST(Sweep, RejectsEmptyLists) {
    EXPECT_THROW(sweep_tradeoff(reference_base(), {}, {2}, {0.01}), std::invalid_argument);
    EXPECT_THROW(sweep_tradeoff(reference_base(), {0.2}, {}, {0.01}), std::invalid_argument);
}

TEST(Optimizer, UnconstrainedWhenFullRateMeetsTarget) {
    const SimConfig base = reference_base();
    const double at_one = pv_bound_at(base.channel, base.arrivals, 1.0, 30).value;
    ASSERT_LT(at_one, 0.999);
    const OptimizerResult r = max_sampling_rate(base, 30, 0.999);
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.q2_max, 1.0);
    EXPECT_NEAR(r.aoi_at_max, 1.0 / success_prob_s2(base.channel), 1e-12);
}

TEST(Optimizer, InfeasibleWhenSilentSensorViolates) {
    const SimConfig base = reference_base();
    const double at_zero = pv_bound_at(base.channel, base.arrivals, 0.0, 1).value;
    const OptimizerResult r = max_sampling_rate(base, 1, at_zero * 0.5);
    EXPECT_FALSE(r.feasible);
}

TEST(Optimizer, MatchesLinearScan) {
    for (double sigma2 : {1e-12, 1e-11}) {
        const SimConfig base = reference_base(sigma2);
        const std::int64_t w = 3;
        const double eps = sigma2 < 5e-12 ? 1e-2 : 1e-1;
        const OptimizerResult r = max_sampling_rate(base, w, eps);
        ASSERT_TRUE(r.feasible);
        double scan = 0.0;
        for (int k = 0; k <= 10000; ++k) {
            const double q2 = k / 10000.0;
            if (pv_bound_at(base.channel, base.arrivals, q2, w).value <= eps) scan = q2;
        }
        EXPECT_NEAR(r.q2_max, scan, 1e-4) << sigma2;
        EXPECT_LE(pv_bound_at(base.channel, base.arrivals, r.q2_max, w).value, eps);
        if (r.q2_max < 1.0) EXPECT_GT(pv_bound_at(base.channel, base.arrivals, r.q2_max + 1e-4, w).value, eps);
        EXPECT_NEAR(r.aoi_at_max, 1.0 / (r.q2_max * success_prob_s2(base.channel)), 1e-9 * r.aoi_at_max);
        EXPECT_GT(r.iterations, 0);
    }
}

TEST(Optimizer, RejectsBadTargets) {
    EXPECT_THROW(max_sampling_rate(reference_base(), 3, 0.0), std::invalid_argument);
    EXPECT_THROW(max_sampling_rate(reference_base(), 3, 1.0), std::invalid_argument);
    EXPECT_THROW(max_sampling_rate(reference_base(), -1, 0.1), std::invalid_argument);
}
