#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mprcalc/aoi.hpp"
#include "mprcalc/sim.hpp"
#include "mprcalc/snc.hpp"

using namespace mprcalc;

namespace {

SimConfig reference_config(double q2, double lambda, std::uint64_t horizon) {
    SimConfig cfg;
    cfg.channel = reference_channel(1e-11);
    cfg.arrivals = {0.0, lambda};
    cfg.q2 = q2;
    cfg.horizon = horizon;
    cfg.seed = 2025;
    return cfg;
}

std::vector<SlotRecord> trace(const SimConfig& cfg) {
    std::vector<SlotRecord> out;
    run_simulation(cfg, [&](const SlotRecord& r) { out.push_back(r); });
    return out;
}

}  // namespace

TEST(Simulation, EmptyFlowHasNoDelayOrBacklog) {
    const SimResult r = run_simulation(reference_config(0.4, 0.0, 100'000));
    for (std::uint64_t w : {0u, 1u, 2u, 10u}) EXPECT_EQ(r.violation_probability(w), 0.0);
    EXPECT_EQ(r.avg_backlog(), 0.0);
    EXPECT_EQ(r.max_delay, 0u);
}

TEST(Simulation, FreshEverySlot) {
    SimConfig cfg = reference_config(1.0, 0.1, 50'000);
    cfg.channel.gamma2 = 0.0;
    EXPECT_EQ(run_simulation(cfg).avg_aoi(), 1.0);
}

TEST(Simulation, PersistentAgeMatchesClosedForm) {
    const SimConfig cfg = reference_config(0.5, 0.1, 10'000'000);
    const double analytic = avg_aoi_closed({0.5, success_prob_s2(cfg.channel)});
    EXPECT_NEAR(run_simulation(cfg).avg_aoi(), analytic, 0.01 * analytic);
}

TEST(Simulation, EmpiricalSensorSuccessMatchesClosedForm) {
    const SimResult r = run_simulation(reference_config(0.5, 0.1, 2'000'000));
    const double p = static_cast<double>(r.s2_successes) / static_cast<double>(r.s2_attempts);
    const double p2 = success_prob_s2(reference_channel(1e-11));
    EXPECT_NEAR(p, p2, 4.0 * std::sqrt(p2 * (1 - p2) / r.s2_attempts));
}

TEST(Simulation, QueueAwareAgeNotWorse) {
    // With no arrivals after the initial burst S1 goes silent and stops interfering.
    SimConfig persistent = reference_config(0.3, 0.0, 1'000'000);
    persistent.arrivals.rho = 5.0;
    SimConfig aware = persistent;
    aware.interference = InterferenceMode::queue_aware;
    const double a = run_simulation(aware).avg_aoi();
    const double p = run_simulation(persistent).avg_aoi();
    EXPECT_LT(a, p);
    // Silent S1: only noise limits S2.
    const ChannelParams& c = aware.channel;
    const double p2_alone = std::exp(-c.gamma2 * c.sigma2 / c.rx_power2());
    EXPECT_NEAR(a, avg_aoi_closed({0.3, p2_alone}), 0.01 * a);

    SimConfig busy = reference_config(0.3, 0.2, 500'000);
    SimConfig busy_aware = busy;
    busy_aware.interference = InterferenceMode::queue_aware;
    EXPECT_LE(run_simulation(busy_aware).avg_aoi(), run_simulation(busy).avg_aoi());
}

TEST(Simulation, AgeFollowsSawtoothRecurrence) {
    const auto records = trace(reference_config(0.4, 0.3, 5000));
    for (std::size_t n = 0; n + 1 < records.size(); ++n) {
        const auto& cur = records[n];
        const auto& next = records[n + 1];
        EXPECT_EQ(next.age, cur.s2_success ? 1u : cur.age + 1) << n;
        if (cur.s2_success) EXPECT_TRUE(cur.s2_generated);
    }
    EXPECT_EQ(records.front().age, 1u);
}

TEST(Simulation, CausalityAndWorkConservation) {
    SimConfig cfg = reference_config(0.5, 0.9, 20'000);
    cfg.arrivals.rho = 3.0;
    const auto records = trace(cfg);
    double arrived = 0, departed = 0, backlog = 0;
    for (const auto& r : records) {
        const double before = backlog + r.arrivals;
        arrived += r.arrivals;
        departed += r.departed;
        backlog = r.backlog;
        EXPECT_GE(r.backlog, 0.0);
        EXPECT_LE(departed, arrived + 1e-9);
        EXPECT_NEAR(arrived - departed, backlog, 1e-8 * std::max(1.0, arrived));
        if (r.service > 0.0 && before > 0.0) {
            EXPECT_NEAR(r.departed, std::min(r.service, before), 1e-12);
        } else {
            EXPECT_EQ(r.departed, 0.0);
        }
    }
}

TEST(Simulation, VirtualDelayMatchesDefinition) {
    // Recompute W(t) = inf{u >= 0 : A(0,t) <= D(0,t+u)} from cumulative traces.
    SimConfig cfg = reference_config(0.6, 1.2, 4000);
    cfg.arrivals.rho = 2.0;
    cfg.warmup = 0;
    const auto records = trace(cfg);
    std::vector<double> A(records.size() + 1, 0.0), D(records.size() + 1, 0.0);
    for (std::size_t n = 0; n < records.size(); ++n) {
        A[n + 1] = A[n] + records[n].arrivals;
        D[n + 1] = D[n] + records[n].departed;
    }
    std::vector<std::uint64_t> counts;
    std::uint64_t censored = 0;
    for (std::size_t t = 0; t < records.size(); ++t) {
        std::size_t u = 0;
        while (t + u <= records.size() && A[t] > D[t + u] + 1e-9) ++u;
        if (t + u > records.size()) {
            ++censored;
            continue;
        }
        if (u >= counts.size()) counts.resize(u + 1, 0);
        ++counts[u];
    }
    const SimResult r = run_simulation(cfg);
    EXPECT_EQ(r.censored_delays, censored);
    counts.resize(std::max(counts.size(), r.delay_counts.size()), 0);
    std::vector<std::uint64_t> got = r.delay_counts;
    got.resize(counts.size(), 0);
    EXPECT_EQ(got, counts);
}

TEST(Simulation, Deterministic) {
    const SimConfig cfg = reference_config(0.45, 0.4, 200'000);
    const SimResult a = run_simulation(cfg);
    const SimResult b = run_simulation(cfg);
    EXPECT_EQ(a.delay_counts, b.delay_counts);
    EXPECT_EQ(a.aoi_sum, b.aoi_sum);
    EXPECT_EQ(a.backlog_sum, b.backlog_sum);
    EXPECT_EQ(a.aoi_batch_means, b.aoi_batch_means);
}

TEST(Simulation, BacklogOverflowSignalsInstability) {
    SimConfig cfg = reference_config(0.7, 5.0, 1'000'000);
    cfg.backlog_ceiling = 1e3;
    EXPECT_THROW(run_simulation(cfg), BacklogOverflowError);
}

TEST(Simulation, RejectsInvalidConfig) {
    SimConfig cfg = reference_config(0.5, 0.1, 100);
    cfg.warmup = 100;
    EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
    cfg = reference_config(1.5, 0.1, 100);
    EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
    cfg = reference_config(0.5, -0.1, 100);
    EXPECT_THROW(run_simulation(cfg), std::invalid_argument);
}

TEST(Simulation, EmpiricalViolationBelowBound) {
    for (double q2 : {0.2, 0.5}) {
        const SimConfig cfg = reference_config(q2, 0.2, 1'000'000);
        const SimResult r = run_simulation(cfg);
        for (int w : {1, 2, 4}) {
            const double bound =
                delay_violation_bound(cfg.arrivals, OnOffService::from_channel(cfg.channel, q2), w).value;
            EXPECT_LE(r.violation_probability(w), bound + 3.0 * r.violation_stderr(w)) << q2 << " " << w;
        }
    }
}

TEST(Replicate, SingleReplicationEqualsDerivedSeedRun) {
    SimConfig cfg = reference_config(0.3, 0.3, 100'000);
    const SimResult rep = replicate(cfg, 1, 99);
    cfg.seed = derive_seed(99, 0);
    const SimResult direct = run_simulation(cfg);
    EXPECT_EQ(rep.delay_counts, direct.delay_counts);
    EXPECT_EQ(rep.aoi_sum, direct.aoi_sum);
    EXPECT_EQ(rep.seeds, direct.seeds);
}

TEST(Replicate, IndependentOfWorkerCount) {
    const SimConfig cfg = reference_config(0.3, 0.3, 50'000);
    const SimResult one = replicate(cfg, 7, 5, 1);
    const SimResult many = replicate(cfg, 7, 5, 4);
    EXPECT_EQ(one.delay_counts, many.delay_counts);
    EXPECT_EQ(one.aoi_sum, many.aoi_sum);
    EXPECT_EQ(one.backlog_sum, many.backlog_sum);
    EXPECT_EQ(one.aoi_batch_means, many.aoi_batch_means);
    EXPECT_EQ(one.seeds, many.seeds);
    EXPECT_EQ(one.replications(), 7u);
}

TEST(Replicate, ConfidenceShrinksWithReplications) {
    const SimConfig cfg = reference_config(0.3, 0.3, 200'000);
    const SimResult one = replicate(cfg, 1, 8);
    const SimResult sixteen = replicate(cfg, 16, 8);
    const double ratio_aoi = one.aoi_ci() / sixteen.aoi_ci();
    const double ratio_pv = one.violation_ci(1) / sixteen.violation_ci(1);
    EXPECT_GT(ratio_aoi, 2.8);
    EXPECT_LT(ratio_aoi, 5.7);
    EXPECT_GT(ratio_pv, 3.5);
    EXPECT_LT(ratio_pv, 4.5);
}

TEST(Replicate, RejectsZeroReplications) {
    EXPECT_THROW(replicate(reference_config(0.3, 0.3, 100), 0, 1), std::invalid_argument);
}
