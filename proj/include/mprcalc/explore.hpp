#pragma once

// Latency/freshness tradeoff sweeps and the largest sampling probability that
// keeps the delay-violation bound under a target.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mprcalc/aoi.hpp"
#include "mprcalc/channel.hpp"
#include "mprcalc/sim.hpp"
#include "mprcalc/snc.hpp"

namespace mprcalc {

struct TradeoffPoint {
    double q2 = 0.0;
    std::int64_t w = 0;
    double p1 = 0.0;
    double pv_bound = 1.0;
    std::optional<double> pv_empirical;
    double aoi_analytic = std::numeric_limits<double>::infinity();
    std::optional<double> aoi_empirical;
    bool stable = false;
    std::optional<std::string> error;  // set when the row could not be evaluated
};

struct OptimizerResult {
    double q2_max = 0.0;
    double aoi_at_max = std::numeric_limits<double>::infinity();
    bool feasible = false;
    int iterations = 0;
};

struct SweepOptions {
    bool with_sim = false;
    std::size_t reps = 1;
    std::size_t workers = 1;
};

/// Delay-violation bound of S1 at sampling probability q2 over `channel`.
inline BoundResult pv_bound_at(const ChannelParams& channel, const ArrivalEnvelope& arrivals, double q2,
                               std::int64_t w) {
    return delay_violation_bound(arrivals, OnOffService::from_channel(channel, q2), w);
}

/// Analytical columns of one tradeoff row.
inline TradeoffPoint analytic_point(const ChannelParams& channel, const ArrivalEnvelope& arrivals, double q2,
                                    std::int64_t w) {
    TradeoffPoint row;
    row.q2 = q2;
    row.w = w;
    row.p1 = channel.p1;
    const BoundResult bound = pv_bound_at(channel, arrivals, q2, w);
    row.pv_bound = bound.value;
    row.stable = bound.stable;
    if (q2 > 0.0) row.aoi_analytic = avg_aoi_closed({q2, success_prob_s2(channel)});
    return row;
}

/// Cartesian sweep in (p1, q2, w) order, w fastest. Failures mark the row
/// (stable = false, error set) instead of aborting the sweep.
inline std::vector<TradeoffPoint> sweep_tradeoff(const SimConfig& base, const std::vector<double>& q2_values,
                                                 const std::vector<std::int64_t>& w_values,
                                                 const std::vector<double>& p1_values,
                                                 const SweepOptions& opts = {}) {
    if (q2_values.empty() || w_values.empty() || p1_values.empty())
        throw std::invalid_argument("sweep_tradeoff: value lists must be nonempty");

    std::vector<TradeoffPoint> rows;
    rows.reserve(q2_values.size() * w_values.size() * p1_values.size());
    for (double p1 : p1_values) {
        for (double q2 : q2_values) {
            SimConfig cfg = base;
            cfg.channel.p1 = p1;
            cfg.q2 = q2;

            std::optional<SimResult> sim;
            std::optional<std::string> sim_error;
            if (opts.with_sim) {
                try {
                    sim = replicate(cfg, opts.reps, cfg.seed, opts.workers);
                } catch (const std::exception& e) {
                    sim_error = e.what();
                }
            }

            for (std::int64_t w : w_values) {
                TradeoffPoint row;
                row.q2 = q2;
                row.w = w;
                row.p1 = p1;
                try {
                    row = analytic_point(cfg.channel, cfg.arrivals, q2, w);
                } catch (const std::exception& e) {
                    row.error = e.what();
                    row.stable = false;
                }
                if (sim) {
                    row.pv_empirical = sim->violation_probability(static_cast<std::uint64_t>(w));
                    row.aoi_empirical = sim->avg_aoi();
                } else if (sim_error && !row.error) {
                    row.error = *sim_error;
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

/// sup{q2 in [0, 1] : pv_bound(q2, w) <= eps} by bisection to 1e-6 in q2.
/// Throws std::logic_error if the bound is not monotone in q2 on a coarse grid.
inline OptimizerResult max_sampling_rate(const SimConfig& base, std::int64_t w, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("max_sampling_rate: eps must lie in (0, 1)");
    if (w < 0) throw std::invalid_argument("max_sampling_rate: w must be >= 0");
    base.channel.validate();
    base.arrivals.validate();

    auto pv = [&](double q2) { return pv_bound_at(base.channel, base.arrivals, q2, w).value; };

    constexpr int kCoarse = 20;
    double prev = pv(0.0);
    for (int k = 1; k <= kCoarse; ++k) {
        const double cur = pv(static_cast<double>(k) / kCoarse);
        if (cur < prev * (1.0 - 1e-9))
            throw std::logic_error("max_sampling_rate: delay bound is not nondecreasing in q2");
        prev = cur;
    }

    const double p2 = success_prob_s2(base.channel);
    OptimizerResult out;
    if (pv(0.0) > eps) return out;
    out.feasible = true;
    if (pv(1.0) <= eps) {
        out.q2_max = 1.0;
        out.aoi_at_max = avg_aoi_closed({1.0, p2});
        return out;
    }

    double lo = 0.0;  // feasible
    double hi = 1.0;  // infeasible
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (pv(mid) <= eps ? lo : hi) = mid;
        ++out.iterations;
    }
    out.q2_max = lo;
    out.aoi_at_max = lo > 0.0 ? avg_aoi_closed({lo, p2}) : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace mprcalc
