#pragma once

// Slot-level Monte Carlo model of the two-user multiple access channel.
//
// Per slot n:
//   1. lambda nats join S1's FIFO queue (plus the burst rho at n = 0);
//   2. fading |h1|^2, |h2|^2 ~ Exp(1) are drawn;
//   3. the sensor S2 samples a fresh update with probability q2 and sends it;
//   4. S1 occupies the channel always (persistent) or iff it has backlog (queue-aware);
//   5. S1 is served R nats iff SINR1 >= e^R - 1, draining min(R, backlog);
//   6. S2's update is received iff SINR2 >= gamma2, otherwise dropped;
//   7. the age at D resets to 1 on reception and grows by one otherwise.
//
// The virtual delay W(t) = inf{u >= 0 : A(0,t) <= D(0,t+u)} is resolved for
// every t in [warmup, horizon). Delays still pending at the horizon are
// counted as censored and treated as violations of every target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mprcalc/channel.hpp"
#include "mprcalc/errors.hpp"
#include "mprcalc/rng.hpp"
#include "mprcalc/snc.hpp"

namespace mprcalc {

enum class InterferenceMode {
    persistent,   // S1 always interferes with S2
    queue_aware,  // S1 transmits only with a nonempty queue
};

struct SimConfig {
    ChannelParams channel;
    ArrivalEnvelope arrivals;
    double q2 = 0.0;
    std::uint64_t horizon = 1'000'000;
    std::optional<std::uint64_t> warmup;  // default: horizon / 10
    std::uint64_t seed = 1;
    InterferenceMode interference = InterferenceMode::persistent;
    double backlog_ceiling = 1e9;  // nats

    std::uint64_t effective_warmup() const { return warmup.value_or(horizon / 10); }

    /// R = ln(1 + gamma1), nats per slot.
    double rate_r() const { return rate_for_threshold(channel.gamma1); }

    void validate() const {
        channel.validate();
        arrivals.validate();
        if (!(q2 >= 0.0 && q2 <= 1.0)) throw std::invalid_argument("simulation: q2 must lie in [0, 1]");
        if (horizon == 0) throw std::invalid_argument("simulation: horizon must be > 0");
        if (effective_warmup() >= horizon) throw std::invalid_argument("simulation: warmup must be < horizon");
        if (!(backlog_ceiling > 0.0)) throw std::invalid_argument("simulation: backlog ceiling must be > 0");
    }
};

/// One slot of a trace. `age` is the age during the slot, before its reception outcome.
struct SlotRecord {
    std::uint64_t slot = 0;
    double arrivals = 0.0;
    double service = 0.0;   // offered: R on decoding success, else 0
    double departed = 0.0;  // min(service, backlog)
    double backlog = 0.0;   // after the slot
    bool s2_generated = false;
    bool s2_success = false;
    std::uint64_t age = 0;
};

using SlotObserver = std::function<void(const SlotRecord&)>;

/// Empirical metrics of one or more replications. Aggregation only sums counts
/// and appends batch means, so merged results do not depend on run order.
struct SimResult {
    static constexpr std::size_t kBatchesPerRun = 32;

    std::vector<std::uint64_t> delay_counts;  // delay_counts[d]: slots with W(t) = d
    std::uint64_t censored_delays = 0;
    std::uint64_t measured_slots = 0;
    std::uint64_t max_delay = 0;
    double aoi_sum = 0.0;
    double backlog_sum = 0.0;
    std::vector<double> aoi_batch_means;
    std::vector<double> backlog_batch_means;
    std::uint64_t s2_attempts = 0;
    std::uint64_t s2_successes = 0;
    std::vector<std::uint64_t> seeds;

    std::size_t replications() const { return seeds.size(); }

    double avg_aoi() const { return aoi_sum / static_cast<double>(measured_slots); }
    double avg_backlog() const { return backlog_sum / static_cast<double>(measured_slots); }

    /// Empirical P{W > w}.
    double violation_probability(std::uint64_t w) const {
        std::uint64_t exceed = censored_delays;
        for (std::size_t d = w + 1; d < delay_counts.size(); ++d) exceed += delay_counts[d];
        return static_cast<double>(exceed) / static_cast<double>(measured_slots);
    }

    /// Binomial standard error of violation_probability(w).
    double violation_stderr(std::uint64_t w) const {
        const double p = violation_probability(w);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(measured_slots));
    }

    /// 95% half-widths: binomial for probabilities, batch means for averages.
    double violation_ci(std::uint64_t w) const { return 1.96 * violation_stderr(w); }
    double aoi_ci() const { return batch_ci(aoi_batch_means); }
    double backlog_ci() const { return batch_ci(backlog_batch_means); }

    void merge(const SimResult& other) {
        if (delay_counts.size() < other.delay_counts.size()) delay_counts.resize(other.delay_counts.size(), 0);
        for (std::size_t d = 0; d < other.delay_counts.size(); ++d) delay_counts[d] += other.delay_counts[d];
        censored_delays += other.censored_delays;
        measured_slots += other.measured_slots;
        max_delay = std::max(max_delay, other.max_delay);
        aoi_sum += other.aoi_sum;
        backlog_sum += other.backlog_sum;
        aoi_batch_means.insert(aoi_batch_means.end(), other.aoi_batch_means.begin(), other.aoi_batch_means.end());
        backlog_batch_means.insert(backlog_batch_means.end(), other.backlog_batch_means.begin(),
                                   other.backlog_batch_means.end());
        s2_attempts += other.s2_attempts;
        s2_successes += other.s2_successes;
        seeds.insert(seeds.end(), other.seeds.begin(), other.seeds.end());
    }

private:
    static double batch_ci(const std::vector<double>& means) {
        const std::size_t n = means.size();
        if (n < 2) return std::nan("");
        double mean = 0.0;
        for (double m : means) mean += m;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double m : means) ss += (m - mean) * (m - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        return 1.96 * sd / std::sqrt(static_cast<double>(n));
    }
};

/// Runs `config.horizon` slots with `config.seed`. Throws std::invalid_argument
/// for an invalid config and BacklogOverflowError past the backlog ceiling.
inline SimResult run_simulation(const SimConfig& config, const SlotObserver& observer = {}) {
    config.validate();

    const ChannelParams& ch = config.channel;
    const double rx1 = ch.rx_power1();
    const double rx2 = ch.rx_power2();
    const double rate = config.rate_r();
    const double lambda = config.arrivals.lambda;
    const std::uint64_t warmup = config.effective_warmup();
    const std::uint64_t window = config.horizon - warmup;
    const std::size_t batches = std::min<std::uint64_t>(SimResult::kBatchesPerRun, window);
    const bool persistent = config.interference == InterferenceMode::persistent;

    Rng rng(config.seed);
    SimResult result;
    result.seeds.push_back(config.seed);
    result.delay_counts.assign(8, 0);

    struct Pending {
        std::uint64_t slot;
        double target;  // departures since the busy period began that clear A(0, slot)
    };
    std::deque<Pending> pending;
    double backlog = 0.0;
    double busy_departed = 0.0;
    std::uint64_t age = 1;

    std::vector<double> aoi_batch(batches, 0.0);
    std::vector<double> backlog_batch(batches, 0.0);
    std::vector<std::uint64_t> batch_len(batches, 0);

    auto record_delay = [&](std::uint64_t w) {
        if (w >= result.delay_counts.size()) result.delay_counts.resize(w + 1, 0);
        ++result.delay_counts[w];
        result.max_delay = std::max(result.max_delay, w);
    };

    for (std::uint64_t n = 0; n < config.horizon; ++n) {
        const bool measured = n >= warmup;
        const double backlog_start = backlog;
        if (measured) {
            if (backlog_start == 0.0) {
                record_delay(0);
            } else {
                pending.push_back({n, busy_departed + backlog_start});
            }
        }

        const double arrivals = lambda + (n == 0 ? config.arrivals.rho : 0.0);
        backlog += arrivals;

        const FadingSample fading = sample_fading(rng);
        const bool s2_generated = rng.bernoulli(config.q2);
        const bool s1_transmits = persistent || backlog > 0.0;

        const double interference1 = s2_generated ? rx2 * fading.g2 : 0.0;
        const bool s1_decoded = rx1 * fading.g1 >= ch.gamma1 * (interference1 + ch.sigma2);
        const double service = s1_decoded ? rate : 0.0;

        double departed = 0.0;
        if (s1_decoded && backlog > 0.0) {
            if (backlog <= rate) {
                departed = backlog;
                backlog = 0.0;
            } else {
                departed = rate;
                backlog -= rate;
            }
        }
        busy_departed += departed;

        if (backlog == 0.0) {
            while (!pending.empty()) {
                record_delay(n + 1 - pending.front().slot);
                pending.pop_front();
            }
            busy_departed = 0.0;
        } else {
            const double tol = 1e-12 * std::max(1.0, busy_departed);
            while (!pending.empty() && pending.front().target <= busy_departed + tol) {
                record_delay(n + 1 - pending.front().slot);
                pending.pop_front();
            }
        }

        bool s2_success = false;
        if (s2_generated) {
            const double interference2 = s1_transmits ? rx1 * fading.g1 : 0.0;
            s2_success = rx2 * fading.g2 >= ch.gamma2 * (interference2 + ch.sigma2);
            if (measured) {
                ++result.s2_attempts;
                if (s2_success) ++result.s2_successes;
            }
        }

        if (measured) {
            const std::size_t b = static_cast<std::size_t>((n - warmup) * batches / window);
            aoi_batch[b] += static_cast<double>(age);
            backlog_batch[b] += backlog_start;
            ++batch_len[b];
            result.aoi_sum += static_cast<double>(age);
            result.backlog_sum += backlog_start;
            ++result.measured_slots;
        }

        if (observer) {
            observer(SlotRecord{n, arrivals, service, departed, backlog, s2_generated, s2_success, age});
        }

        age = s2_success ? 1 : age + 1;

        if (backlog > config.backlog_ceiling) {
            throw BacklogOverflowError("simulation: backlog exceeded " + std::to_string(config.backlog_ceiling) +
                                       " nats at slot " + std::to_string(n) +
                                       "; the configuration is likely unstable");
        }
    }
    result.censored_delays = pending.size();

    for (std::size_t b = 0; b < batches; ++b) {
        result.aoi_batch_means.push_back(aoi_batch[b] / static_cast<double>(batch_len[b]));
        result.backlog_batch_means.push_back(backlog_batch[b] / static_cast<double>(batch_len[b]));
    }
    return result;
}

/// Runs `n_reps` replications with seeds derive_seed(base_seed, i) on up to
/// `workers` threads and merges them in replication order.
inline SimResult replicate(const SimConfig& config, std::size_t n_reps, std::uint64_t base_seed,
                           std::size_t workers = 1) {
    if (n_reps == 0) throw std::invalid_argument("replicate: n_reps must be >= 1");
    config.validate();
    workers = std::clamp<std::size_t>(workers, 1, n_reps);

    std::vector<SimResult> runs(n_reps);
    std::vector<std::exception_ptr> errors(n_reps);
    auto work = [&](std::size_t first) {
        for (std::size_t i = first; i < n_reps; i += workers) {
            SimConfig rep = config;
            rep.seed = derive_seed(base_seed, i);
            try {
                runs[i] = run_simulation(rep);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work, k);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SimResult total = std::move(runs.front());
    for (std::size_t i = 1; i < n_reps; ++i) total.merge(runs[i]);
    return total;
}

}  // namespace mprcalc
