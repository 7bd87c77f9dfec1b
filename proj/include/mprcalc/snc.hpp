#pragma once

// (min,x) stochastic network calculus for a single queue fed by an affine
// (rho, lambda) envelope and drained by an i.i.d. per-slot service process
// characterized through its Mellin transform M(s) = E[g^{s-1}], g = e^{service}.
//
// Kernel bounds are evaluated in log space:
//   log K(s, -w) = rho s + w log M(1-s) - log(1 - e^{lambda s} M(1-s))
// which is convex in s on the stability interval (0, s_upper), so the
// geometric bracket plus golden-section search below finds its global minimum.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mprcalc/channel.hpp"
#include "mprcalc/errors.hpp"
#include "mprcalc/incomplete_gamma.hpp"

namespace mprcalc {

/// Affine arrival envelope: burst rho [nats] plus rate lambda [nats/slot].
struct ArrivalEnvelope {
    double rho = 0.0;
    double lambda = 0.0;

    void validate() const {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("arrivals: rho must be >= 0");
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("arrivals: lambda must be >= 0");
    }
};

/// Memoryless on-off server: R nats on success, nothing on error. The error
/// probability is eps1 when the sensor is silent and eps2 when it transmits
/// (probability q2), giving beta = eps1 - q2 (eps1 - eps2) per slot.
class OnOffService {
public:
    OnOffService(double rate_r, double eps1, double eps2, double q2)
        : rate_r_(rate_r), eps1_(eps1), eps2_(eps2), q2_(q2), beta_(eps1 - q2 * (eps1 - eps2)) {
        if (!(rate_r > 0.0) || !std::isfinite(rate_r)) throw std::invalid_argument("on-off service: rate_r must be > 0");
        if (!(eps1 >= 0.0 && eps1 <= eps2 && eps2 <= 1.0))
            throw std::invalid_argument("on-off service: need 0 <= eps1 <= eps2 <= 1");
        if (!(q2 >= 0.0 && q2 <= 1.0)) throw std::invalid_argument("on-off service: q2 must lie in [0, 1]");
        beta_ = std::clamp(beta_, eps1_, eps2_);
    }

    /// Service seen by S1 over `channel` when the sensor samples with probability q2.
    static OnOffService from_channel(const ChannelParams& channel, double q2) {
        return OnOffService(rate_for_threshold(channel.gamma1), outage_single(channel),
                            outage_interfered(channel), q2);
    }

    double rate_r() const { return rate_r_; }
    double eps1() const { return eps1_; }
    double eps2() const { return eps2_; }
    double q2() const { return q2_; }
    double beta() const { return beta_; }

    double mellin(double s) const { return std::exp((s - 1.0) * rate_r_) * (1.0 - beta_) + beta_; }

    /// log M(s), accurate near s = 1 (log1p form) and for large |s| (log-sum-exp form).
    double log_mellin(double s) const {
        const double z = (s - 1.0) * rate_r_;
        if (std::fabs(z) < 0.5) return std::log1p((1.0 - beta_) * std::expm1(z));
        const double log_on = beta_ < 1.0 ? std::log1p(-beta_) + z : -std::numeric_limits<double>::infinity();
        const double log_off = beta_ > 0.0 ? std::log(beta_) : -std::numeric_limits<double>::infinity();
        const double hi = std::max(log_on, log_off);
        const double lo = std::min(log_on, log_off);
        return hi + std::log1p(std::exp(lo - hi));
    }

private:
    double rate_r_;
    double eps1_;
    double eps2_;
    double q2_;
    double beta_;
};

/// S1 adapting its rate to the instantaneous channel, C = log(1 + SINR).
///
/// z1: sensor silent, C = log(1 + snr g). z2: sensor transmitting with the same
/// mean received power as S1, C = log(1 + snr g1 / (snr g2 + 1)).
/// Both transforms converge for every real s; evaluation is restricted to the
/// range where the incomplete gamma arguments stay in [-3, 20]: s in [-1, 20].
class RateAdaptService {
public:
    static constexpr double kMinS = -1.0;
    static constexpr double kMaxS = 20.0;

    RateAdaptService(double snr, double q2) : snr_(snr), q2_(q2) {
        if (!(snr > 0.0) || !std::isfinite(snr)) throw std::invalid_argument("rate-adapt service: snr must be > 0");
        if (!(q2 >= 0.0 && q2 <= 1.0)) throw std::invalid_argument("rate-adapt service: q2 must lie in [0, 1]");
    }

    static RateAdaptService from_channel(const ChannelParams& channel, double q2) {
        channel.validate();
        return RateAdaptService(channel.rx_power1() / channel.sigma2, q2);
    }

    double snr() const { return snr_; }
    double q2() const { return q2_; }

    /// E[(1 + snr g)^{s-1}] = e^{1/snr} snr^{s-1} Gamma(s, 1/snr).
    double mellin_z1(double s) const {
        check_domain(s);
        const double y = 1.0 / snr_;
        return std::exp(y) * std::pow(snr_, s - 1.0) * upper_incomplete_gamma(s, y);
    }

    /// 1 + (s-1) e^{1/snr} snr^{s-2} Gamma(s-2, 1/snr).
    double mellin_z2(double s) const {
        check_domain(s);
        const double y = 1.0 / snr_;
        return 1.0 + (s - 1.0) * std::exp(y) * std::pow(snr_, s - 2.0) * upper_incomplete_gamma(s - 2.0, y);
    }

    double mellin(double s) const { return (1.0 - q2_) * mellin_z1(s) + q2_ * mellin_z2(s); }
    double log_mellin(double s) const { return std::log(mellin(s)); }

    /// Largest s at which the bound search may evaluate mellin(1 - s).
    double search_cap() const { return 1.0 - kMinS; }

private:
    static void check_domain(double s) {
        if (!(s >= kMinS && s <= kMaxS))
            throw std::domain_error("rate-adapt Mellin transform: s outside [-1, 20]");
    }

    double snr_;
    double q2_;
};

/// Anything exposing log M(s) can drive the bound solvers.
template <class S>
concept ServiceModel = requires(const S& m, double s) {
    { m.log_mellin(s) } -> std::convertible_to<double>;
};

/// Adapts a plain callable s -> M(s) to ServiceModel.
template <class F>
struct MellinFunction {
    F fn;
    double log_mellin(double s) const { return std::log(static_cast<double>(fn(s))); }
};
template <class F>
MellinFunction(F) -> MellinFunction<F>;

/// Mellin transform of the service: M(s) for a model or plain callable.
template <ServiceModel S>
double service_mellin(const S& m, double s) {
    return std::exp(m.log_mellin(s));
}

struct BoundResult {
    double value = 1.0;
    double s_star = 0.0;
    bool stable = false;
};

struct SearchOptions {
    double s_grid_start = 1e-4;  // first point of the geometric grid 1e-4 * 2^k
    double s_cap = 1e3;          // search ceiling when every s is stable
    double s_tol = 1e-9;         // golden-section bracket width, relative to max(1, s)
};

// ---------------------------------------------------------------------------
// Mellin transforms and kernels
// ---------------------------------------------------------------------------

inline double mellin_onoff(const OnOffService& service, double s) { return service.mellin(s); }

inline double mellin_rate_adapt(const RateAdaptService& service, double s) { return service.mellin(s); }

/// Affine-envelope bound on E[e^{(s-1) A(tau, t)}].
inline double mellin_arrival(const ArrivalEnvelope& env, double s, std::int64_t tau, std::int64_t t) {
    if (t < tau) throw std::invalid_argument("mellin_arrival: need t >= tau");
    return std::exp((s - 1.0) * (env.lambda * static_cast<double>(t - tau) + env.rho));
}

namespace detail {

// lambda s + log M(1-s); the queue is stable at s iff this is negative.
template <ServiceModel S>
double stability_exponent(const ArrivalEnvelope& env, const S& service, double s) {
    return env.lambda * s + service.log_mellin(1.0 - s);
}

// -log(1 - e^x) for x < 0.
inline double neg_log1m_exp(double x) {
    return x > -0.6931471805599453 ? -std::log(-std::expm1(x)) : -std::log1p(-std::exp(x));
}

template <ServiceModel S>
double search_ceiling(const S& service, const SearchOptions& opts) {
    if constexpr (requires { service.search_cap(); }) {
        return std::min(opts.s_cap, static_cast<double>(service.search_cap()));
    } else {
        return opts.s_cap;
    }
}

// Upper end of the stability interval (0, s_upper), clipped to the search
// ceiling. Returns 0 when no s > 0 is stable.
template <ServiceModel S>
double stable_upper(const ArrivalEnvelope& env, const S& service, const SearchOptions& opts) {
    const double cap = search_ceiling(service, opts);
    auto stable = [&](double s) { return stability_exponent(env, service, s) < 0.0; };

    double last_stable = 0.0;
    double first_unstable = 0.0;
    for (double s = opts.s_grid_start; s < cap; s *= 2.0) {
        if (stable(s)) {
            last_stable = s;
        } else if (last_stable > 0.0) {
            first_unstable = s;
            break;
        }
    }
    if (last_stable == 0.0) {
        // The interval may sit entirely below the first grid point.
        for (double s = opts.s_grid_start / 2.0; s > 1e-14; s /= 2.0) {
            if (stable(s)) {
                last_stable = s;
                first_unstable = 2.0 * s;
                break;
            }
        }
        if (last_stable == 0.0) return 0.0;
    }
    if (first_unstable == 0.0) {
        if (stable(cap)) return cap;
        first_unstable = cap;
    }
    double lo = last_stable;
    double hi = first_unstable;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
    }
    return lo;
}

// Minimizes a convex (or unimodal) objective on (0, s_upper): geometric grid
// 1e-4 * 2^k to locate a bracket, then golden-section refinement.
template <class Objective>
std::pair<double, double> minimize_on_stable_range(Objective&& f, double s_upper, const SearchOptions& opts) {
    std::vector<double> grid;
    for (double s = opts.s_grid_start; s < s_upper; s *= 2.0) grid.push_back(s);
    if (s_upper < std::numeric_limits<double>::infinity()) grid.push_back(s_upper);
    if (grid.size() < 2) {
        grid.clear();
        for (int k = 16; k >= 0; --k) grid.push_back(s_upper * std::ldexp(1.0, -k));
    }

    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = best == 0 ? 0.0 : grid[best - 1];
    double b = best + 1 < grid.size() ? grid[best + 1] : grid[best];

    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > opts.s_tol * std::max(1.0, std::fabs(b))) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    double s_star = f1 <= f2 ? x1 : x2;
    double val = std::min(f1, f2);
    if (best_val < val) {
        s_star = grid[best];
        val = best_val;
    }
    return {s_star, val};
}

template <ServiceModel S>
double log_steady_kernel(const ArrivalEnvelope& env, const S& service, double s, std::int64_t w) {
    const double log_m = service.log_mellin(1.0 - s);
    const double x = env.lambda * s + log_m;
    if (!(x < 0.0)) return std::numeric_limits<double>::infinity();
    return env.rho * s + static_cast<double>(w) * log_m + neg_log1m_exp(x);
}

}  // namespace detail

/// e^{lambda s} M(1-s) < 1.
template <ServiceModel S>
bool is_stable(const ArrivalEnvelope& env, const S& service, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("is_stable: s must be > 0");
    return detail::stability_exponent(env, service, s) < 0.0;
}

/// Steady-state kernel bound K(s, -w) = e^{rho s} M(1-s)^w / (1 - e^{lambda s} M(1-s)).
/// Throws UnstableError when the denominator is not positive.
template <ServiceModel S>
double steady_kernel(const ArrivalEnvelope& env, const S& service, double s, std::int64_t w) {
    if (!(s > 0.0)) throw std::invalid_argument("steady_kernel: s must be > 0");
    if (w < 0) throw std::invalid_argument("steady_kernel: w must be >= 0");
    if (!is_stable(env, service, s)) throw UnstableError("steady_kernel: unstable at s = " + std::to_string(s));
    return std::exp(detail::log_steady_kernel(env, service, s, w));
}

/// Kernel K(s, tau, t) = sum_{u=0}^{min(tau,t)} M_A(1+s, u, t) M_S(1-s, u, tau) with the
/// affine envelope and i.i.d. service, summed term by term (no t -> infinity limit).
/// K(s, t+w, t) is the delay kernel and K(s, t, t) the backlog kernel at time t.
template <ServiceModel S>
double finite_kernel(const ArrivalEnvelope& env, const S& service, double s, std::int64_t tau, std::int64_t t) {
    if (!(s > 0.0)) throw std::invalid_argument("finite_kernel: s must be > 0");
    if (tau < 0 || t < 0) throw std::invalid_argument("finite_kernel: tau, t must be >= 0");
    const double log_m = service.log_mellin(1.0 - s);
    double sum = 0.0;
    for (std::int64_t u = 0; u <= std::min(tau, t); ++u) {
        // log M_A(1+s, u, t) for the affine envelope.
        const double log_arrival = s * (env.lambda * static_cast<double>(t - u) + env.rho);
        sum += std::exp(log_arrival + static_cast<double>(tau - u) * log_m);
    }
    return sum;
}

/// p_v(w) = inf_{s>0} K(s, -w), clamped to 1. Vacuous (value 1, stable = false)
/// when no s stabilizes the queue or the minimum exceeds 1.
template <ServiceModel S>
BoundResult delay_violation_bound(const ArrivalEnvelope& env, const S& service, std::int64_t w,
                                  const SearchOptions& opts = {}) {
    env.validate();
    if (w < 0) throw std::invalid_argument("delay_violation_bound: w must be >= 0");
    const double s_upper = detail::stable_upper(env, service, opts);
    if (s_upper <= 0.0) return {1.0, 0.0, false};

    auto objective = [&](double s) { return detail::log_steady_kernel(env, service, s, w); };
    const auto [s_star, log_val] = detail::minimize_on_stable_range(objective, s_upper, opts);
    if (!(log_val < 0.0)) return {1.0, s_star, false};
    return {std::exp(log_val), s_star, true};
}

/// Steady-state backlog bound b^eps = inf_{s>0} (1/s)(log K(s) - log eps) with
/// K(s) = e^{rho s} / (1 - e^{lambda s} M(1-s)). Result in nats.
/// Throws UnstableError when no s > 0 stabilizes the queue.
template <ServiceModel S>
BoundResult backlog_bound(const ArrivalEnvelope& env, const S& service, double epsilon,
                          const SearchOptions& opts = {}) {
    env.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("backlog_bound: epsilon must lie in (0, 1)");
    const double s_upper = detail::stable_upper(env, service, opts);
    if (s_upper <= 0.0) throw UnstableError("backlog_bound: no s > 0 satisfies the stability condition");

    const double log_eps = std::log(epsilon);
    auto objective = [&](double s) {
        const double log_k = detail::log_steady_kernel(env, service, s, 0);
        return (log_k - log_eps) / s;
    };
    const auto [s_star, val] = detail::minimize_on_stable_range(objective, s_upper, opts);
    return {std::max(val, 0.0), s_star, true};
}

}  // namespace mprcalc
