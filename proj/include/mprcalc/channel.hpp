#pragma once

// Rayleigh block-fading two-user channel towards a common receiver D.
// All quantities linear (watts, meters); rates in nats per slot.

#include <cmath>
#include <stdexcept>
#include <string>

#include "mprcalc/rng.hpp"

namespace mprcalc {

struct ChannelParams {
    double p1 = 0.0;      // transmit power of S1 [W]
    double p2 = 0.0;      // transmit power of S2 [W]
    double r1 = 0.0;      // distance S1 -> D [m]
    double r2 = 0.0;      // distance S2 -> D [m]
    double theta = 0.0;   // path-loss exponent
    double sigma2 = 0.0;  // noise variance [W]
    double gamma1 = 0.0;  // SINR threshold of S1, e^R - 1
    double gamma2 = 0.0;  // SINR threshold of S2

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("channel: ") + name + " must be finite and > 0");
        };
        positive(p1, "p1");
        positive(p2, "p2");
        positive(r1, "r1");
        positive(r2, "r2");
        positive(theta, "theta");
        positive(sigma2, "sigma2");
        if (!(gamma1 >= 0.0) || !std::isfinite(gamma1))
            throw std::invalid_argument("channel: gamma1 must be finite and >= 0");
        if (!(gamma2 >= 0.0) || !std::isfinite(gamma2))
            throw std::invalid_argument("channel: gamma2 must be finite and >= 0");
    }

    /// Mean received power of S1 and S2 at D, P_i r_i^{-theta}.
    double rx_power1() const { return p1 * std::pow(r1, -theta); }
    double rx_power2() const { return p2 * std::pow(r2, -theta); }
};

/// SINR threshold for rate R: gamma = e^R - 1.
inline double threshold_for_rate(double rate_nats) { return std::expm1(rate_nats); }
/// Rate for threshold gamma: R = ln(1 + gamma).
inline double rate_for_threshold(double gamma) { return std::log1p(gamma); }
inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

/// eps1 = P{log(1+SNR1) < R}, S1 alone on the channel.
inline double outage_single(const ChannelParams& c) {
    c.validate();
    return -std::expm1(-c.gamma1 * c.sigma2 / c.rx_power1());
}

/// eps2 = P{log(1+SINR1) < R} with S2 interfering.
inline double outage_interfered(const ChannelParams& c) {
    c.validate();
    const double no_noise_outage = std::exp(-c.gamma1 * c.sigma2 / c.rx_power1());
    const double interference = 1.0 + c.gamma1 * c.rx_power2() / c.rx_power1();
    return 1.0 - no_noise_outage / interference;
}

/// p2 = P{SINR2 >= gamma2} assuming S1 always interferes.
inline double success_prob_s2(const ChannelParams& c) {
    c.validate();
    const double noise_term = std::exp(-c.gamma2 * c.sigma2 / c.rx_power2());
    return noise_term / (1.0 + c.gamma2 * c.rx_power1() / c.rx_power2());
}

/// Squared fading magnitudes |h1|^2, |h2|^2 of one slot.
struct FadingSample {
    double g1 = 0.0;
    double g2 = 0.0;
};

/// Independent |h|^2 ~ Exp(1) for both links; CN(0,1) fading in distribution.
inline FadingSample sample_fading(Rng& rng) {
    FadingSample f;
    f.g1 = rng.exponential();
    f.g2 = rng.exponential();
    return f;
}

/// Reference geometry of the tradeoff studies (r = 80 m, theta = 4, gamma1 = 4,
/// gamma2 = 0.5, P = 0.01 W).
/// Noise variance has no default and must be supplied.
inline ChannelParams reference_channel(double sigma2) {
    ChannelParams c;
    c.p1 = 0.01;
    c.p2 = 0.01;
    c.r1 = 80.0;
    c.r2 = 80.0;
    c.theta = 4.0;
    c.sigma2 = sigma2;
    c.gamma1 = 4.0;
    c.gamma2 = 0.5;
    return c;
}

}  // namespace mprcalc
