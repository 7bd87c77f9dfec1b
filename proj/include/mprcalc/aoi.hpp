#pragma once

// Average Age of Information of a sensor that samples with probability q2 per
// slot and whose update survives the channel with probability p2. Ages are in
// slots and reset to 1 on reception.
//
// Renewal-reward chain: X = T_1 + ... + T_M with T the gap between attempts
// and M ~ Geometric(p2), Y = X (X + 1) / 2 the age accumulated over X, and
//   avg age = E[Y] / E[X] = E[X^2] / (2 E[X]) + 1/2.

#include <cmath>
#include <stdexcept>

namespace mprcalc {

struct UpdateProcess {
    double q2 = 1.0;  // per-slot generation probability
    double p2 = 1.0;  // per-attempt success probability

    void validate() const {
        if (!(q2 > 0.0 && q2 <= 1.0)) throw std::domain_error("update process: q2 must lie in (0, 1]");
        if (!(p2 > 0.0 && p2 <= 1.0)) throw std::domain_error("update process: p2 must lie in (0, 1]");
    }
};

/// First two moments of the gap T between attempted transmissions [slots, slots^2].
struct InterTxMoments {
    double mean_t = 1.0;
    double second_t = 1.0;

    void validate() const {
        if (!(mean_t >= 1.0)) throw std::domain_error("inter-transmission moments: E[T] must be >= 1");
        if (!(second_t >= mean_t * mean_t * (1.0 - 1e-12)))
            throw std::domain_error("inter-transmission moments: E[T^2] must be >= E[T]^2");
    }
};

/// T ~ Geometric(q2) on {1, 2, ...}: E[T] = 1/q2, E[T^2] = (2 - q2)/q2^2.
inline InterTxMoments geometric_moments(double q2) {
    if (!(q2 > 0.0 && q2 <= 1.0)) throw std::domain_error("geometric_moments: q2 must lie in (0, 1]");
    return {1.0 / q2, (2.0 - q2) / (q2 * q2)};
}

/// E[X] = E[T] / p2.
inline double inter_success_mean(const InterTxMoments& m, double p2) {
    if (!(p2 > 0.0 && p2 <= 1.0)) throw std::domain_error("inter_success_mean: p2 must lie in (0, 1]");
    return m.mean_t / p2;
}

/// E[X^2] = E[T^2] / p2 + 2 (1 - p2) E[T]^2 / p2^2.
inline double inter_success_second(const InterTxMoments& m, double p2) {
    if (!(p2 > 0.0 && p2 <= 1.0)) throw std::domain_error("inter_success_second: p2 must lie in (0, 1]");
    return m.second_t / p2 + 2.0 * (1.0 - p2) * m.mean_t * m.mean_t / (p2 * p2);
}

/// Time-average age from the inter-reception moments: E[X^2] / (2 E[X]) + 1/2.
inline double aoi_from_inter_success(double mean_x, double second_x) {
    return second_x / (2.0 * mean_x) + 0.5;
}

/// E[T^2] / (2 E[T]) + E[T] (1 - p2) / p2 + 1/2 for any attempt-gap law.
inline double avg_aoi_general(const InterTxMoments& m, double p2) {
    m.validate();
    if (!(p2 > 0.0 && p2 <= 1.0)) throw std::domain_error("avg_aoi_general: p2 must lie in (0, 1] (p2 = 0 means infinite age)");
    return m.second_t / (2.0 * m.mean_t) + m.mean_t * (1.0 - p2) / p2 + 0.5;
}

/// 1 / (q2 p2) for Bernoulli sampling.
inline double avg_aoi_closed(const UpdateProcess& proc) {
    proc.validate();
    return 1.0 / (proc.q2 * proc.p2);
}

}  // namespace mprcalc
