#pragma once

#include <cstdint>
#include <random>

namespace mprcalc {

/// SplitMix64 step. Used to spread a base seed into independent sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of replication `index` under `base_seed`. Pure function of its inputs.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    std::uint64_t state = base_seed ^ (0xD1B54A32D192ED03ULL * (index + 1));
    return splitmix64(state);
}

/// Per-thread random state. Never share one instance between threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return unit_(engine_); }
    bool bernoulli(double p) { return unit_(engine_) < p; }
    /// Unit-mean exponential draw.
    double exponential() { return exp_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::exponential_distribution<double> exp_{1.0};
};

}  // namespace mprcalc
