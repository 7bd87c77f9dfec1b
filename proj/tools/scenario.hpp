#pragma once

// Scenario files: a flat YAML mapping whose keys carry their units.
//
//   p1_watts: 0.01
//   noise_variance_watts: 1.0e-11
//   delay_targets_slots: [2, 3, 5]
//
// Unknown keys, nested values and missing required keys are rejected with a
// ConfigError naming the key.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mprcalc/sim.hpp"

namespace mprcalc::cli {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class OutputFormat { csv, json };
enum class ServiceKind { on_off, rate_adapt };

struct Scenario {
    SimConfig sim;                    // channel, arrivals, q2, horizon, warmup, seed, mode, ceiling
    std::vector<std::int64_t> delay_targets;
    std::vector<double> q2_values;    // sweep
    std::vector<double> p1_values;    // sweep; defaults to {p1}
    std::optional<double> target_violation;  // optimize
    ServiceKind service = ServiceKind::on_off;
    std::size_t replications = 1;
    std::size_t workers = 1;
    OutputFormat format = OutputFormat::csv;
    std::optional<std::string> output_path;
    bool q2_given = false;
};

/// Every key a scenario file may contain.
const std::vector<std::string>& known_keys();

/// Parses YAML text. Throws ConfigError.
Scenario parse_scenario(const std::string& text);

/// Reads and parses a scenario file. Throws ConfigError.
Scenario load_scenario(const std::string& path);

OutputFormat parse_format(const std::string& name);

}  // namespace mprcalc::cli
