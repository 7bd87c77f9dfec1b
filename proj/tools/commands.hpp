#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace mprcalc::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kNumericalFailure = 3,
    kBacklogOverflow = 4,
};

/// A parsed command line. Flags override the matching scenario keys.
struct Invocation {
    std::string command;  // bound | aoi | simulate | sweep | optimize
    std::string config_path;
    std::optional<std::string> output_path;
    std::optional<OutputFormat> format;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> workers;
    std::vector<std::int64_t> w;
    bool with_sim = false;
    std::optional<std::string> trace_path;  // simulate: per-slot CSV of replication 0
};

/// Loads the scenario, dispatches, writes the report to `out` (or the output
/// path) and diagnostics to `err`. Returns an ExitCode.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Same as run() after a scenario has been loaded.
int run(const Invocation& inv, Scenario scenario, std::ostream& out, std::ostream& err);

/// Full command line: argument parsing plus run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

}  // namespace mprcalc::cli
