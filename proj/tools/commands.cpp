#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "mprcalc/mprcalc.hpp"

namespace mprcalc::cli {

using nlohmann::ordered_json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// One report table. Cells are preformatted; JSON keeps the typed values.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> csv_rows;
    ordered_json json_rows = ordered_json::array();
};

std::string csv_cell(std::optional<double> v) { return v ? format_number(*v) : std::string(); }
std::string csv_bool(bool b) { return b ? "true" : "false"; }

ordered_json json_number(double v) {
    // JSON has no inf/nan; they become null.
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}
ordered_json json_number(std::optional<double> v) { return v ? json_number(*v) : ordered_json(nullptr); }

std::string render(const Table& t, OutputFormat fmt, const std::string& command, std::uint64_t seed) {
    if (fmt == OutputFormat::json) {
        ordered_json doc;
        doc["command"] = command;
        doc["seed"] = seed;
        doc["rows"] = t.json_rows;
        return doc.dump(2) + "\n";
    }
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) s += ',';
        s += t.columns[i];
    }
    s += '\n';
    for (const auto& row : t.csv_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += row[i];
        }
        s += '\n';
    }
    return s;
}

std::vector<std::int64_t> delay_targets(const Invocation& inv, const Scenario& sc) {
    const auto& w = inv.w.empty() ? sc.delay_targets : inv.w;
    if (w.empty()) throw ConfigError("missing delay targets: set 'delay_targets_slots' or pass --w");
    for (auto v : w)
        if (v < 0) throw ConfigError("delay targets must be >= 0");
    return w;
}

void require_q2(const Scenario& sc) {
    if (!sc.q2_given) throw ConfigError("missing required config key 'sampling_probability_q2'");
}

Table cmd_bound(const Invocation& inv, const Scenario& sc) {
    require_q2(sc);
    const auto ws = delay_targets(inv, sc);
    Table t;
    t.columns = {"w", "pv_bound", "s_star", "stable"};
    for (auto w : ws) {
        BoundResult b;
        if (sc.service == ServiceKind::rate_adapt)
            b = delay_violation_bound(sc.sim.arrivals, RateAdaptService::from_channel(sc.sim.channel, sc.sim.q2), w);
        else
            b = pv_bound_at(sc.sim.channel, sc.sim.arrivals, sc.sim.q2, w);
        t.csv_rows.push_back({std::to_string(w), format_number(b.value), format_number(b.s_star), csv_bool(b.stable)});
        t.json_rows.push_back(
            {{"w", w}, {"pv_bound", json_number(b.value)}, {"s_star", json_number(b.s_star)}, {"stable", b.stable}});
    }
    return t;
}

Table cmd_aoi(const Scenario& sc) {
    require_q2(sc);
    const double q2 = sc.sim.q2;
    const double p2 = success_prob_s2(sc.sim.channel);
    const InterTxMoments m = geometric_moments(q2);
    const double mean_x = inter_success_mean(m, p2);
    const double second_x = inter_success_second(m, p2);
    const double aoi = avg_aoi_closed({q2, p2});

    Table t;
    t.columns = {"q2", "p2", "mean_t", "second_t", "mean_x", "second_x", "aoi"};
    t.csv_rows.push_back({format_number(q2), format_number(p2), format_number(m.mean_t), format_number(m.second_t),
                          format_number(mean_x), format_number(second_x), format_number(aoi)});
    t.json_rows.push_back({{"q2", q2},
                           {"p2", json_number(p2)},
                           {"mean_t", json_number(m.mean_t)},
                           {"second_t", json_number(m.second_t)},
                           {"mean_x", json_number(mean_x)},
                           {"second_x", json_number(second_x)},
                           {"aoi", json_number(aoi)}});
    return t;
}

void write_trace(const std::string& path, const SimConfig& cfg) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write trace file '" + path + "'");
    f << "slot,arrivals,service,backlog,s2_generated,s2_success,age\n";
    run_simulation(cfg, [&](const SlotRecord& r) {
        f << r.slot << ',' << format_number(r.arrivals) << ',' << format_number(r.service) << ','
          << format_number(r.backlog) << ',' << (r.s2_generated ? 1 : 0) << ',' << (r.s2_success ? 1 : 0) << ','
          << r.age << '\n';
    });
    if (!f) throw ConfigError("failed writing trace file '" + path + "'");
}

Table cmd_simulate(const Invocation& inv, const Scenario& sc) {
    require_q2(sc);
    const auto ws = delay_targets(inv, sc);
    const SimResult res = replicate(sc.sim, sc.replications, sc.sim.seed, sc.workers);

    if (inv.trace_path) {
        SimConfig first = sc.sim;
        first.seed = derive_seed(sc.sim.seed, 0);
        write_trace(*inv.trace_path, first);
    }

    Table t;
    t.columns = {"w",         "pv_empirical", "pv_ci_halfwidth", "avg_aoi",  "aoi_ci_halfwidth",
                 "avg_backlog", "backlog_ci_halfwidth", "max_delay", "censored", "slots",
                 "replications", "seed"};
    for (auto w : ws) {
        const auto wu = static_cast<std::uint64_t>(w);
        const double pv = res.violation_probability(wu);
        const double pv_ci = res.violation_ci(wu);
        t.csv_rows.push_back({std::to_string(w), format_number(pv), format_number(pv_ci), format_number(res.avg_aoi()),
                              format_number(res.aoi_ci()), format_number(res.avg_backlog()),
                              format_number(res.backlog_ci()), std::to_string(res.max_delay),
                              std::to_string(res.censored_delays), std::to_string(res.measured_slots),
                              std::to_string(res.replications()), std::to_string(sc.sim.seed)});
        t.json_rows.push_back({{"w", w},
                               {"pv_empirical", json_number(pv)},
                               {"pv_ci_halfwidth", json_number(pv_ci)},
                               {"avg_aoi", json_number(res.avg_aoi())},
                               {"aoi_ci_halfwidth", json_number(res.aoi_ci())},
                               {"avg_backlog", json_number(res.avg_backlog())},
                               {"backlog_ci_halfwidth", json_number(res.backlog_ci())},
                               {"max_delay", res.max_delay},
                               {"censored", res.censored_delays},
                               {"slots", res.measured_slots},
                               {"replications", res.replications()},
                               {"seed", sc.sim.seed}});
    }
    return t;
}

Table cmd_sweep(const Invocation& inv, const Scenario& sc) {
    if (sc.q2_values.empty()) throw ConfigError("config key 'q2_values' must be a nonempty list");
    const auto ws = delay_targets(inv, sc);
    SweepOptions opts;
    opts.with_sim = inv.with_sim;
    opts.reps = sc.replications;
    opts.workers = sc.workers;
    const auto rows = sweep_tradeoff(sc.sim, sc.q2_values, ws, sc.p1_values, opts);

    Table t;
    t.columns = {"q2", "w", "p1", "pv_bound", "pv_empirical", "aoi_analytic", "aoi_empirical", "stable"};
    for (const auto& r : rows) {
        t.csv_rows.push_back({format_number(r.q2), std::to_string(r.w), format_number(r.p1), format_number(r.pv_bound),
                              csv_cell(r.pv_empirical), format_number(r.aoi_analytic), csv_cell(r.aoi_empirical),
                              csv_bool(r.stable)});
        ordered_json row = {{"q2", r.q2},
                            {"w", r.w},
                            {"p1", r.p1},
                            {"pv_bound", json_number(r.pv_bound)},
                            {"pv_empirical", json_number(r.pv_empirical)},
                            {"aoi_analytic", json_number(r.aoi_analytic)},
                            {"aoi_empirical", json_number(r.aoi_empirical)},
                            {"stable", r.stable}};
        if (r.error) row["error"] = *r.error;
        t.json_rows.push_back(std::move(row));
    }
    return t;
}

Table cmd_optimize(const Invocation& inv, const Scenario& sc) {
    const auto ws = delay_targets(inv, sc);
    if (ws.size() != 1) throw ConfigError("optimize needs exactly one delay target");
    if (!sc.target_violation) throw ConfigError("missing required config key 'target_violation_probability'");
    const OptimizerResult r = max_sampling_rate(sc.sim, ws.front(), *sc.target_violation);

    Table t;
    t.columns = {"q2_max", "aoi_at_max", "feasible"};
    t.csv_rows.push_back({format_number(r.q2_max), format_number(r.aoi_at_max), csv_bool(r.feasible)});
    t.json_rows.push_back(
        {{"q2_max", r.q2_max}, {"aoi_at_max", json_number(r.aoi_at_max)}, {"feasible", r.feasible}});
    return t;
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = load_scenario(inv.config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    return run(inv, std::move(sc), out, err);
}

int run(const Invocation& inv, Scenario sc, std::ostream& out, std::ostream& err) {
    if (inv.seed) sc.sim.seed = *inv.seed;
    if (inv.reps) sc.replications = *inv.reps;
    if (inv.workers) sc.workers = *inv.workers;
    if (inv.format) sc.format = *inv.format;
    if (inv.output_path) sc.output_path = inv.output_path;

    try {
        if (sc.replications == 0) throw ConfigError("--reps must be >= 1");
        if (sc.workers == 0) throw ConfigError("--workers must be >= 1");

        Table t;
        if (inv.command == "bound") t = cmd_bound(inv, sc);
        else if (inv.command == "aoi") t = cmd_aoi(sc);
        else if (inv.command == "simulate") t = cmd_simulate(inv, sc);
        else if (inv.command == "sweep") t = cmd_sweep(inv, sc);
        else if (inv.command == "optimize") t = cmd_optimize(inv, sc);
        else throw ConfigError("unknown command '" + inv.command + "'");

        const std::string text = render(t, sc.format, inv.command, sc.sim.seed);
        if (sc.output_path) {
            std::ofstream f(*sc.output_path, std::ios::binary);
            if (!f || !(f << text)) throw ConfigError("cannot write output file '" + *sc.output_path + "'");
        } else {
            out << text;
        }
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const BacklogOverflowError& e) {
        err << "backlog overflow: " << e.what()
            << "\nhint: check the stability condition e^{lambda s} M(1-s) < 1 (run `bound`)\n";
        return kBacklogOverflow;
    } catch (const UnstableError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delay bounds, Age of Information and Monte Carlo checks for a two-user MPR channel"};
    app.name("mprcalc");
    app.require_subcommand(1);

    Invocation inv;
    std::string format;

    app.add_option("--config,-c", inv.config_path, "Scenario file (YAML)")->required();
    app.add_option("--output,-o", inv.output_path, "Write the report here instead of stdout");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", inv.seed, "Base seed");
    app.add_option("--reps", inv.reps, "Simulation replications");
    app.add_option("--workers", inv.workers, "Worker threads for replications");
    app.add_option("--w", inv.w, "Delay targets in slots, e.g. 2,3,5")->delimiter(',');
    app.add_flag("--with-sim", inv.with_sim, "sweep: add empirical columns");
    app.add_option("--trace", inv.trace_path, "simulate: per-slot CSV of the first replication");

    for (const char* name : {"bound", "aoi", "simulate", "sweep", "optimize"}) {
        app.add_subcommand(name)->fallthrough();
    }
    app.get_subcommand("bound")->description("Delay-violation bound per delay target");
    app.get_subcommand("aoi")->description("Closed-form average age and its moments");
    app.get_subcommand("simulate")->description("Slot-level Monte Carlo run");
    app.get_subcommand("sweep")->description("Latency/freshness tradeoff grid");
    app.get_subcommand("optimize")->description("Largest q2 meeting the violation target");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }
    inv.command = app.get_subcommands().front()->get_name();
    if (!format.empty()) inv.format = parse_format(format);
    return run(inv, out, err);
}

}  // namespace mprcalc::cli
