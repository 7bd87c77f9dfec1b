#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mprcalc::cli {

namespace {

const std::vector<std::string> kKeys = {
    "p1_watts",
    "p2_watts",
    "r1_meters",
    "r2_meters",
    "path_loss_exponent",
    "noise_variance_watts",
    "gamma1_linear",
    "rate_r_nats_per_slot",
    "gamma2_linear",
    "arrival_burst_rho_nats",
    "arrival_rate_lambda_nats_per_slot",
    "sampling_probability_q2",
    "delay_targets_slots",
    "q2_values",
    "p1_values_watts",
    "target_violation_probability",
    "service_model",
    "horizon_slots",
    "warmup_slots",
    "seed",
    "replications",
    "workers",
    "interference_mode",
    "backlog_ceiling_nats",
    "output_format",
    "output_path",
};

template <class T>
T scalar(const YAML::Node& root, const std::string& key) {
    const YAML::Node node = root[key];
    if (!node.IsScalar()) throw ConfigError("config key '" + key + "' must be a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config key '" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
}

template <class T>
std::optional<T> optional_scalar(const YAML::Node& root, const std::string& key) {
    if (!root[key]) return std::nullopt;
    return scalar<T>(root, key);
}

double required_double(const YAML::Node& root, const std::string& key) {
    if (!root[key]) throw ConfigError("missing required config key '" + key + "'");
    return scalar<double>(root, key);
}

template <class T>
std::vector<T> list(const YAML::Node& root, const std::string& key) {
    const YAML::Node node = root[key];
    if (!node.IsSequence()) throw ConfigError("config key '" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : node) {
        if (!item.IsScalar()) throw ConfigError("config key '" + key + "' must be a flat list");
        try {
            out.push_back(item.as<T>());
        } catch (const YAML::Exception&) {
            throw ConfigError("config key '" + key + "' has an invalid entry '" + item.Scalar() + "'");
        }
    }
    return out;
}

}  // namespace

const std::vector<std::string>& known_keys() { return kKeys; }

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("unknown output format '" + name + "' (expected csv or json)");
}

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config must be a flat key: value mapping");
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
            throw ConfigError("unknown config key '" + key + "'");
    }

    Scenario sc;
    ChannelParams& ch = sc.sim.channel;
    ch.p1 = required_double(root, "p1_watts");
    ch.p2 = required_double(root, "p2_watts");
    ch.r1 = required_double(root, "r1_meters");
    ch.r2 = required_double(root, "r2_meters");
    ch.theta = required_double(root, "path_loss_exponent");
    ch.sigma2 = required_double(root, "noise_variance_watts");
    ch.gamma2 = required_double(root, "gamma2_linear");

    const auto gamma1 = optional_scalar<double>(root, "gamma1_linear");
    const auto rate = optional_scalar<double>(root, "rate_r_nats_per_slot");
    if (gamma1 && rate) throw ConfigError("set only one of 'gamma1_linear' and 'rate_r_nats_per_slot'");
    if (!gamma1 && !rate) throw ConfigError("missing required config key 'gamma1_linear' (or 'rate_r_nats_per_slot')");
    ch.gamma1 = gamma1 ? *gamma1 : threshold_for_rate(*rate);

    try {
        ch.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    sc.sim.arrivals.rho = optional_scalar<double>(root, "arrival_burst_rho_nats").value_or(0.0);
    sc.sim.arrivals.lambda = optional_scalar<double>(root, "arrival_rate_lambda_nats_per_slot").value_or(0.0);
    try {
        sc.sim.arrivals.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (const auto q2 = optional_scalar<double>(root, "sampling_probability_q2")) {
        if (!(*q2 >= 0.0 && *q2 <= 1.0)) throw ConfigError("config key 'sampling_probability_q2' must lie in [0, 1]");
        sc.sim.q2 = *q2;
        sc.q2_given = true;
    }
    if (root["delay_targets_slots"]) {
        sc.delay_targets = list<std::int64_t>(root, "delay_targets_slots");
        for (auto w : sc.delay_targets)
            if (w < 0) throw ConfigError("config key 'delay_targets_slots' entries must be >= 0");
    }
    if (root["q2_values"]) {
        sc.q2_values = list<double>(root, "q2_values");
        for (double q : sc.q2_values)
            if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("config key 'q2_values' entries must lie in [0, 1]");
    }
    if (root["p1_values_watts"]) {
        sc.p1_values = list<double>(root, "p1_values_watts");
        for (double p : sc.p1_values)
            if (!(p > 0.0)) throw ConfigError("config key 'p1_values_watts' entries must be > 0");
    } else {
        sc.p1_values = {ch.p1};
    }
    if (const auto eps = optional_scalar<double>(root, "target_violation_probability")) {
        if (!(*eps > 0.0 && *eps < 1.0))
            throw ConfigError("config key 'target_violation_probability' must lie in (0, 1)");
        sc.target_violation = *eps;
    }
    if (const auto svc = optional_scalar<std::string>(root, "service_model")) {
        if (*svc == "on_off") sc.service = ServiceKind::on_off;
        else if (*svc == "rate_adapt") sc.service = ServiceKind::rate_adapt;
        else throw ConfigError("config key 'service_model' must be on_off or rate_adapt");
    }

    if (const auto h = optional_scalar<std::uint64_t>(root, "horizon_slots")) sc.sim.horizon = *h;
    if (const auto w = optional_scalar<std::uint64_t>(root, "warmup_slots")) sc.sim.warmup = *w;
    if (sc.sim.horizon == 0) throw ConfigError("config key 'horizon_slots' must be > 0");
    if (sc.sim.effective_warmup() >= sc.sim.horizon)
        throw ConfigError("config key 'warmup_slots' must be smaller than 'horizon_slots'");
    if (const auto s = optional_scalar<std::uint64_t>(root, "seed")) sc.sim.seed = *s;
    if (const auto r = optional_scalar<std::size_t>(root, "replications")) sc.replications = *r;
    if (const auto w = optional_scalar<std::size_t>(root, "workers")) sc.workers = *w;
    if (sc.replications == 0) throw ConfigError("config key 'replications' must be >= 1");
    if (sc.workers == 0) throw ConfigError("config key 'workers' must be >= 1");
    if (const auto mode = optional_scalar<std::string>(root, "interference_mode")) {
        if (*mode == "persistent") sc.sim.interference = InterferenceMode::persistent;
        else if (*mode == "queue_aware") sc.sim.interference = InterferenceMode::queue_aware;
        else throw ConfigError("config key 'interference_mode' must be persistent or queue_aware");
    }
    if (const auto ceiling = optional_scalar<double>(root, "backlog_ceiling_nats")) {
        if (!(*ceiling > 0.0)) throw ConfigError("config key 'backlog_ceiling_nats' must be > 0");
        sc.sim.backlog_ceiling = *ceiling;
    }
    if (const auto fmt = optional_scalar<std::string>(root, "output_format")) sc.format = parse_format(*fmt);
    if (const auto path = optional_scalar<std::string>(root, "output_path")) sc.output_path = *path;
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace mprcalc::cli
