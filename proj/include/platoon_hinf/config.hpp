#pragma once

#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/platoon.hpp"
#include "platoon_hinf/simulation.hpp"
#include "platoon_hinf/synthesis.hpp"

namespace platoon_hinf {

// Parameter grid for the sweep workflow. An empty list means "hold the
// configured value", so an untouched spec is a single-point grid.
struct SweepSpec {
    std::vector<double> h, tau, phi, theta;
};

// Everything one tool invocation needs, parsed from a flat key=value file.
struct RunConfig {
    PlatoonConfig platoon;
    SynthOptions synth;
    ScenarioSpec scenario;
    SweepSpec sweep;
    std::string weights = "default";    // "default" or a weight-set JSON path
    std::string objective = "multiobj";  // or "traditional"
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& v) {
    try {
        std::size_t idx = 0;
        const double x = std::stod(v, &idx);
        if (idx != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    }
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t idx = 0;
        const long long x = std::stoll(v, &idx);
        if (idx != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
    }
}

inline bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not true/false");
}

inline std::vector<double> parse_number_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("config key '" + key + "': empty list entry");
        out.push_back(parse_number(key, item));
    }
    return out;
}

}  // namespace detail

// Flat key=value text: one assignment per line, full-line comments with '#'
// or ';', no sections. Unknown and repeated keys are rejected so a config
// never silently drifts from what it says.
inline RunConfig parse_run_config(std::istream& in) {
    using detail::parse_flag;
    using detail::parse_integer;
    using detail::parse_number;
    using detail::parse_number_list;
    using detail::trim;

    RunConfig rc;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(text.substr(0, eq));
        const std::string val = trim(text.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("config key '" + key + "' is set twice");

        if (key == "mode") rc.platoon.mode = mode_from_string(val);
        else if (key == "tau") rc.platoon.vehicle.tau = parse_number(key, val);
        else if (key == "phi") rc.platoon.vehicle.phi = parse_number(key, val);
        else if (key == "theta") rc.platoon.link.theta = parse_number(key, val);
        else if (key == "h") rc.platoon.policy.h = parse_number(key, val);
        else if (key == "d0") rc.platoon.policy.d0 = parse_number(key, val);
        else if (key == "m") rc.platoon.m = static_cast<int>(parse_integer(key, val));
        else if (key == "ts") rc.platoon.ts = parse_number(key, val);
        else if (key == "pade_order") rc.platoon.pade_order = static_cast<int>(parse_integer(key, val));
        else if (key == "objective") {
            if (val != "multiobj" && val != "traditional")
                throw ConfigError("config key 'objective': expected multiobj or traditional");
            rc.objective = val;
        } else if (key == "weights") rc.weights = val;
        else if (key == "order") rc.synth.order = static_cast<int>(parse_integer(key, val));
        else if (key == "restarts") rc.synth.restarts = static_cast<int>(parse_integer(key, val));
        else if (key == "max_iters") rc.synth.max_iters = static_cast<int>(parse_integer(key, val));
        else if (key == "seed") rc.synth.seed = static_cast<std::uint64_t>(parse_integer(key, val));
        else if (key == "penalty0") rc.synth.penalty0 = parse_number(key, val);
        else if (key == "duration") rc.scenario.duration = parse_number(key, val);
        else if (key == "profile") rc.scenario.profile = lead_profile_from_string(val);
        else if (key == "scale") rc.scenario.scale = parse_number(key, val);
        else if (key == "sine_freq_hz") rc.scenario.sine_freq_hz = parse_number(key, val);
        else if (key == "sine_amp") rc.scenario.sine_amp = parse_number(key, val);
        else if (key == "v0") rc.scenario.v0 = parse_number(key, val);
        else if (key == "surplus") rc.scenario.surplus = parse_number(key, val);
        else if (key == "vehicle_length") rc.scenario.vehicle_length = parse_number(key, val);
        else if (key == "plant") rc.scenario.plant = plant_model_from_string(val);
        else if (key == "interpolate_comm_delay")
            rc.scenario.interpolate_comm_delay = parse_flag(key, val);
        else if (key == "sweep_h") rc.sweep.h = parse_number_list(key, val);
        else if (key == "sweep_tau") rc.sweep.tau = parse_number_list(key, val);
        else if (key == "sweep_phi") rc.sweep.phi = parse_number_list(key, val);
        else if (key == "sweep_theta") rc.sweep.theta = parse_number_list(key, val);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    rc.platoon.validate();
    rc.scenario.validate();
    rc.synth.validate();
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_run_config(in);
}

}  // namespace platoon_hinf
