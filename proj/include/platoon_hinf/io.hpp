#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/controller.hpp"
#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/simulation.hpp"
#include "platoon_hinf/synthesis.hpp"
#include "platoon_hinf/weights.hpp"

namespace platoon_hinf {

// One sweep evaluation: the grid point and its verdict.
struct SweepRow {
    double h = 0.0, tau = 0.0, phi = 0.0, theta = 0.0;
    StringStabilityReport report;
};

// All numeric output goes through one 12-significant-digit formatter so
// repeated runs are byte-identical.
inline std::string fmt_sig(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace detail {

// JSON has no non-finite numbers; those become null.
inline std::string json_num(double v) { return std::isfinite(v) ? fmt_sig(v) : "null"; }

inline std::string json_str(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') (out += '\\') += c;
        else if (c == '\n') out += "\\n";
        else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
        } else out += c;
    }
    return out + "\"";
}

inline const char* json_bool(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline void write_controller_json(std::ostream& os, const Controller& k) {
    os << "{\n  \"order\": " << k.order << ",\n  \"ts\": " << fmt_sig(*k.tf.ts)
       << ",\n  \"params\": [";
    for (std::size_t i = 0; i < k.params.size(); ++i)
        os << (i ? ", " : "") << fmt_sig(k.params[i]);
    os << "]\n}\n";
}

inline Controller read_controller_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read controller file '" + path + "'");
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        const int order = j.at("order").get<int>();
        const double ts = j.at("ts").get<double>();
        const auto params = j.at("params").get<std::vector<double>>();
        return controller_from_params(params, order, ts);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("controller file '" + path + "': " + e.what());
    }
}

// "default" or a JSON file {"ws": {"num": [...], "den": [...]}, "wt": ...,
// "wu": ...?} with ascending-power coefficients at the configured rate.
inline WeightSet load_weights(const std::string& spec, double ts) {
    if (spec == "default") return default_weights(ts);
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot read weights file '" + spec + "'");
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        const auto tf = [&](const nlohmann::json& node) {
            return RationalTF::discrete(Polynomial(node.at("num").get<std::vector<double>>()),
                                        Polynomial(node.at("den").get<std::vector<double>>()), ts);
        };
        WeightSet w{tf(j.at("ws")), tf(j.at("wt")), {}};
        if (j.contains("wu")) w.wu = tf(j.at("wu"));
        w.validate();
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("weights file '" + spec + "': " + e.what());
    }
}

inline void write_objectives_json(std::ostream& os, const SynthesisResult& res) {
    using detail::json_bool;
    using detail::json_num;
    const ObjectiveValues& v = res.objectives;
    os << "{\n";
    os << "  \"gamma_s\": " << json_num(v.gamma_s) << ",\n";
    os << "  \"gamma_t\": " << json_num(v.gamma_t) << ",\n";
    os << "  \"gamma_u\": " << (v.gamma_u ? json_num(*v.gamma_u) : "null") << ",\n";
    os << "  \"t_norm\": " << json_num(v.t_norm) << ",\n";
    os << "  \"stable\": " << json_bool(v.stable) << ",\n";
    os << "  \"feasible\": " << json_bool(res.feasible) << ",\n";
    os << "  \"iterations\": " << res.iterations << ",\n";
    os << "  \"restarts_used\": " << res.restarts_used << "\n";
    os << "}\n";
}

inline void write_stringstability_json(std::ostream& os, const StringStabilityReport& rep) {
    using detail::json_bool;
    os << "{\n";
    os << "  \"t_norm\": " << detail::json_num(rep.t_norm) << ",\n";
    os << "  \"argmax_hz\": " << detail::json_num(rep.argmax_hz) << ",\n";
    os << "  \"margin\": " << detail::json_num(rep.margin) << ",\n";
    os << "  \"pass\": " << json_bool(rep.pass) << ",\n";
    os << "  \"zero_controller\": " << json_bool(rep.zero_controller) << "\n";
    os << "}\n";
}

// freq_hz,mag_db,phase_deg rows; phase unwrapped along the grid.
inline void write_freq_csv(std::ostream& os, const FrequencyResponse& fr) {
    std::vector<double> phase(fr.values.size());
    for (std::size_t i = 0; i < fr.values.size(); ++i) phase[i] = std::arg(fr.values[i]);
    unwrap_phase(phase);
    os << "freq_hz,mag_db,phase_deg\n";
    for (std::size_t i = 0; i < fr.values.size(); ++i)
        os << fmt_sig(fr.freqs_hz[i]) << ',' << fmt_sig(mag_db(fr.values[i])) << ','
           << fmt_sig(phase[i] * 180.0 / std::numbers::pi) << '\n';
}

// Pointwise product of two responses on a shared grid (weighted channels).
inline FrequencyResponse product_response(const RationalTF& a, const RationalTF& b,
                                          const std::vector<double>& freqs_hz) {
    const FrequencyResponse fa = freq_response(a, freqs_hz);
    const FrequencyResponse fb = freq_response(b, freqs_hz);
    std::vector<Complex> values(freqs_hz.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = fa.values[i] * fb.values[i];
    return FrequencyResponse(freqs_hz, std::move(values));
}

inline void write_trace_csv(std::ostream& os, const PlatoonTrace& tr) {
    os << "t,vehicle,p,v,a,jerk,u,e,d,timegap\n";
    for (std::size_t n = 0; n < tr.t.size(); ++n)
        for (std::size_t i = 0; i < tr.vehicles.size(); ++i) {
            const VehicleSeries& s = tr.vehicles[i];
            os << fmt_sig(tr.t[n]) << ',' << i << ',' << fmt_sig(s.p[n]) << ',' << fmt_sig(s.v[n])
               << ',' << fmt_sig(s.a[n]) << ',' << fmt_sig(s.jerk[n]) << ',' << fmt_sig(s.u[n])
               << ',' << fmt_sig(s.e[n]) << ',' << fmt_sig(s.d[n]) << ','
               << fmt_sig(s.timegap[n]) << '\n';
        }
}

inline void write_metrics_json(std::ostream& os, const MetricsReport& rep,
                               const std::vector<std::string>& notes) {
    using detail::json_bool;
    using detail::json_num;
    os << "{\n";
    os << "  \"string_stable\": " << json_bool(rep.string_stable) << ",\n";
    os << "  \"vacuous\": " << json_bool(rep.vacuous) << ",\n";
    os << "  \"note\": " << detail::json_str(rep.note) << ",\n";
    os << "  \"run_notes\": [";
    for (std::size_t i = 0; i < notes.size(); ++i)
        os << (i ? ", " : "") << detail::json_str(notes[i]);
    os << "],\n  \"vehicles\": [\n";
    for (std::size_t i = 0; i < rep.vehicles.size(); ++i) {
        const VehicleMetrics& m = rep.vehicles[i];
        os << "    {\"vehicle\": " << i << ", \"max_abs_e\": " << json_num(m.max_abs_e)
           << ", \"max_abs_a\": " << json_num(m.max_abs_a)
           << ", \"max_abs_jerk\": " << json_num(m.max_abs_jerk)
           << ", \"min_gap\": " << json_num(m.min_gap)
           << ", \"min_timegap\": " << json_num(m.min_timegap)
           << ", \"overshoot\": " << json_num(m.overshoot)
           << ", \"overshoot_ok\": " << json_bool(m.overshoot_ok) << "}"
           << (i + 1 < rep.vehicles.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "h,tau,phi,theta,t_norm,argmax_hz,margin,pass\n";
    for (const SweepRow& r : rows)
        os << fmt_sig(r.h) << ',' << fmt_sig(r.tau) << ',' << fmt_sig(r.phi) << ','
           << fmt_sig(r.theta) << ',' << fmt_sig(r.report.t_norm) << ','
           << fmt_sig(r.report.argmax_hz) << ',' << fmt_sig(r.report.margin) << ','
           << (r.report.pass ? 1 : 0) << '\n';
}

// Per-row |T| samples from the sweep, keyed by row index in grid order.
inline void write_sweep_traces_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "row,freq_hz,mag_db,phase_deg\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const FrequencyResponse& fr = rows[r].report.trace;
        std::vector<double> phase(fr.values.size());
        for (std::size_t i = 0; i < fr.values.size(); ++i) phase[i] = std::arg(fr.values[i]);
        unwrap_phase(phase);
        for (std::size_t i = 0; i < fr.values.size(); ++i)
            os << r << ',' << fmt_sig(fr.freqs_hz[i]) << ',' << fmt_sig(mag_db(fr.values[i]))
               << ',' << fmt_sig(phase[i] * 180.0 / std::numbers::pi) << '\n';
    }
}

}  // namespace platoon_hinf
