// Command-line front end: synthesis, certification, simulation and
// parameter sweeps over one config-file format.
//
// Exit codes: 0 success; 2 run completed but the result is infeasible or
// string-unstable; 3 configuration or input error; 4 simulation divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platoon_hinf/config.hpp"
#include "platoon_hinf/io.hpp"

namespace fs = std::filesystem;
using namespace platoon_hinf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDivergence = 4;

template <typename Fn>
void write_file(const fs::path& dir, const std::string& name, Fn&& fn) {
    const fs::path p = dir / name;
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    fn(os);
    if (!os) throw ConfigError("write to '" + p.string() + "' failed");
}

std::vector<double> response_grid(double ts) {
    return log_spaced_grid(detail::kGridLowHz, 0.999 * (0.5 / ts), 200);
}

int run_synth(const RunConfig& rc, const fs::path& out) {
    const WeightSet w = load_weights(rc.weights, rc.platoon.ts);
    SynthesisResult res;
    bool aborted = false;
    try {
        res = rc.objective == "traditional" ? synthesize_traditional(rc.platoon, w, rc.synth)
                                            : synthesize_multiobj(rc.platoon, w, rc.synth);
    } catch (const SynthesisFailure& e) {
        std::cerr << "warning: " << e.what() << "; writing the best effort found\n";
        res = e.best_effort;
        aborted = true;
    }
    write_file(out, "controller.json", [&](std::ostream& os) { write_controller_json(os, res.controller); });
    write_file(out, "objectives.json", [&](std::ostream& os) { write_objectives_json(os, res); });

    // Response plots always show the loops the controller actually closes.
    const ClosedLoops cl = closed_loops(rc.platoon, res.controller.tf);
    const std::vector<double> grid = response_grid(rc.platoon.ts);
    write_file(out, "s_response.csv",
               [&](std::ostream& os) { write_freq_csv(os, freq_response(cl.s, grid)); });
    write_file(out, "t_response.csv",
               [&](std::ostream& os) { write_freq_csv(os, freq_response(cl.t, grid)); });
    write_file(out, "ws_s_response.csv",
               [&](std::ostream& os) { write_freq_csv(os, product_response(w.ws, cl.s, grid)); });
    write_file(out, "wt_t_response.csv",
               [&](std::ostream& os) { write_freq_csv(os, product_response(w.wt, cl.t, grid)); });

    if (!res.feasible || aborted) {
        std::cerr << "synthesis completed without a feasible design\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int run_verify(const RunConfig& rc, const Controller& k, const fs::path& out) {
    const StringStabilityReport rep = verify_string_stability(rc.platoon, k.tf);
    if (rep.zero_controller)
        std::cerr << "warning: controller is identically zero, the certificate is vacuous\n";
    write_file(out, "stringstability.json",
               [&](std::ostream& os) { write_stringstability_json(os, rep); });
    write_file(out, "t_trace.csv", [&](std::ostream& os) { write_freq_csv(os, rep.trace); });
    return rep.pass ? kExitOk : kExitInfeasible;
}

int run_simulate(const RunConfig& rc, const Controller& k, const fs::path& out) {
    try {
        const PlatoonTrace tr = simulate(rc.platoon, k, rc.scenario);
        const MetricsReport rep = trace_metrics(tr);
        write_file(out, "trace.csv", [&](std::ostream& os) { write_trace_csv(os, tr); });
        write_file(out, "metrics.json",
                   [&](std::ostream& os) { write_metrics_json(os, rep, tr.notes); });
        return kExitOk;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_file(out, "trace.csv", [&](std::ostream& os) { write_trace_csv(os, e.partial); });
        MetricsReport rep;
        if (!e.partial.t.empty()) rep = trace_metrics(e.partial);
        else rep.note = "no samples recorded before divergence";
        std::vector<std::string> notes = e.partial.notes;
        notes.push_back("diverged: vehicle " + std::to_string(e.vehicle) + " at t = " +
                        fmt_sig(e.t_s) + " s");
        write_file(out, "metrics.json",
                   [&](std::ostream& os) { write_metrics_json(os, rep, notes); });
        return kExitDivergence;
    }
}

int run_sweep(const RunConfig& rc, const Controller& k, const fs::path& out) {
    const auto axis = [](const std::vector<double>& xs, double fallback) {
        return xs.empty() ? std::vector<double>{fallback} : xs;
    };
    const std::vector<double> hs = axis(rc.sweep.h, rc.platoon.policy.h);
    const std::vector<double> taus = axis(rc.sweep.tau, rc.platoon.vehicle.tau);
    const std::vector<double> phis = axis(rc.sweep.phi, rc.platoon.vehicle.phi);
    const std::vector<double> thetas = axis(rc.sweep.theta, rc.platoon.link.theta);

    std::vector<SweepRow> rows;
    rows.reserve(hs.size() * taus.size() * phis.size() * thetas.size());
    for (double h : hs)
        for (double tau : taus)
            for (double phi : phis)
                for (double theta : thetas) {
                    PlatoonConfig c = rc.platoon;
                    c.policy.h = h;
                    c.vehicle.tau = tau;
                    c.vehicle.phi = phi;
                    c.link.theta = theta;
                    rows.push_back({h, tau, phi, theta, verify_string_stability(c, k.tf)});
                }
    write_file(out, "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
    write_file(out, "sweep_traces.csv",
               [&](std::ostream& os) { write_sweep_traces_csv(os, rows); });
    return kExitOk;
}

constexpr const char* kConfigHelp = R"(Config file: one `key = value` per line, `#` or `;` comment lines.

Platoon keys:
  mode         acc | cacc (default acc)
  h            spacing-policy time gap, s
  d0           spacing-policy standstill distance, m
  tau          driveline lag, s
  phi          actuation dead time, s
  theta        communication delay, s (cacc only)
  m            follower count behind the leader
  ts           sampling period, s
  pade_order   dead-time rational approximation order

Synthesis keys (synth):
  objective    multiobj | traditional (default multiobj)
  weights      'default' or a JSON file {"ws":{"num":[...],"den":[...]},"wt":...,"wu":...}
               with ascending-power coefficients sampled at ts
  order        controller order
  restarts     extra randomized starts
  max_iters    iteration cap per start
  seed         RNG seed (the --seed flag overrides it)
  penalty0     initial constraint penalty

Scenario keys (simulate):
  duration     run length, s
  profile      mixed | sine | zero
  scale        gain on the leader profile
  sine_freq_hz, sine_amp
  v0           initial speed, m/s
  surplus      extra initial spacing per follower, m
  vehicle_length
  plant        physical | design
  interpolate_comm_delay   true | false

Sweep keys (sweep):
  sweep_h, sweep_tau, sweep_phi, sweep_theta
               comma-separated values; an omitted axis holds the configured
               value. Rows iterate h outermost, then tau, phi, theta innermost.

Exit codes: 0 success; 2 completed but infeasible or string-unstable;
3 configuration or input error; 4 simulation divergence.)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"H-infinity loop design and string-stability tooling for vehicle platoons"};
    app.require_subcommand(1);
    app.footer(kConfigHelp);

    std::string config_path;
    std::string controller_path;
    std::string out_dir = ".";
    long long seed = 0;

    const auto add_common = [&](CLI::App* sub, bool needs_controller) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        if (needs_controller)
            sub->add_option("--controller", controller_path, "controller JSON file")->required();
        sub->add_option("--out", out_dir, "output directory, created if missing (default .)");
        sub->add_option("--seed", seed, "override the configured synthesis seed");
    };

    CLI::App* synth = app.add_subcommand("synth", "design a controller for the configured platoon");
    add_common(synth, false);
    CLI::App* verify =
        app.add_subcommand("verify", "certify string stability of an existing controller");
    add_common(verify, true);
    CLI::App* simulate =
        app.add_subcommand("simulate", "run the configured scenario and record the trace");
    add_common(simulate, true);
    CLI::App* sweep =
        app.add_subcommand("sweep", "re-certify one controller across a parameter grid");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig rc = load_run_config(config_path);
        const CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed")) rc.synth.seed = static_cast<std::uint64_t>(seed);

        const fs::path out(out_dir);
        fs::create_directories(out);

        if (synth->parsed()) return run_synth(rc, out);
        const Controller k = read_controller_json(controller_path);
        if (verify->parsed()) return run_verify(rc, k, out);
        if (simulate->parsed()) return run_simulate(rc, k, out);
        return run_sweep(rc, k, out);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
