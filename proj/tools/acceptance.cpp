// Acceptance gate. Runs the eight end-to-end checks the project promises,
// prints one PASS/FAIL line per criterion with the measured quantities,
// and exits with the number of failed criteria. Every tolerance is pinned
// here, next to the check that uses it.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/controller.hpp"
#include "platoon_hinf/platoon.hpp"
#include "platoon_hinf/simulation.hpp"
#include "platoon_hinf/synthesis.hpp"
#include "platoon_hinf/weights.hpp"

#include "test_helpers.hpp"

namespace {

using namespace platoon_hinf;
using Clock = std::chrono::steady_clock;

constexpr double kTNormSlack = 1e-6;     // feasibility slack on the hard constraint
constexpr double kSynthBudgetS = 300.0;  // wall clock per synthesis run
constexpr int kRestartBudget = 10;
constexpr double kAccBandLoHz = 0.1, kAccBandHiHz = 0.6;    // S crossover bands
constexpr double kCaccBandLoHz = 0.4, kCaccBandHiHz = 1.5;
constexpr double kBruteRelTol = 1e-3;    // norm vs exhaustive scan
constexpr double kExactTol = 1e-9;       // closed-form oracles
constexpr double kOracleBudgetS = 120.0;
constexpr double kAmpRatioRelTol = 0.05;  // time-domain vs frequency-domain gain

template <typename... A>
std::string strf(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, a...);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Gate {
    int failures = 0;
    void line(int n, bool ok, const std::string& detail) {
        std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

struct DesignRun {
    SynthesisResult result;
    double seconds = 0.0;
    bool aborted = false;
};

DesignRun design(const PlatoonConfig& cfg, const WeightSet& w, bool traditional) {
    DesignRun run;
    const auto t0 = Clock::now();
    try {
        run.result = traditional ? synthesize_traditional(cfg, w, SynthOptions{})
                                 : synthesize_multiobj(cfg, w, SynthOptions{});
    } catch (const SynthesisFailure& e) {
        run.result = e.best_effort;
        run.aborted = true;
    }
    run.seconds = seconds_since(t0);
    return run;
}

std::string objective_detail(const DesignRun& run) {
    const ObjectiveValues& v = run.result.objectives;
    return strf("t_norm=%.12g gamma_s=%.4g gamma_t=%.4g restarts=%d %.1fs%s", v.t_norm, v.gamma_s,
                v.gamma_t, run.result.restarts_used, run.seconds,
                run.aborted ? " (search aborted)" : "");
}

bool feasibility_criterion(const DesignRun& run) {
    const ObjectiveValues& v = run.result.objectives;
    return !run.aborted && run.result.feasible && v.stable && v.t_norm <= 1.0 + kTNormSlack &&
           v.gamma_s < 1.0 && v.gamma_t < 1.0 && run.result.restarts_used <= kRestartBudget &&
           run.seconds <= kSynthBudgetS;
}

// Steady-state amplitude of one recorded series at frequency f_hz, by
// complex correlation over the final `window` samples (mean removed).
double tone_amplitude(const PlatoonTrace& tr, std::size_t vehicle, double f_hz,
                      std::size_t window) {
    const std::vector<double>& v = tr.vehicles[vehicle].v;
    const std::size_t n0 = v.size() - window;
    double mean = 0.0;
    for (std::size_t n = n0; n < v.size(); ++n) mean += v[n];
    mean /= static_cast<double>(window);
    std::complex<double> corr(0.0, 0.0);
    const double w = 2.0 * std::numbers::pi * f_hz;
    for (std::size_t n = n0; n < v.size(); ++n)
        corr += (v[n] - mean) * std::polar(1.0, -w * tr.t[n]);
    return 2.0 * std::abs(corr) / static_cast<double>(window);
}

}  // namespace

int main() {
    Gate gate;

    PlatoonConfig acc_cfg;  // h=1, tau=0.1, phi=0.2, ts=0.1, 4th-order Pade
    PlatoonConfig cacc_cfg = acc_cfg;
    cacc_cfg.mode = Mode::cacc;
    cacc_cfg.policy.h = 0.5;
    cacc_cfg.link.theta = 0.15;
    const WeightSet w = default_weights(acc_cfg.ts);

    // 1: the relaxed-policy design problem is feasible at a 1 s time gap.
    const DesignRun acc = design(acc_cfg, w, false);
    gate.line(1, feasibility_criterion(acc), "acc multiobj " + objective_detail(acc));

    // 2: cooperation halves the feasible time gap (0.5 s with a 0.15 s link).
    const DesignRun cacc = design(cacc_cfg, w, false);
    gate.line(2, feasibility_criterion(cacc), "cacc multiobj " + objective_detail(cacc));

    // 3: the max-of-channels design stabilizes but cannot certify |T| <= 1.
    const DesignRun trad = design(acc_cfg, w, true);
    const bool ok3 =
        !trad.aborted && trad.result.objectives.stable && trad.result.objectives.t_norm > 1.0;
    gate.line(3, ok3, "acc traditional " + objective_detail(trad));

    // 4: sensitivity 0 dB crossovers sit in the expected bands, cooperative
    // strictly above radar-only.
    const auto xo_acc = unity_crossover_hz(closed_loops(acc_cfg, acc.result.controller.tf).s);
    const auto xo_cacc = unity_crossover_hz(closed_loops(cacc_cfg, cacc.result.controller.tf).s);
    const bool ok4 = xo_acc && xo_cacc && *xo_acc >= kAccBandLoHz && *xo_acc <= kAccBandHiHz &&
                     *xo_cacc >= kCaccBandLoHz && *xo_cacc <= kCaccBandHiHz && *xo_cacc > *xo_acc;
    gate.line(4, ok4,
              strf("S crossover acc=%.4g Hz (band [%.1f, %.1f]), cacc=%.4g Hz (band [%.1f, %.1f])",
                   xo_acc ? *xo_acc : std::nan(""), kAccBandLoHz, kAccBandHiHz,
                   xo_cacc ? *xo_cacc : std::nan(""), kCaccBandLoHz, kCaccBandHiHz));

    // 5: the mixed maneuver shrinks follower-to-follower spacing errors and
    // keeps velocity overshoot under 1 percent for both feasible designs.
    {
        bool ok5 = true;
        std::string detail;
        for (const auto& [name, cfg, run] :
             {std::tuple{"acc", &acc_cfg, &acc}, std::tuple{"cacc", &cacc_cfg, &cacc}}) {
            ScenarioSpec sc;
            sc.plant = PlantModel::design;
            const PlatoonTrace tr = simulate(*cfg, run->result.controller, sc);
            const MetricsReport m = trace_metrics(tr);
            bool overshoot_ok = true;
            double worst_overshoot = 0.0;
            for (const VehicleMetrics& vm : m.vehicles) {
                overshoot_ok = overshoot_ok && vm.overshoot_ok;
                worst_overshoot = std::max(worst_overshoot, vm.overshoot);
            }
            const bool leg = m.string_stable && !m.vacuous && overshoot_ok;
            ok5 = ok5 && leg;
            detail += strf("%s%s: decreasing=%d overshoot=%.2g", detail.empty() ? "" : "; ", name,
                           m.string_stable ? 1 : 0, worst_overshoot);
        }
        gate.line(5, ok5, detail);
    }

    // 6: re-certification across plant and policy perturbations follows the
    // expected directional pattern around each design point.
    {
        struct Leg {
            const char* label;
            PlatoonConfig cfg;
            const RationalTF* k;
            bool expect_pass;
        };
        std::vector<Leg> legs;
        const auto with = [](PlatoonConfig c, auto mut) { mut(c); return c; };
        legs.push_back({"acc h=1.2", with(acc_cfg, [](auto& c) { c.policy.h = 1.2; }),
                        &acc.result.controller.tf, true});
        legs.push_back({"acc h=0.8", with(acc_cfg, [](auto& c) { c.policy.h = 0.8; }),
                        &acc.result.controller.tf, false});
        legs.push_back({"acc phi=0.3", with(acc_cfg, [](auto& c) { c.vehicle.phi = 0.3; }),
                        &acc.result.controller.tf, false});
        legs.push_back({"cacc h=0.6", with(cacc_cfg, [](auto& c) { c.policy.h = 0.6; }),
                        &cacc.result.controller.tf, true});
        legs.push_back({"cacc h=0.4", with(cacc_cfg, [](auto& c) { c.policy.h = 0.4; }),
                        &cacc.result.controller.tf, false});
        bool ok6 = true;
        std::string detail;
        for (const Leg& leg : legs) {
            const StringStabilityReport rep = verify_string_stability(leg.cfg, *leg.k);
            const bool match = rep.pass == leg.expect_pass;
            ok6 = ok6 && match;
            detail += strf("%s%s: %s (want %s, margin=%.2g)", detail.empty() ? "" : "; ",
                           leg.label, rep.pass ? "pass" : "fail", leg.expect_pass ? "pass" : "fail",
                           rep.margin);
        }
        gate.line(6, ok6, detail);
    }

    // 7: numerical-core oracles, all timed together.
    {
        const auto t7 = Clock::now();
        test_helpers::Rng rng(7);

        // Norm vs exhaustive million-point scan on random stable systems.
        double worst_brute = 0.0;
        const auto brute_force = [](const RationalTF& sys) {
            const double f_hi = sys.is_discrete() ? sys.nyquist_hz() : 1e3 / (2.0 * std::numbers::pi);
            const int points = 1000000;
            double best = 0.0;
            for (int i = 0; i <= points; ++i) {
                const double f = f_hi * i / points;
                const double m = test_helpers::reference_magnitude(sys, f == 0.0 ? 1e-12 : f);
                best = std::max(best, m);
            }
            return best;
        };
        for (int trial = 0; trial < 20; ++trial) {
            const RationalTF sys = trial < 10 ? test_helpers::random_stable_continuous(rng, 8)
                                              : test_helpers::random_stable_discrete(rng, 8, 0.1);
            const double expected = brute_force(sys);
            worst_brute = std::max(worst_brute, std::abs(hinf_norm(sys) - expected) / expected);
        }

        // Held-input stepping vs the closed-form lag response from rest.
        double worst_zoh = 0.0;
        for (const auto& [u, tau, ts] :
             {std::tuple{1.2, 0.5, 0.1}, std::tuple{-0.7, 0.05, 0.02}, std::tuple{2.0, 1.0, 0.25}}) {
            VehicleParams prm;
            prm.tau = tau;
            VehicleState x;
            for (int n = 1; n <= 100; ++n) {
                x = step_vehicle(x, u, prm, ts);
                const double t = n * ts;
                const double decay = 1.0 - std::exp(-t / tau);
                worst_zoh = std::max(worst_zoh, std::abs(x.a - u * decay));
                worst_zoh = std::max(worst_zoh, std::abs(x.v - (u * t - u * tau * decay)));
                worst_zoh = std::max(
                    worst_zoh, std::abs(x.p - (0.5 * u * t * t - u * tau * t + u * tau * tau * decay)));
            }
        }

        // Delay approximants keep unit magnitude on the imaginary axis.
        double worst_pade = 0.0;
        for (int order : {1, 2, 4, 6})
            for (double theta : {0.15, 0.2})
                for (int i = 0; i < 100; ++i) {
                    const double f = rng.log_uniform(1e-3, 10.0);
                    worst_pade = std::max(
                        worst_pade, std::abs(std::abs(eval_at(pade(theta, order), f)) - 1.0));
                }

        // The closed-loop pair obeys S + T*H = 1 at any frequency.
        double worst_ident = 0.0;
        for (const auto& [cfg, run] :
             {std::pair{&acc_cfg, &acc}, std::pair{&cacc_cfg, &cacc}}) {
            const ClosedLoops cl = closed_loops(*cfg, run->result.controller.tf);
            const RationalTF hz = discretize_blocks(*cfg).h;
            for (int i = 0; i < 100; ++i) {
                const double f = rng.log_uniform(1e-3, 0.99 * cl.s.nyquist_hz());
                const Complex lhs = eval_at(cl.s, f) + eval_at(cl.t, f) * eval_at(hz, f);
                worst_ident = std::max(worst_ident, std::abs(lhs - 1.0));
            }
        }

        const double secs = seconds_since(t7);
        const bool ok7 = worst_brute <= kBruteRelTol && worst_zoh <= kExactTol &&
                         worst_pade <= kExactTol && worst_ident <= kExactTol &&
                         secs < kOracleBudgetS;
        gate.line(7, ok7,
                  strf("oracles: brute_rel=%.2g zoh=%.2g allpass=%.2g identity=%.2g %.1fs",
                       worst_brute, worst_zoh, worst_pade, worst_ident, secs));
    }

    // 8: driving the string-unstable loop at its own resonance reproduces
    // |T| as a follower-to-follower velocity amplitude ratio.
    {
        const StringStabilityReport rep = verify_string_stability(acc_cfg, trad.result.controller.tf);
        PlatoonConfig c2 = acc_cfg;
        c2.m = 2;
        ScenarioSpec sc;
        sc.profile = LeadProfile::sine;
        sc.sine_freq_hz = rep.argmax_hz;
        sc.scale = 0.01;
        sc.duration = 50000.0;  // the resonance is razor sharp; the transient
                                // needs this long to decay below the tolerance
        sc.plant = PlantModel::design;
        const PlatoonTrace tr = simulate(c2, trad.result.controller, sc);
        const std::size_t window = 20001;  // final 2000 s
        const double a1 = tone_amplitude(tr, 1, rep.argmax_hz, window);
        const double a2 = tone_amplitude(tr, 2, rep.argmax_hz, window);
        const double ratio = a2 / a1;
        const double rel = std::abs(ratio - rep.t_norm) / rep.t_norm;
        gate.line(8, rel <= kAmpRatioRelTol,
                  strf("amplitude ratio %.6g vs |T(f*)|=%.6g at f*=%.6g Hz (rel err %.2g)", ratio,
                       rep.t_norm, rep.argmax_hz, rel));
    }

    if (gate.failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criteria failed\n", gate.failures);
    return gate.failures;
}
