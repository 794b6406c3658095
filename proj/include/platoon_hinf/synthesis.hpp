#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/controller.hpp"
#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/nelder_mead.hpp"
#include "platoon_hinf/platoon.hpp"
#include "platoon_hinf/weights.hpp"

namespace platoon_hinf {

struct ObjectiveValues {
    double gamma_s = 0.0;  // peak of |W_S * S|
    double gamma_t = 0.0;  // peak of |W_T * T|
    std::optional<double> gamma_u;
    double t_norm = 0.0;  // peak of |T|, the string-stability certificate
    bool stable = false;
};

struct SynthOptions {
    int order = 5;
    int restarts = 8;
    int max_iters = 400;  // simplex steps per restart
    std::uint64_t seed = 1;
    double penalty0 = 100.0;
    // optional warm start used by restart 0 in place of its scheduled init
    std::optional<std::vector<double>> init_params;

    void validate() const {
        require_controller_order(order);
        if (restarts < 1) throw ConfigError("restarts must be >= 1");
        if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
        if (!(penalty0 > 0.0)) throw ConfigError("penalty0 must be > 0");
    }
};

struct SynthesisResult {
    Controller controller;
    ObjectiveValues objectives;
    bool feasible = false;  // gamma_s < 1 and gamma_t < 1 and t_norm <= 1
    int iterations = 0;     // simplex steps summed over restarts and polish runs
    int restarts_used = 0;
};

// No restart produced a stabilizing controller; the best attempt rides along.
struct SynthesisFailure : std::runtime_error {
    SynthesisFailure(const std::string& msg, SynthesisResult best)
        : std::runtime_error(msg), best_effort(std::move(best)) {}
    SynthesisResult best_effort;
};

struct StringStabilityReport {
    double t_norm = 0.0;
    double argmax_hz = 0.0;
    double margin = 0.0;  // 1 - t_norm, negative on failure
    bool pass = false;
    bool zero_controller = false;
    FrequencyResponse trace;  // predecessor-to-follower transfer samples
};

namespace detail {

inline void require_weight_timebase(const PlatoonConfig& cfg, const WeightSet& w) {
    if (!w.ws.is_discrete() || std::abs(*w.ws.ts - cfg.ts) > 1e-12 * cfg.ts)
        throw ConfigError("weights must be discrete at the configured sampling period");
}

}  // namespace detail

// Certified channel norms for a closed-loop candidate. Instability wins over
// everything: all norms become the infinity marker.
inline ObjectiveValues evaluate(const PlatoonConfig& cfg, const WeightSet& w, const RationalTF& k) {
    cfg.validate();
    w.validate();
    detail::require_weight_timebase(cfg, w);
    const ClosedLoops cl = closed_loops(cfg, k);
    const RationalTF ks = control_sensitivity(cfg, k);
    ObjectiveValues v;
    v.stable = is_stable(cl.s) && is_stable(cl.t) && is_stable(ks);
    if (!v.stable) {
        const double inf = std::numeric_limits<double>::infinity();
        v.gamma_s = v.gamma_t = v.t_norm = inf;
        if (w.wu) v.gamma_u = inf;
        return v;
    }
    v.gamma_s = hinf_norm_mul(w.ws, cl.s);
    v.gamma_t = hinf_norm_mul(w.wt, cl.t);
    v.t_norm = hinf_norm(cl.t);
    if (w.wu) v.gamma_u = hinf_norm_mul(*w.wu, ks);
    return v;
}

inline ObjectiveValues evaluate(const PlatoonConfig& cfg, const WeightSet& w, const Controller& k) {
    return evaluate(cfg, w, k.tf);
}

inline bool meets_feasibility(const ObjectiveValues& v) {
    return v.stable && v.gamma_s < 1.0 && v.gamma_t < 1.0 && v.t_norm <= 1.0;
}

namespace detail {

inline constexpr double kUnstableBarrier = 1e6;
inline constexpr double kConstraintSlack = 1e-6;

// Largest closed-loop pole magnitude across the three channels; 0 when every
// channel is a pure gain.
inline double closed_loop_radius(const ClosedLoops& cl, const RationalTF& ks) {
    double rho = 0.0;
    for (const RationalTF* sys : {&cl.s, &cl.t, &ks}) {
        if (sys->den.degree() == 0) continue;
        for (const Complex& p : sys->den.roots()) rho = std::max(rho, std::abs(p));
    }
    return rho;
}

// Penalized scalar the simplex descends. Unstable candidates land on a
// barrier that still slopes back toward the unit disk.
inline double synth_objective(const PlatoonConfig& cfg, const WeightSet& w, const RationalTF& k,
                              bool traditional, double penalty) {
    ClosedLoops cl;
    RationalTF ks;
    try {
        cl = closed_loops(cfg, k);
        ks = control_sensitivity(cfg, k);
    } catch (const DomainError&) {
        return 2.0 * kUnstableBarrier;
    }
    const bool stable = is_stable(cl.s) && is_stable(cl.t) && is_stable(ks);
    if (traditional) {
        // the single-bound objective is shaped on the policy-free design
        // loop; the deployed headway loop must stay stable alongside it
        ClosedLoops dl;
        RationalTF du;
        try {
            dl = traditional_design_loops(cfg, k);
            du = traditional_control_sensitivity(cfg, k);
        } catch (const DomainError&) {
            return 2.0 * kUnstableBarrier;
        }
        const bool design_stable = is_stable(dl.s) && is_stable(dl.t) && is_stable(du);
        if (!stable || !design_stable) {
            const double rho = std::max(closed_loop_radius(cl, ks), closed_loop_radius(dl, du));
            return kUnstableBarrier + std::max(0.0, rho - 1.0);
        }
        double g = std::max(hinf_norm_mul(w.ws, dl.s), hinf_norm_mul(w.wt, dl.t));
        if (w.wu) g = std::max(g, hinf_norm_mul(*w.wu, du));
        return g;
    }
    if (!stable) return kUnstableBarrier + std::max(0.0, closed_loop_radius(cl, ks) - 1.0);
    const double gs = hinf_norm_mul(w.ws, cl.s);
    const double gt = hinf_norm_mul(w.wt, cl.t);
    const double tn = hinf_norm(cl.t);
    const double excess = std::max(0.0, tn - 1.0);
    return gs + gt + penalty * excess * excess;
}

// Proportional-plus-difference start points kp + kd*(1 - 1/z) at a few
// loop-gain scales, realized over den = z^order so the den parameters stay
// at zero.
inline std::vector<double> pd_init(int order, int variant) {
    static constexpr double kp[] = {0.3, 1.0, 0.1, 2.5};
    static constexpr double kd[] = {0.6, 2.0, 0.3, 4.0};
    const int v = variant % 4;
    std::vector<double> p(controller_param_count(order), 0.0);
    const std::size_t top = static_cast<std::size_t>(order);
    p[top] = kp[v] + kd[v];
    p[top - 1] = -kd[v];
    return p;
}

inline std::vector<double> random_init(int order, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> radius(0.0, 0.85);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::vector<Complex> poles;
    int left = order;
    while (left > 0) {
        const double r = radius(rng);
        const double a = angle(rng);
        if (left >= 2 && a > 0.35) {
            poles.emplace_back(r * std::cos(a), r * std::sin(a));
            poles.emplace_back(r * std::cos(a), -r * std::sin(a));
            left -= 2;
        } else {
            poles.emplace_back(std::cos(a) < 0.0 ? -r : r, 0.0);
            left -= 1;
        }
    }
    const Polynomial den = Polynomial::from_roots(poles, 1.0);
    std::vector<double> p(controller_param_count(order), 0.0);
    const double scale = std::exp(unit(rng) * 1.5);
    for (std::size_t i = 0; i <= static_cast<std::size_t>(order); ++i) p[i] = scale * unit(rng);
    for (std::size_t i = 0; i < static_cast<std::size_t>(order); ++i)
        p[static_cast<std::size_t>(order) + 1 + i] = den[i];
    return p;
}

struct SearchBest {
    std::vector<double> params;
    double objective = std::numeric_limits<double>::infinity();
    int restart = -1;
};

inline SynthesisResult synthesize(const PlatoonConfig& cfg, const WeightSet& w,
                                  const SynthOptions& opts, bool traditional) {
    cfg.validate();
    w.validate();
    require_weight_timebase(cfg, w);
    opts.validate();

    NelderMeadOptions nm;
    nm.max_iters = opts.max_iters;

    double penalty = opts.penalty0;
    auto objective = [&](const std::vector<double>& p) {
        return synth_objective(cfg, w, controller_from_params(p, opts.order, cfg.ts).tf,
                               traditional, penalty);
    };

    SearchBest best, best_feasible;
    int total_iters = 0;
    for (int r = 0; r < opts.restarts; ++r) {
        std::mt19937_64 rng(opts.seed ^ static_cast<std::uint64_t>(r));
        std::vector<double> x0;
        if (r == 0 && opts.init_params) {
            if (opts.init_params->size() != controller_param_count(opts.order))
                throw ConfigError("init_params length does not match the controller order");
            x0 = *opts.init_params;
        } else {
            x0 = (r % 2 == 0) ? pd_init(opts.order, r / 2) : random_init(opts.order, rng);
        }
        const NelderMeadResult run = nelder_mead(objective, x0, nm);
        total_iters += run.iterations;
        if (run.fx < best.objective) best = {run.x, run.fx, r};
        if (!traditional && run.fx < best_feasible.objective &&
            meets_feasibility(evaluate(cfg, w, controller_from_params(run.x, opts.order, cfg.ts))))
            best_feasible = {run.x, run.fx, r};
    }

    // exact-penalty escalation: polish from the incumbent until the
    // string-stability constraint holds or the weight has doubled out
    if (!traditional) {
        for (int round = 0; round < 8; ++round) {
            if (best.objective >= kUnstableBarrier) break;
            const ObjectiveValues probe =
                evaluate(cfg, w, controller_from_params(best.params, opts.order, cfg.ts));
            if (!(probe.t_norm > 1.0 + kConstraintSlack)) break;
            penalty *= 2.0;
            const NelderMeadResult run = nelder_mead(objective, best.params, nm);
            total_iters += run.iterations;
            best.params = run.x;
            best.objective = run.fx;
        }
        // a restart that ended feasible outranks a lower-objective
        // infeasible incumbent
        if (best_feasible.restart >= 0 &&
            !meets_feasibility(
                evaluate(cfg, w, controller_from_params(best.params, opts.order, cfg.ts))))
            best = best_feasible;
    }

    SynthesisResult out;
    out.controller = controller_from_params(best.params, opts.order, cfg.ts);
    out.objectives = evaluate(cfg, w, out.controller);
    out.feasible = meets_feasibility(out.objectives);
    out.iterations = total_iters;
    out.restarts_used = opts.restarts;
    if (!out.objectives.stable)
        throw SynthesisFailure("no restart found a stabilizing controller", out);
    return out;
}

}  // namespace detail

// min Gamma_S + Gamma_T subject to the string-stability bound |T| <= 1,
// enforced by an escalating exact penalty.
inline SynthesisResult synthesize_multiobj(const PlatoonConfig& cfg, const WeightSet& w,
                                           const SynthOptions& opts) {
    return detail::synthesize(cfg, w, opts, false);
}

// min max(Gamma_S, Gamma_T[, Gamma_U]) with no string-stability constraint,
// shaped on the policy-free design loop. The reported objectives still
// describe the deployed headway loop, which is where such designs typically
// lose string stability.
inline SynthesisResult synthesize_traditional(const PlatoonConfig& cfg, const WeightSet& w,
                                              const SynthOptions& opts) {
    return detail::synthesize(cfg, w, opts, true);
}

inline StringStabilityReport verify_string_stability(const PlatoonConfig& cfg, const RationalTF& k) {
    cfg.validate();
    const RationalTF t = string_stability_fn(cfg, k);
    const HinfResult peak = hinf_norm_detail(t);
    const double hi = 0.999 * t.nyquist_hz();
    StringStabilityReport rep{
        peak.norm,
        peak.argmax_hz,
        1.0 - peak.norm,
        peak.norm <= 1.0,
        k.num.is_zero(),
        freq_response(t, log_spaced_grid(detail::kGridLowHz, hi, 200)),
    };
    return rep;
}

}  // namespace platoon_hinf
