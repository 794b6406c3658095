#pragma once

#include <cmath>
#include <string>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace platoon_hinf {

enum class Mode { acc, cacc };

inline std::string to_string(Mode m) { return m == Mode::acc ? "acc" : "cacc"; }

inline Mode mode_from_string(const std::string& s) {
    if (s == "acc") return Mode::acc;
    if (s == "cacc") return Mode::cacc;
    throw ConfigError("unknown mode '" + s + "' (expected acc or cacc)");
}

// Double integrator with an actuator lag and an actuation dead time.
struct VehicleParams {
    double tau = 0.1;  // lag time constant, s
    double phi = 0.2;  // actuation delay, s
};

// Constant time-gap spacing: desired gap = d0 + h * v.
struct SpacingPolicy {
    double h = 1.0;   // time gap, s
    double d0 = 0.0;  // standstill distance, m
};

struct CommLink {
    double theta = 0.15;  // wireless latency, s
};

struct PlatoonConfig {
    Mode mode = Mode::acc;
    VehicleParams vehicle;
    SpacingPolicy policy;
    CommLink link;  // unused in ACC mode
    int m = 5;      // follower count
    double ts = 0.1;
    int pade_order = 4;

    void validate() const {
        if (!(vehicle.tau > 0.0)) throw ConfigError("tau must be > 0");
        if (vehicle.phi < 0.0) throw ConfigError("phi must be >= 0");
        if (!(policy.h > 0.0)) throw ConfigError("h must be > 0");
        if (policy.d0 < 0.0) throw ConfigError("d0 must be >= 0");
        if (link.theta < 0.0) throw ConfigError("theta must be >= 0");
        if (m < 1) throw ConfigError("m must be >= 1");
        if (!(ts > 0.0)) throw ConfigError("ts must be > 0");
        if (pade_order < 1) throw ConfigError("pade_order must be >= 1");
    }
};

// u -> position: e^{-phi s} / (s^2 (tau s + 1))
inline RationalTF vehicle_tf(const VehicleParams& p) {
    if (!(p.tau > 0.0)) throw ConfigError("tau must be > 0");
    if (p.phi < 0.0) throw ConfigError("phi must be >= 0");
    return RationalTF::continuous(Polynomial::one(), Polynomial({0.0, 0.0, 1.0, p.tau}), p.phi);
}

// h s + 1 (gap demand per unit position)
inline RationalTF spacing_tf(const SpacingPolicy& p) {
    if (!(p.h > 0.0)) throw ConfigError("h must be > 0");
    return RationalTF::continuous(Polynomial({1.0, p.h}), Polynomial::one());
}

// pure wireless delay e^{-theta s}
inline RationalTF comm_delay_tf(const CommLink& l) {
    if (l.theta < 0.0) throw ConfigError("theta must be >= 0");
    return RationalTF::continuous(Polynomial::one(), Polynomial::one(), l.theta);
}

// Delay-expanded, Tustin-discretized plant blocks at the configured rate.
struct DiscreteBlocks {
    RationalTF g;  // vehicle
    RationalTF h;  // spacing policy
    RationalTF d;  // communication delay
};

inline DiscreteBlocks discretize_blocks(const PlatoonConfig& cfg) {
    cfg.validate();
    DiscreteBlocks b;
    b.g = discretize_tustin(expand_delay(vehicle_tf(cfg.vehicle), cfg.pade_order), cfg.ts);
    b.h = discretize_tustin(spacing_tf(cfg.policy), cfg.ts);
    b.d = discretize_tustin(expand_delay(comm_delay_tf(cfg.link), cfg.pade_order), cfg.ts);
    return b;
}

struct ClosedLoops {
    RationalTF s;  // disturbance-to-error sensitivity
    RationalTF t;  // predecessor-to-follower transfer
};

namespace detail {

inline void require_controller_domain(const PlatoonConfig& cfg, const RationalTF& k) {
    if (!k.is_discrete() || std::abs(*k.ts - cfg.ts) > 1e-12 * cfg.ts)
        throw DomainError("controller must be discrete at the configured sampling period");
    if (k.delay != 0.0) throw DelayAdditionError("controller must be delay-free");
}

}  // namespace detail

// radar-only loop: S = 1/(1+GHK), T = GK/(1+GHK)
inline ClosedLoops acc_closed_loops(const PlatoonConfig& cfg, const RationalTF& k) {
    detail::require_controller_domain(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const Polynomial den_cl = b.g.den * b.h.den * k.den + b.g.num * b.h.num * k.num;
    ClosedLoops cl;
    cl.s = reduce(RationalTF::discrete(b.g.den * b.h.den * k.den, den_cl, cfg.ts));
    cl.t = reduce(RationalTF::discrete(b.g.num * k.num * b.h.den, den_cl, cfg.ts));
    return cl;
}

// wireless feedforward added: S = (1-D)/(1+GHK), T = (D+GKH)/(H(1+GHK))
inline ClosedLoops cacc_closed_loops(const PlatoonConfig& cfg, const RationalTF& k) {
    detail::require_controller_domain(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const Polynomial den_cl = b.g.den * b.h.den * k.den + b.g.num * b.h.num * k.num;
    ClosedLoops cl;
    cl.s = reduce(RationalTF::discrete((b.d.den - b.d.num) * (b.g.den * b.h.den * k.den),
                                       b.d.den * den_cl, cfg.ts));
    // the g_d k_d h_d block common to both terms is already cancelled here
    cl.t = reduce(RationalTF::discrete(
        (b.d.num * (b.g.den * k.den * b.h.den) + b.d.den * (b.g.num * k.num * b.h.num)) * b.h.den,
        b.d.den * b.h.num * den_cl, cfg.ts));
    return cl;
}

inline ClosedLoops closed_loops(const PlatoonConfig& cfg, const RationalTF& k) {
    return cfg.mode == Mode::acc ? acc_closed_loops(cfg, k) : cacc_closed_loops(cfg, k);
}

// r -> u channel K*S, with the controller's own denominator cancelled so
// its poles do not appear as channel poles.
inline RationalTF control_sensitivity(const PlatoonConfig& cfg, const RationalTF& k) {
    detail::require_controller_domain(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const Polynomial den_cl = b.g.den * b.h.den * k.den + b.g.num * b.h.num * k.num;
    if (cfg.mode == Mode::acc)
        return reduce(RationalTF::discrete(k.num * b.g.den * b.h.den, den_cl, cfg.ts));
    return reduce(RationalTF::discrete(k.num * (b.d.den - b.d.num) * (b.g.den * b.h.den),
                                       b.d.den * den_cl, cfg.ts));
}

// The transfer whose unit-circle magnitude bound certifies string
// stability for the configured mode.
inline RationalTF string_stability_fn(const PlatoonConfig& cfg, const RationalTF& k) {
    return closed_loops(cfg, k).t;
}

// Single-bound design structure: a plain tracking loop around the vehicle
// alone, the spacing policy left out. Controllers tuned here are deployed
// in the headway loop above, which is where their string behavior is
// judged.
inline ClosedLoops traditional_design_loops(const PlatoonConfig& cfg, const RationalTF& k) {
    detail::require_controller_domain(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const Polynomial den0 = b.g.den * k.den + b.g.num * k.num;
    ClosedLoops cl;
    cl.s = reduce(RationalTF::discrete(b.g.den * k.den, den0, cfg.ts));
    cl.t = reduce(RationalTF::discrete(b.g.num * k.num, den0, cfg.ts));
    return cl;
}

inline RationalTF traditional_control_sensitivity(const PlatoonConfig& cfg, const RationalTF& k) {
    detail::require_controller_domain(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const Polynomial den0 = b.g.den * k.den + b.g.num * k.num;
    return reduce(RationalTF::discrete(k.num * b.g.den, den0, cfg.ts));
}

}  // namespace platoon_hinf
