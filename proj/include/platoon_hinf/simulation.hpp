#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "platoon_hinf/controller.hpp"
#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/platoon.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace platoon_hinf {

struct VehicleState {
    double p = 0.0;  // position, m
    double v = 0.0;  // velocity, m/s
    double a = 0.0;  // acceleration, m/s^2
};

enum class LeadProfile { mixed, sine, zero };

inline std::string to_string(LeadProfile p) {
    switch (p) {
        case LeadProfile::mixed: return "mixed";
        case LeadProfile::sine: return "sine";
        default: return "zero";
    }
}

inline LeadProfile lead_profile_from_string(const std::string& s) {
    if (s == "mixed") return LeadProfile::mixed;
    if (s == "sine") return LeadProfile::sine;
    if (s == "zero") return LeadProfile::zero;
    throw ConfigError("unknown lead profile '" + s + "' (expected mixed, sine or zero)");
}

// Which vehicle response model the run uses. `physical` integrates the
// continuous chain exactly under held inputs with whole-sample delays;
// `design` steps the same Tustin/Pade loop transfer functions the synthesis
// and verification chain certifies, so time responses agree with the
// frequency-domain claims to roundoff. Aggressive designs that ride the
// |T| = 1 bound can behave differently under the two models; the gap
// between them is a fidelity statement, not a bug in either.
enum class PlantModel { physical, design };

inline std::string to_string(PlantModel p) {
    return p == PlantModel::physical ? "physical" : "design";
}

inline PlantModel plant_model_from_string(const std::string& s) {
    if (s == "physical") return PlantModel::physical;
    if (s == "design") return PlantModel::design;
    throw ConfigError("unknown plant model '" + s + "' (expected physical or design)");
}

// Lead-vehicle commanded acceleration and the platoon's starting geometry.
// `scale` multiplies the whole profile; responses are linear in it.
struct ScenarioSpec {
    double duration = 60.0;  // s
    LeadProfile profile = LeadProfile::mixed;
    double scale = 1.0;
    double sine_freq_hz = 0.2;  // sine profile only
    double sine_amp = 1.5;      // m/s^2, sine profile only
    double v0 = 15.0;           // common initial speed, m/s
    double surplus = 0.0;       // initial gap slack over the desired spacing, m
    double vehicle_length = 5.0;
    PlantModel plant = PlantModel::physical;
    // fractional communication delays (physical model): round up to whole
    // samples (default) or interpolate linearly between the two taps
    bool interpolate_comm_delay = false;

    void validate() const {
        if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
        if (!std::isfinite(scale)) throw ConfigError("scale must be finite");
        if (profile == LeadProfile::sine && !(sine_freq_hz > 0.0))
            throw ConfigError("sine_freq_hz must be > 0");
        if (!std::isfinite(v0)) throw ConfigError("v0 must be finite");
        if (surplus < 0.0) throw ConfigError("surplus must be >= 0");
        if (plant == PlantModel::design && surplus != 0.0)
            throw ConfigError("the design plant model starts from exact equilibrium (surplus 0)");
        if (vehicle_length < 0.0) throw ConfigError("vehicle_length must be >= 0");
    }
};

// Step-plus-multisine test input: 1.5 on [5,10), -1.5 on [25,30),
// 0.5 * sum_{k=1..5} sin(0.1 k t) on [40,50), zero elsewhere.
inline double lead_accel(double t) {
    if (t >= 5.0 && t < 10.0) return 1.5;
    if (t >= 25.0 && t < 30.0) return -1.5;
    if (t >= 40.0 && t < 50.0) {
        double s = 0.0;
        for (int k = 1; k <= 5; ++k) s += std::sin(0.1 * k * t);
        return 0.5 * s;
    }
    return 0.0;
}

inline double lead_accel(const ScenarioSpec& sc, double t) {
    switch (sc.profile) {
        case LeadProfile::mixed: return sc.scale * lead_accel(t);
        case LeadProfile::sine:
            return sc.scale * sc.sine_amp * std::sin(2.0 * std::numbers::pi * sc.sine_freq_hz * t);
        default: return 0.0;
    }
}

// Exact zero-order-hold step of the position/velocity/acceleration chain
// under a constant commanded acceleration u held over one sample.
inline VehicleState step_vehicle(const VehicleState& x, double u, const VehicleParams& prm,
                                 double ts) {
    if (!(ts > 0.0)) throw ConfigError("ts must be > 0");
    if (!(prm.tau > 0.0)) throw ConfigError("tau must be > 0");
    const double e = std::exp(-ts / prm.tau);
    VehicleState y;
    y.a = u + (x.a - u) * e;
    y.v = x.v + u * ts + (x.a - u) * prm.tau * (1.0 - e);
    y.p = x.p + x.v * ts + 0.5 * u * ts * ts + (x.a - u) * prm.tau * (ts - prm.tau * (1.0 - e));
    return y;
}

struct VehicleSeries {
    std::vector<double> p, v, a, jerk, u, e, d, timegap;
};

struct PlatoonTrace {
    double ts = 0.0;
    std::vector<double> t;
    std::vector<VehicleSeries> vehicles;  // [0] is the leader
    std::vector<std::string> notes;

    int follower_count() const { return static_cast<int>(vehicles.size()) - 1; }
};

// State blew past the sanity bound; the samples recorded so far ride along.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, PlatoonTrace trace, int vehicle_, double t_s_)
        : std::runtime_error(msg), partial(std::move(trace)), vehicle(vehicle_), t_s(t_s_) {}
    PlatoonTrace partial;
    int vehicle = 0;
    double t_s = 0.0;
};

namespace detail {

inline constexpr double kDivergenceBound = 1e9;

// Direct-form II transposed realization of a proper discrete transfer
// function. Coefficients are read off the ascending-power polynomials.
class TFFilter {
  public:
    explicit TFFilter(const RationalTF& k) {
        if (!k.is_discrete()) throw DomainError("filter requires a discrete transfer function");
        if (k.delay != 0.0) throw DelayAdditionError("filter requires a delay-free system");
        const int n = k.den.degree();
        if (k.num.degree() > n) throw DomainError("filter requires a proper system");
        const double lead = k.den.leading();
        b_.assign(static_cast<std::size_t>(n) + 1, 0.0);
        a_.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            if (n - i <= k.num.degree()) b_[static_cast<std::size_t>(i)] = k.num[n - i] / lead;
            a_[static_cast<std::size_t>(i)] = k.den[n - i] / lead;
        }
        s_.assign(static_cast<std::size_t>(n), 0.0);
    }

    double step(double u) {
        const double y = b_[0] * u + (s_.empty() ? 0.0 : s_[0]);
        for (std::size_t i = 0; i + 1 < s_.size(); ++i)
            s_[i] = b_[i + 1] * u + s_[i + 1] - a_[i + 1] * y;
        if (!s_.empty()) s_.back() = b_.back() * u - a_.back() * y;
        return y;
    }

  private:
    std::vector<double> b_, a_, s_;
};

// Sample history ring: push the current value, then tap(j) reads the value
// from j steps ago (zeros before the run starts).
class DelayLine {
  public:
    explicit DelayLine(std::size_t depth) : buf_(depth + 1, 0.0) {}

    void push(double u) {
        idx_ = (idx_ + 1) % buf_.size();
        buf_[idx_] = u;
    }

    double tap(std::size_t back) const {
        return buf_[(idx_ + buf_.size() - back) % buf_.size()];
    }

  private:
    std::vector<double> buf_;
    std::size_t idx_ = 0;
};

// Actuation delay must be a whole number of samples.
inline std::size_t actuation_delay_steps(double phi, double ts) {
    const double ratio = phi / ts;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9)
        throw ConfigError("phi must be an integer multiple of ts");
    return static_cast<std::size_t>(rounded);
}

inline PlatoonTrace simulate_physical(const PlatoonConfig& cfg, const RationalTF& k,
                                      const ScenarioSpec& sc) {
    const double ts = cfg.ts;
    const int m = cfg.m;
    const std::size_t n_phi = detail::actuation_delay_steps(cfg.vehicle.phi, ts);

    // communication delay taps: interpolate or round up to whole samples
    std::size_t comm_lo = 0, comm_hi = 0;
    double comm_frac = 0.0;
    PlatoonTrace tr;
    if (cfg.mode == Mode::cacc) {
        const double ratio = cfg.link.theta / ts;
        comm_lo = static_cast<std::size_t>(std::floor(ratio));
        comm_frac = ratio - static_cast<double>(comm_lo);
        if (comm_frac < 1e-9) {
            comm_frac = 0.0;
            comm_hi = comm_lo;
        } else if (sc.interpolate_comm_delay) {
            comm_hi = comm_lo + 1;
            tr.notes.push_back("communication delay interpolated between " +
                               std::to_string(comm_lo) + " and " + std::to_string(comm_hi) +
                               " samples");
        } else {
            comm_lo = comm_hi = comm_lo + 1;
            comm_frac = 0.0;
            tr.notes.push_back("communication delay rounded up to " + std::to_string(comm_hi) +
                               " samples");
        }
    }

    const std::size_t steps = static_cast<std::size_t>(std::floor(sc.duration / ts + 1e-9));
    const std::size_t samples = steps + 1;

    tr.ts = ts;
    tr.t.reserve(samples);
    tr.vehicles.assign(static_cast<std::size_t>(m) + 1, VehicleSeries{});
    for (auto& s : tr.vehicles) {
        s.p.reserve(samples);
        s.v.reserve(samples);
        s.a.reserve(samples);
        s.jerk.reserve(samples);
        s.u.reserve(samples);
        s.e.reserve(samples);
        s.d.reserve(samples);
        s.timegap.reserve(samples);
    }

    // chained initial geometry: every gap at its desired value plus surplus
    const double l_eff = sc.vehicle_length + cfg.policy.d0;
    std::vector<VehicleState> x(static_cast<std::size_t>(m) + 1);
    x[0] = {0.0, sc.v0, 0.0};
    for (int i = 1; i <= m; ++i) {
        x[static_cast<std::size_t>(i)] = {
            x[static_cast<std::size_t>(i - 1)].p - (l_eff + cfg.policy.h * sc.v0 + sc.surplus),
            sc.v0, 0.0};
    }

    std::vector<detail::TFFilter> fb;     // feedback compensator, one per follower
    std::vector<detail::TFFilter> ff;     // inverse spacing filter (feedforward path)
    std::vector<detail::DelayLine> act;   // actuation delay, every vehicle
    std::vector<detail::DelayLine> comm;  // predecessor command link, per follower
    act.reserve(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) act.emplace_back(n_phi);
    const RationalTF h_d = discretize_tustin(spacing_tf(cfg.policy), ts);
    const RationalTF inv_h = RationalTF::discrete(h_d.den, h_d.num, ts);
    for (int i = 1; i <= m; ++i) {
        fb.emplace_back(k);
        if (cfg.mode == Mode::cacc) {
            ff.emplace_back(inv_h);
            comm.emplace_back(comm_hi);
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0);

    for (std::size_t step = 0; step < samples; ++step) {
        const double t = static_cast<double>(step) * ts;
        tr.t.push_back(t);

        // commands first: the leader broadcasts, each follower reacts to its
        // own gap error plus, with a link, the delayed predecessor command
        u[0] = lead_accel(sc, t);
        for (int i = 1; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            if (cfg.mode == Mode::cacc) comm[vi - 1].push(u[vi - 1]);
            const double gap = x[vi - 1].p - x[vi].p - l_eff;
            const double err = gap - cfg.policy.h * x[vi].v;
            double cmd = fb[vi - 1].step(err);
            if (cfg.mode == Mode::cacc) {
                const double heard = (1.0 - comm_frac) * comm[vi - 1].tap(comm_lo) +
                                     comm_frac * comm[vi - 1].tap(comm_hi);
                cmd += ff[vi - 1].step(heard);
            }
            u[vi] = cmd;
        }

        for (int i = 0; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            VehicleSeries& s = tr.vehicles[vi];
            s.p.push_back(x[vi].p);
            s.v.push_back(x[vi].v);
            s.a.push_back(x[vi].a);
            s.jerk.push_back(step == 0 ? 0.0 : (x[vi].a - s.a[step - 1]) / ts);
            s.u.push_back(u[vi]);
            if (i == 0) {
                s.e.push_back(0.0);
                s.d.push_back(nan);
                s.timegap.push_back(nan);
            } else {
                const double gap = x[vi - 1].p - x[vi].p - l_eff;
                s.e.push_back(gap - cfg.policy.h * x[vi].v);
                s.d.push_back(gap);
                s.timegap.push_back(x[vi].v > 1e-9 ? gap / x[vi].v : nan);
            }
        }

        if (step + 1 == samples) break;

        for (int i = 0; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            act[vi].push(u[vi]);
            x[vi] = step_vehicle(x[vi], act[vi].tap(n_phi), cfg.vehicle, ts);
            const bool bad = !std::isfinite(x[vi].p) || !std::isfinite(x[vi].v) ||
                             !std::isfinite(x[vi].a) ||
                             std::abs(x[vi].p) > detail::kDivergenceBound ||
                             std::abs(x[vi].v) > detail::kDivergenceBound ||
                             std::abs(x[vi].a) > detail::kDivergenceBound;
            if (bad) {
                const double t_bad = static_cast<double>(step + 1) * ts;
                throw DivergenceError("state diverged at vehicle " + std::to_string(i) +
                                          ", t = " + std::to_string(t_bad) + " s",
                                      std::move(tr), i, t_bad);
            }
        }
    }
    return tr;
}

// Responses generated by the loop transfer functions themselves: the error
// is S applied to the predecessor's position deviation (S = 1 - H*T in both
// modes), positions propagate through T, and velocity is the bilinear
// derivative of position, matching the H measurement the loops were closed
// with. All signals are deviations from the initial equilibrium.
inline PlatoonTrace simulate_design(const PlatoonConfig& cfg, const RationalTF& k,
                                    const ScenarioSpec& sc) {
    const double ts = cfg.ts;
    const int m = cfg.m;
    const ClosedLoops cl = closed_loops(cfg, k);
    const DiscreteBlocks b = discretize_blocks(cfg);
    const RationalTF inv_h = RationalTF::discrete(b.h.den, b.h.num, ts);
    // command-to-velocity and command-to-acceleration companions of the
    // position plant; built from the continuous forms so the free
    // integrators cancel before discretization
    const RationalTF gv = discretize_tustin(
        expand_delay(RationalTF::continuous(Polynomial::one(),
                                            Polynomial({0.0, 1.0, cfg.vehicle.tau}),
                                            cfg.vehicle.phi),
                     cfg.pade_order),
        ts);
    const RationalTF ga = discretize_tustin(
        expand_delay(RationalTF::continuous(Polynomial::one(), Polynomial({1.0, cfg.vehicle.tau}),
                                            cfg.vehicle.phi),
                     cfg.pade_order),
        ts);

    PlatoonTrace tr;
    tr.notes.push_back("plant model: discretized design blocks");
    const std::size_t steps = static_cast<std::size_t>(std::floor(sc.duration / ts + 1e-9));
    const std::size_t samples = steps + 1;
    tr.ts = ts;
    tr.t.reserve(samples);
    tr.vehicles.assign(static_cast<std::size_t>(m) + 1, VehicleSeries{});
    for (auto& s : tr.vehicles) {
        s.p.reserve(samples);
        s.v.reserve(samples);
        s.a.reserve(samples);
        s.jerk.reserve(samples);
        s.u.reserve(samples);
        s.e.reserve(samples);
        s.d.reserve(samples);
        s.timegap.reserve(samples);
    }

    const double l_eff = sc.vehicle_length + cfg.policy.d0;
    std::vector<double> p0(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = 1; i <= m; ++i)
        p0[static_cast<std::size_t>(i)] =
            p0[static_cast<std::size_t>(i - 1)] - (l_eff + cfg.policy.h * sc.v0);

    TFFilter lead_plant(b.g);
    std::vector<TFFilter> sf, tf, fb, ffd, ffh, vel, acc;
    for (int i = 1; i <= m; ++i) {
        sf.emplace_back(cl.s);
        tf.emplace_back(cl.t);
        fb.emplace_back(k);
        if (cfg.mode == Mode::cacc) {
            ffd.emplace_back(b.d);
            ffh.emplace_back(inv_h);
        }
    }
    for (int i = 0; i <= m; ++i) {
        vel.emplace_back(gv);
        acc.emplace_back(ga);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> dp(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> u(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> err(static_cast<std::size_t>(m) + 1, 0.0);

    for (std::size_t step = 0; step < samples; ++step) {
        const double t = static_cast<double>(step) * ts;

        u[0] = lead_accel(sc, t);
        dp[0] = lead_plant.step(u[0]);
        for (int i = 1; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            err[vi] = sf[vi - 1].step(dp[vi - 1]);
            dp[vi] = tf[vi - 1].step(dp[vi - 1]);
            double cmd = fb[vi - 1].step(err[vi]);
            if (cfg.mode == Mode::cacc) cmd += ffh[vi - 1].step(ffd[vi - 1].step(u[vi - 1]));
            u[vi] = cmd;
        }

        for (int i = 0; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            const bool bad = !std::isfinite(dp[vi]) || !std::isfinite(u[vi]) ||
                             !std::isfinite(err[vi]) || std::abs(dp[vi]) > kDivergenceBound ||
                             std::abs(u[vi]) > kDivergenceBound;
            if (bad)
                throw DivergenceError("state diverged at vehicle " + std::to_string(i) +
                                          ", t = " + std::to_string(t) + " s",
                                      std::move(tr), i, t);
        }

        tr.t.push_back(t);
        for (int i = 0; i <= m; ++i) {
            const std::size_t vi = static_cast<std::size_t>(i);
            VehicleSeries& s = tr.vehicles[vi];
            const double vdev = vel[vi].step(u[vi]);
            const double adev = acc[vi].step(u[vi]);
            const double v = sc.v0 + vdev;
            s.p.push_back(p0[vi] + sc.v0 * t + dp[vi]);
            s.v.push_back(v);
            s.a.push_back(adev);
            s.jerk.push_back(step == 0 ? 0.0 : (adev - s.a[step - 1]) / ts);
            s.u.push_back(u[vi]);
            if (i == 0) {
                s.e.push_back(0.0);
                s.d.push_back(nan);
                s.timegap.push_back(nan);
            } else {
                const double gap = err[vi] + cfg.policy.h * v;
                s.e.push_back(err[vi]);
                s.d.push_back(gap);
                s.timegap.push_back(v > 1e-9 ? gap / v : nan);
            }
        }
    }
    return tr;
}

}  // namespace detail

inline PlatoonTrace simulate(const PlatoonConfig& cfg, const RationalTF& k,
                             const ScenarioSpec& sc) {
    cfg.validate();
    sc.validate();
    detail::require_controller_domain(cfg, k);
    return sc.plant == PlantModel::physical ? detail::simulate_physical(cfg, k, sc)
                                            : detail::simulate_design(cfg, k, sc);
}

inline PlatoonTrace simulate(const PlatoonConfig& cfg, const Controller& k,
                             const ScenarioSpec& sc) {
    return simulate(cfg, k.tf, sc);
}

struct VehicleMetrics {
    double max_abs_e = 0.0;
    double max_abs_a = 0.0;
    double max_abs_jerk = 0.0;
    double min_gap = 0.0;      // NaN for the leader
    double min_timegap = 0.0;  // NaN for the leader or when never defined
    // excess of this vehicle's peak speed over the leader's, as a fraction
    // of the leader's total speed rise
    double overshoot = 0.0;
    bool overshoot_ok = true;
};

struct MetricsReport {
    std::vector<VehicleMetrics> vehicles;  // aligned with the trace, [0] leader
    bool string_stable = false;
    bool vacuous = false;
    std::string note;
};

// Per-vehicle extremes plus the time-domain string-stability verdict:
// every follower's worst spacing error must be strictly smaller than its
// predecessor's. A single follower, or a run where nothing moved, passes
// vacuously.
inline MetricsReport trace_metrics(const PlatoonTrace& tr) {
    if (tr.vehicles.empty() || tr.t.empty()) throw DomainError("trace is empty");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsReport rep;
    rep.vehicles.resize(tr.vehicles.size());

    const double lead_rise =
        *std::max_element(tr.vehicles[0].v.begin(), tr.vehicles[0].v.end()) - tr.vehicles[0].v[0];
    const double lead_peak = *std::max_element(tr.vehicles[0].v.begin(), tr.vehicles[0].v.end());

    for (std::size_t i = 0; i < tr.vehicles.size(); ++i) {
        const VehicleSeries& s = tr.vehicles[i];
        VehicleMetrics& m = rep.vehicles[i];
        for (double e : s.e) m.max_abs_e = std::max(m.max_abs_e, std::abs(e));
        for (double a : s.a) m.max_abs_a = std::max(m.max_abs_a, std::abs(a));
        for (double j : s.jerk) m.max_abs_jerk = std::max(m.max_abs_jerk, std::abs(j));
        if (i == 0) {
            m.min_gap = nan;
            m.min_timegap = nan;
        } else {
            m.min_gap = std::numeric_limits<double>::infinity();
            m.min_timegap = std::numeric_limits<double>::infinity();
            for (double d : s.d) m.min_gap = std::min(m.min_gap, d);
            for (double g : s.timegap)
                if (!std::isnan(g)) m.min_timegap = std::min(m.min_timegap, g);
            if (std::isinf(m.min_timegap)) m.min_timegap = nan;
        }
        const double peak = *std::max_element(s.v.begin(), s.v.end());
        const double excess = peak - lead_peak;
        if (lead_rise > 1e-9) {
            m.overshoot = std::max(0.0, excess) / lead_rise;
            m.overshoot_ok = m.overshoot <= 0.01;
        } else {
            m.overshoot = 0.0;
            m.overshoot_ok = excess <= 1e-9;
        }
    }

    const int m = tr.follower_count();
    if (m < 2) {
        rep.string_stable = true;
        rep.vacuous = true;
        rep.note = "fewer than two followers, nothing to compare";
        return rep;
    }
    double worst = 0.0;
    for (int i = 1; i <= m; ++i)
        worst = std::max(worst, rep.vehicles[static_cast<std::size_t>(i)].max_abs_e);
    if (worst <= 1e-12) {
        rep.string_stable = true;
        rep.vacuous = true;
        rep.note = "all spacing errors stayed at zero";
        return rep;
    }
    rep.string_stable = true;
    for (int i = 2; i <= m; ++i) {
        if (!(rep.vehicles[static_cast<std::size_t>(i)].max_abs_e <
              rep.vehicles[static_cast<std::size_t>(i - 1)].max_abs_e))
            rep.string_stable = false;
    }
    return rep;
}

}  // namespace platoon_hinf
