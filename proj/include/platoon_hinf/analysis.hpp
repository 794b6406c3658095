#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace platoon_hinf {

// Sampled frequency response on a strictly ascending positive grid (Hz).
struct FrequencyResponse {
    std::vector<double> freqs_hz;
    std::vector<Complex> values;

    FrequencyResponse(std::vector<double> f, std::vector<Complex> v)
        : freqs_hz(std::move(f)), values(std::move(v)) {
        if (freqs_hz.size() != values.size()) throw DomainError("frequency response: length mismatch");
        for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
            if (!(freqs_hz[i] > 0.0)) throw FrequencyRangeError("frequencies must be positive");
            if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1]))
                throw FrequencyRangeError("frequencies must be strictly ascending");
        }
    }
};

// Point evaluation at f hertz; no range guard, internal use.
inline Complex eval_at(const RationalTF& sys, double f_hz) {
    const double w = 2.0 * std::numbers::pi * f_hz;
    Complex point;
    if (sys.is_discrete()) {
        const double th = w * *sys.ts;
        point = Complex(std::cos(th), std::sin(th));
    } else {
        point = Complex(0.0, w);
    }
    Complex v = sys.num.eval(point) / sys.den.eval(point);
    if (sys.delay != 0.0) {
        const double ph = -w * sys.delay;
        v *= Complex(std::cos(ph), std::sin(ph));
    }
    return v;
}

inline FrequencyResponse freq_response(const RationalTF& sys, const std::vector<double>& freqs_hz) {
    std::vector<Complex> values;
    values.reserve(freqs_hz.size());
    const double ny = sys.is_discrete() ? sys.nyquist_hz() : std::numeric_limits<double>::infinity();
    for (double f : freqs_hz) {
        if (sys.is_discrete() && f >= ny)
            throw FrequencyRangeError("frequency at or above Nyquist");
        values.push_back(eval_at(sys, f));
    }
    return FrequencyResponse(freqs_hz, std::move(values));
}

// Strict stability of the rational part: all poles in the open left
// half-plane (continuous) or open unit disk (discrete). Poles on the
// boundary count as unstable. The pure delay factor never affects this.
inline bool is_stable(const RationalTF& sys) {
    if (sys.den.degree() == 0) return true;
    for (const Complex& p : sys.den.roots()) {
        if (sys.is_discrete()) {
            if (!(std::abs(p) < 1.0)) return false;
        } else {
            if (!(p.real() < 0.0)) return false;
        }
    }
    return true;
}

inline std::vector<double> log_spaced_grid(double f_lo, double f_hi, int points_per_decade) {
    const double la = std::log10(f_lo);
    const double lb = std::log10(f_hi);
    const int n = std::max(2, static_cast<int>(std::ceil((lb - la) * points_per_decade)) + 1);
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        f[static_cast<std::size_t>(i)] = std::pow(10.0, la + (lb - la) * i / (n - 1));
    f.front() = f_lo;
    f.back() = f_hi;
    return f;
}

struct HinfResult {
    double norm = 0.0;
    double argmax_hz = 0.0;  // 0 marks a supremum at DC (or an unstable system)
};

namespace detail {

inline constexpr double kGridLowHz = 1e-3;
inline constexpr int kGridPointsPerDecade = 2000;

inline double grid_high_hz(const RationalTF& sys) {
    return sys.is_discrete() ? sys.nyquist_hz() : 1e3 / (2.0 * std::numbers::pi);
}

// Golden-section maximization of a magnitude profile over log10-frequency.
template <class MagFn>
inline void refine_peak_fn(MagFn&& mag, double lf_lo, double lf_hi, HinfResult& best) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lf_lo, b = lf_hi;
    double c = b - (b - a) * kInvPhi;
    double d = a + (b - a) * kInvPhi;
    double fc = mag(c), fd = mag(d);
    for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * kInvPhi;
            fc = mag(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * kInvPhi;
            fd = mag(d);
        }
    }
    const double lf = (fc > fd) ? c : d;
    const double m = std::max(fc, fd);
    if (m > best.norm) {
        best.norm = m;
        best.argmax_hz = std::pow(10.0, lf);
    }
}

inline void refine_peak(const RationalTF& sys, double lf_lo, double lf_hi, HinfResult& best) {
    refine_peak_fn([&](double lf) { return std::abs(eval_at(sys, std::pow(10.0, lf))); }, lf_lo,
                   lf_hi, best);
}

// Shared grid scan + local refinement once stability and the DC/limit
// candidates are settled.
template <class MagFn>
inline void scan_peak(MagFn&& mag_at_hz, double f_lo, double f_hi, HinfResult& best) {
    const std::vector<double> grid = log_spaced_grid(f_lo, f_hi, kGridPointsPerDecade);
    std::size_t peak = 0;
    double peak_mag = -1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = mag_at_hz(grid[i]);
        if (m > peak_mag) {
            peak_mag = m;
            peak = i;
        }
    }
    if (peak_mag > best.norm) {
        best.norm = peak_mag;
        best.argmax_hz = grid[peak];
    }
    const double lf_lo = std::log10(grid[peak > 0 ? peak - 1 : 0]);
    const double lf_hi = std::log10(grid[std::min(peak + 1, grid.size() - 1)]);
    if (lf_hi > lf_lo)
        refine_peak_fn([&](double lf) { return mag_at_hz(std::pow(10.0, lf)); }, lf_lo, lf_hi,
                       best);
}

}  // namespace detail

// H-infinity norm (sup of |sys| over the stability boundary) with the
// supremum frequency. Unstable systems get the infinity marker. Dense
// log-grid scan plus golden-section refinement; relative accuracy ~1e-4.
inline HinfResult hinf_norm_detail(const RationalTF& sys) {
    HinfResult best;
    if (sys.num.is_zero()) return best;
    if (!is_stable(sys)) {
        best.norm = std::numeric_limits<double>::infinity();
        return best;
    }
    if (!sys.is_discrete() && sys.num.degree() > sys.den.degree()) {
        best.norm = std::numeric_limits<double>::infinity();
        return best;
    }
    // DC candidate; stable systems cannot have a pole at s=0 / z=1.
    const Complex dc = sys.is_discrete() ? sys.num.eval(Complex(1.0, 0.0)) / sys.den.eval(Complex(1.0, 0.0))
                                         : Complex(sys.num[0] / sys.den[0], 0.0);
    best.norm = std::abs(dc);
    best.argmax_hz = 0.0;
    // High-frequency limit of a biproper continuous system.
    if (!sys.is_discrete() && sys.num.degree() == sys.den.degree()) {
        const double hf = std::abs(sys.num.leading() / sys.den.leading());
        if (hf > best.norm) {
            best.norm = hf;
            best.argmax_hz = detail::grid_high_hz(sys);
        }
    }
    detail::scan_peak([&](double f) { return std::abs(eval_at(sys, f)); }, detail::kGridLowHz,
                      detail::grid_high_hz(sys), best);
    return best;
}

inline double hinf_norm(const RationalTF& sys) { return hinf_norm_detail(sys).norm; }

// Norm of the product a*b evaluated factored. Stability of the product is
// the conjunction of factor stabilities, so a near-circle pole of one factor
// is never re-derived from convolved coefficients (where it can drift across
// the boundary).
inline HinfResult hinf_norm_detail_mul(const RationalTF& a, const RationalTF& b) {
    if (a.is_discrete() != b.is_discrete()) throw DomainError("hinf_norm_mul: mixed timebases");
    if (a.is_discrete() && std::abs(*a.ts - *b.ts) > 1e-12 * *a.ts)
        throw DomainError("hinf_norm_mul: sampling periods differ");
    HinfResult best;
    if (a.num.is_zero() || b.num.is_zero()) return best;
    if (!is_stable(a) || !is_stable(b)) {
        best.norm = std::numeric_limits<double>::infinity();
        return best;
    }
    if (!a.is_discrete() &&
        a.num.degree() + b.num.degree() > a.den.degree() + b.den.degree()) {
        best.norm = std::numeric_limits<double>::infinity();
        return best;
    }
    auto dc_of = [](const RationalTF& sys) {
        return sys.is_discrete()
                   ? std::abs(sys.num.eval(Complex(1.0, 0.0)) / sys.den.eval(Complex(1.0, 0.0)))
                   : std::abs(sys.num[0] / sys.den[0]);
    };
    best.norm = dc_of(a) * dc_of(b);
    best.argmax_hz = 0.0;
    if (!a.is_discrete() && a.num.degree() + b.num.degree() == a.den.degree() + b.den.degree()) {
        const double hf = std::abs(a.num.leading() * b.num.leading() /
                                   (a.den.leading() * b.den.leading()));
        if (hf > best.norm) {
            best.norm = hf;
            best.argmax_hz = detail::grid_high_hz(a);
        }
    }
    detail::scan_peak([&](double f) { return std::abs(eval_at(a, f) * eval_at(b, f)); },
                      detail::kGridLowHz, detail::grid_high_hz(a), best);
    return best;
}

inline double hinf_norm_mul(const RationalTF& a, const RationalTF& b) {
    return hinf_norm_detail_mul(a, b).norm;
}

// First frequency at which |sys| reaches unity from below, if any.
inline std::optional<double> unity_crossover_hz(const RationalTF& sys) {
    const double f_lo = detail::kGridLowHz;
    const double f_hi = detail::grid_high_hz(sys);
    const std::vector<double> grid = log_spaced_grid(f_lo, f_hi, detail::kGridPointsPerDecade);
    auto mag = [&](double f) { return std::abs(eval_at(sys, f)); };
    if (mag(grid.front()) >= 1.0) return grid.front();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (mag(grid[i]) >= 1.0) {
            double a = grid[i - 1], b = grid[i];
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (a + b);
                (mag(m) >= 1.0 ? b : a) = m;
            }
            return 0.5 * (a + b);
        }
    }
    return std::nullopt;
}

inline double mag_db(Complex v) { return 20.0 * std::log10(std::abs(v)); }

// In-place phase unwrap (radians).
inline void unwrap_phase(std::vector<double>& phase) {
    for (std::size_t i = 1; i < phase.size(); ++i) {
        double d = phase[i] - phase[i - 1];
        while (d > std::numbers::pi) {
            phase[i] -= 2.0 * std::numbers::pi;
            d = phase[i] - phase[i - 1];
        }
        while (d < -std::numbers::pi) {
            phase[i] += 2.0 * std::numbers::pi;
            d = phase[i] - phase[i - 1];
        }
    }
}

}  // namespace platoon_hinf
