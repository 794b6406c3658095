#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "platoon_hinf/polynomial.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace test_helpers {

// Deterministic draws independent of stdlib distribution internals.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool coin() { return (gen() & 1u) != 0; }
};

using platoon_hinf::Complex;
using platoon_hinf::Polynomial;
using platoon_hinf::RationalTF;

// Conjugate-closed random root set; real parts drawn from [re_lo, re_hi],
// imaginary magnitudes from [0, im_hi].
inline std::vector<Complex> random_roots(Rng& rng, int count, double re_lo, double re_hi, double im_hi) {
    std::vector<Complex> r;
    while (static_cast<int>(r.size()) < count) {
        if (count - static_cast<int>(r.size()) >= 2 && rng.coin()) {
            const double re = rng.uniform(re_lo, re_hi);
            const double im = rng.uniform(0.1 * im_hi, im_hi);
            r.emplace_back(re, im);
            r.emplace_back(re, -im);
        } else {
            r.emplace_back(rng.uniform(re_lo, re_hi), 0.0);
        }
    }
    return r;
}

inline RationalTF random_stable_continuous(Rng& rng, int max_order) {
    const int n = rng.uniform_int(1, max_order);
    const int m = rng.uniform_int(0, n);
    const auto poles = random_roots(rng, n, -3.0, -0.1, 15.0);
    const auto zeros = random_roots(rng, m, -3.0, 3.0, 15.0);
    const double gain = (rng.coin() ? 1.0 : -1.0) * rng.log_uniform(0.1, 10.0);
    return RationalTF::continuous(Polynomial::from_roots(zeros, gain), Polynomial::from_roots(poles, 1.0));
}

inline RationalTF random_stable_discrete(Rng& rng, int max_order, double ts) {
    const int n = rng.uniform_int(1, max_order);
    const int m = rng.uniform_int(0, n);
    std::vector<Complex> poles;
    while (static_cast<int>(poles.size()) < n) {
        if (n - static_cast<int>(poles.size()) >= 2 && rng.coin()) {
            const double rad = rng.uniform(0.0, 0.9);
            const double th = rng.uniform(0.05, 3.1);
            poles.emplace_back(rad * std::cos(th), rad * std::sin(th));
            poles.emplace_back(rad * std::cos(th), -rad * std::sin(th));
        } else {
            poles.emplace_back(rng.uniform(-0.9, 0.9), 0.0);
        }
    }
    const auto zeros = random_roots(rng, m, -1.5, 1.5, 1.5);
    const double gain = (rng.coin() ? 1.0 : -1.0) * rng.log_uniform(0.1, 10.0);
    return RationalTF::discrete(Polynomial::from_roots(zeros, gain), Polynomial::from_roots(poles, 1.0), ts);
}

// Magnitude evaluation independent of the library's response path.
inline double reference_magnitude(const RationalTF& sys, double f_hz) {
    const double w = 2.0 * 3.14159265358979323846 * f_hz;
    const Complex point = sys.is_discrete() ? std::polar(1.0, w * *sys.ts) : Complex(0.0, w);
    Complex n(0.0, 0.0), d(0.0, 0.0);
    const auto& nc = sys.num.coeffs();
    const auto& dc = sys.den.coeffs();
    for (auto it = nc.rbegin(); it != nc.rend(); ++it) n = n * point + *it;
    for (auto it = dc.rbegin(); it != dc.rend(); ++it) d = d * point + *it;
    return std::abs(n / d);
}

}  // namespace test_helpers
