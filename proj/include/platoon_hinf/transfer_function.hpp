#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/polynomial.hpp"

namespace platoon_hinf {

inline constexpr int kMaxTfDegree = 30;

// Proper or improper rational transfer function with an optional exact
// transport delay (seconds). `ts` empty means continuous time (variable s);
// set, it is the sampling period of a discrete-time system (variable z).
// The denominator is normalized monic on construction. The delay is stored
// exactly and only turned into a rational factor on explicit request.
struct RationalTF {
    Polynomial num;
    Polynomial den{{1.0}};
    double delay = 0.0;
    std::optional<double> ts;

    RationalTF() = default;

    static RationalTF continuous(Polynomial n, Polynomial d, double delay_s = 0.0) {
        return make(std::move(n), std::move(d), delay_s, std::nullopt);
    }

    static RationalTF discrete(Polynomial n, Polynomial d, double ts_s, double delay_s = 0.0) {
        if (!(ts_s > 0.0)) throw DomainError("discrete system needs ts > 0");
        return make(std::move(n), std::move(d), delay_s, ts_s);
    }

    // Static gain in continuous time.
    static RationalTF gain(double k) { return continuous(Polynomial({k}), Polynomial::one()); }

    // Static gain living in the same domain as `proto`.
    static RationalTF gain_like(double k, const RationalTF& proto) {
        RationalTF g = RationalTF::gain(k);
        g.ts = proto.ts;
        return g;
    }

    bool is_discrete() const { return ts.has_value(); }

    double sampling_period() const {
        if (!ts) throw DomainError("continuous system has no sampling period");
        return *ts;
    }

    double nyquist_hz() const { return 0.5 / sampling_period(); }

    int order() const { return std::max(num.degree(), den.degree()); }

  private:
    static RationalTF make(Polynomial n, Polynomial d, double delay_s, std::optional<double> ts_s) {
        if (d.is_zero()) throw DomainError("zero denominator");
        if (delay_s < 0.0) throw DomainError("negative delay");
        if (std::max(n.degree(), d.degree()) > kMaxTfDegree)
            throw DomainError("transfer function degree exceeds " + std::to_string(kMaxTfDegree));
        RationalTF sys;
        if (n.is_zero()) {
            // canonical zero: no spurious poles, no delay
            sys.den = Polynomial::one();
            sys.ts = ts_s;
            return sys;
        }
        const double lead = d.leading();
        sys.num = n.scaled(1.0 / lead);
        sys.den = d.scaled(1.0 / lead);
        sys.delay = delay_s;
        sys.ts = ts_s;
        return sys;
    }
};

namespace detail {

inline bool same_domain(const RationalTF& a, const RationalTF& b) {
    if (a.is_discrete() != b.is_discrete()) return false;
    if (!a.is_discrete()) return true;
    const double ta = *a.ts, tb = *b.ts;
    return std::abs(ta - tb) <= 1e-12 * std::max(ta, tb);
}

inline void require_same_domain(const RationalTF& a, const RationalTF& b, const char* op) {
    if (!same_domain(a, b)) throw DomainError(std::string(op) + ": mixed continuous/discrete operands");
}

}  // namespace detail

inline RationalTF tf_scale(const RationalTF& a, double k) {
    RationalTF r = a;
    r.num = r.num.scaled(k);
    return r;
}

inline RationalTF tf_mul(const RationalTF& a, const RationalTF& b) {
    detail::require_same_domain(a, b, "tf_mul");
    if (a.num.is_zero() || b.num.is_zero()) {
        RationalTF zero;
        zero.ts = a.ts;
        return zero;
    }
    RationalTF r = a.is_discrete() ? RationalTF::discrete(a.num * b.num, a.den * b.den, *a.ts)
                                   : RationalTF::continuous(a.num * b.num, a.den * b.den);
    r.delay = a.delay + b.delay;
    return r;
}

// Addition needs a common delay factor; the zero function is the exception
// since 0 * e^{-ds} is delay-free.
inline RationalTF tf_add(const RationalTF& a, const RationalTF& b) {
    detail::require_same_domain(a, b, "tf_add");
    if (a.num.is_zero()) return b;
    if (b.num.is_zero()) return a;
    if (std::abs(a.delay - b.delay) > 1e-12)
        throw DelayAdditionError("tf_add: operands carry different delays");
    const Polynomial n = a.num * b.den + b.num * a.den;
    const Polynomial d = a.den * b.den;
    RationalTF r = a.is_discrete() ? RationalTF::discrete(n, d, *a.ts) : RationalTF::continuous(n, d);
    r.delay = a.delay;
    return r;
}

inline RationalTF tf_sub(const RationalTF& a, const RationalTF& b) { return tf_add(a, tf_scale(b, -1.0)); }

// forward / (1 + forward * loop). Both operands must be delay-free
// rationals; expand any delay first so the closure stays rational.
inline RationalTF tf_feedback(const RationalTF& forward, const RationalTF& loop) {
    detail::require_same_domain(forward, loop, "tf_feedback");
    if (forward.delay != 0.0 || loop.delay != 0.0)
        throw DelayAdditionError("tf_feedback: expand delays before closing a loop");
    const Polynomial n = forward.num * loop.den;
    const Polynomial d = forward.den * loop.den + forward.num * loop.num;
    if (d.is_zero()) throw DomainError("tf_feedback: singular loop closure");
    return forward.is_discrete() ? RationalTF::discrete(n, d, *forward.ts) : RationalTF::continuous(n, d);
}

inline RationalTF tf_inverse(const RationalTF& a) {
    if (a.num.is_zero()) throw DomainError("tf_inverse: zero numerator");
    if (a.delay != 0.0) throw DelayAdditionError("tf_inverse: cannot invert a delayed system");
    return a.is_discrete() ? RationalTF::discrete(a.den, a.num, *a.ts) : RationalTF::continuous(a.den, a.num);
}

// Diagonal Pade approximant of e^{-delay_s * s}. All-pass by construction:
// num(jw) is the conjugate of den(jw).
inline RationalTF pade(double delay_s, int order) {
    if (delay_s < 0.0) throw DomainError("pade: negative delay");
    if (order < 1) throw DomainError("pade: order must be >= 1");
    if (delay_s == 0.0) return RationalTF::gain(1.0);
    const int n = order;
    std::vector<double> nc(static_cast<std::size_t>(n) + 1);
    std::vector<double> dc(static_cast<std::size_t>(n) + 1);
    // c_k = (2n-k)! n! / ((2n)! k! (n-k)!), built by the recurrence
    // c_{k+1} = c_k * (n-k) / ((2n-k)(k+1)).
    double c = 1.0;
    double p = 1.0;  // (-delay)^k
    double q = 1.0;  // delay^k
    for (int k = 0; k <= n; ++k) {
        nc[static_cast<std::size_t>(k)] = c * p;
        dc[static_cast<std::size_t>(k)] = c * q;
        c *= static_cast<double>(n - k) / (static_cast<double>(2 * n - k) * static_cast<double>(k + 1));
        p *= -delay_s;
        q *= delay_s;
    }
    return RationalTF::continuous(Polynomial(std::move(nc)), Polynomial(std::move(dc)));
}

// Replace the stored delay by a rational factor: a Pade approximant in
// continuous time, an exact z^{-k} shift in discrete time (the delay must
// then be an integer number of samples).
inline RationalTF expand_delay(const RationalTF& sys, int pade_order) {
    if (sys.delay == 0.0) return sys;
    if (!sys.is_discrete()) {
        RationalTF r = tf_mul(RationalTF::continuous(sys.num, sys.den), pade(sys.delay, pade_order));
        return r;
    }
    const double steps = sys.delay / *sys.ts;
    const auto k = static_cast<long long>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(k)) > 1e-9)
        throw DomainError("expand_delay: discrete delay is not an integer number of samples");
    return RationalTF::discrete(sys.num, sys.den * Polynomial::monomial(static_cast<int>(k)), *sys.ts);
}

// Bilinear (Tustin) map s -> (2/ts)(z-1)/(z+1). Exact on the imaginary
// axis up to frequency warping; maps the open left half-plane onto the
// open unit disk, so stability is preserved in both directions.
inline RationalTF discretize_tustin(const RationalTF& sys, double ts_s) {
    if (sys.is_discrete()) throw DomainError("discretize_tustin: system is already discrete");
    if (sys.delay != 0.0) throw DelayAdditionError("discretize_tustin: expand the delay first");
    if (!(ts_s > 0.0)) throw DomainError("discretize_tustin: ts must be > 0");
    const int n = std::max(sys.num.degree(), sys.den.degree());
    const Polynomial zm1({-1.0, 1.0});
    const Polynomial zp1({1.0, 1.0});
    // powers of (z-1) and (z+1) up to n
    std::vector<Polynomial> pm(static_cast<std::size_t>(n) + 1), pp(static_cast<std::size_t>(n) + 1);
    pm[0] = Polynomial::one();
    pp[0] = Polynomial::one();
    for (int k = 1; k <= n; ++k) {
        pm[static_cast<std::size_t>(k)] = pm[static_cast<std::size_t>(k - 1)] * zm1;
        pp[static_cast<std::size_t>(k)] = pp[static_cast<std::size_t>(k - 1)] * zp1;
    }
    const double a = 2.0 / ts_s;
    auto map = [&](const Polynomial& poly) {
        Polynomial out;
        double ak = 1.0;
        for (int k = 0; k <= n; ++k) {
            const double ck = poly[static_cast<std::size_t>(k)];
            if (ck != 0.0)
                out = out + (pm[static_cast<std::size_t>(k)] * pp[static_cast<std::size_t>(n - k)]).scaled(ck * ak);
            ak *= a;
        }
        return out;
    };
    return RationalTF::discrete(map(sys.num), map(sys.den), ts_s);
}

namespace detail {

// Roots of a real polynomial folded into conjugate groups: one entry per
// upper-half-plane pair (count 2) or real root (count 1).
struct ConjGroup {
    Complex rep;
    int count;
};

inline std::vector<ConjGroup> conj_groups(const std::vector<Complex>& roots) {
    std::vector<ConjGroup> out;
    for (const Complex& r : roots) {
        if (r.imag() < 0.0) continue;  // counted with its +imag partner
        out.push_back({r, r.imag() > 0.0 ? 2 : 1});
    }
    return out;
}

// An m-fold root comes back from the eigensolver as a ring of m points with
// radius up to ~eps^(1/m); agglomerating the ring recovers the true root as
// the centroid, which symmetric scatter leaves accurate to near roundoff.
inline constexpr double kClusterRadius = 1.5e-3;

struct RootCluster {
    Complex sum{0.0, 0.0};         // count-weighted sum of upper-half reps
    int count = 0;                 // full multiset count
    int matched = 0;
    bool is_real = false;          // set after flattening
    Complex centroid{0.0, 0.0};
    std::vector<Complex> members;  // original roots, conjugates included

    Complex mean() const { return sum / static_cast<double>(count); }
};

inline std::vector<RootCluster> cluster_roots(const std::vector<Complex>& roots, double radius) {
    std::vector<ConjGroup> groups = conj_groups(roots);
    std::stable_sort(groups.begin(), groups.end(), [](const ConjGroup& a, const ConjGroup& b) {
        if (a.rep.real() != b.rep.real()) return a.rep.real() < b.rep.real();
        return a.rep.imag() < b.rep.imag();
    });
    std::vector<RootCluster> out;
    for (const ConjGroup& g : groups) {
        RootCluster* home = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (RootCluster& c : out) {
            const Complex m = c.mean();
            const double d = std::abs(g.rep - m);
            if (d <= radius * (1.0 + std::abs(m)) && d < best) {
                best = d;
                home = &c;
            }
        }
        if (!home) {
            out.emplace_back();
            home = &out.back();
        }
        home->sum += static_cast<double>(g.count) * g.rep;
        home->count += g.count;
        home->members.push_back(g.rep);
        if (g.count == 2) home->members.push_back(std::conj(g.rep));
    }
    for (RootCluster& c : out) {
        const Complex m = c.mean();
        // conjugate symmetry cancels the imaginary part of a real root's
        // scatter ring only across the full multiset, so flatten against
        // the cluster radius rather than the matching tolerance
        c.is_real = std::abs(m.imag()) <= radius * (1.0 + std::abs(m));
        c.centroid = c.is_real ? Complex(m.real(), 0.0) : m;
    }
    return out;
}

// Remaining roots of a cluster after matching. A partially cancelled
// cluster is rebuilt from its centroid (the accurate rendition of the
// multiple root); an untouched one keeps its original members.
inline void emit_cluster(const RootCluster& c, std::vector<Complex>& out) {
    int left = c.count - c.matched;
    if (left == 0) return;
    if (c.matched == 0) {
        out.insert(out.end(), c.members.begin(), c.members.end());
        return;
    }
    if (c.is_real) {
        for (; left > 0; --left) out.push_back(c.centroid);
        return;
    }
    for (; left >= 2; left -= 2) {
        out.push_back(c.centroid);
        out.push_back(std::conj(c.centroid));
    }
    if (left == 1) out.emplace_back(c.centroid.real(), 0.0);
}

// Greedy pairing of numerator roots against denominator roots, working on
// multiplicity clusters so a scattered repeated root still meets its
// counterpart. Returns the surviving roots of each side and the matched
// count.
struct RootCancellation {
    std::vector<Complex> num_roots;
    std::vector<Complex> den_roots;
    int matched = 0;
};

inline RootCancellation match_roots(const std::vector<Complex>& nr, const std::vector<Complex>& dr,
                                    double tol) {
    std::vector<RootCluster> nc = cluster_roots(nr, kClusterRadius);
    std::vector<RootCluster> dc = cluster_roots(dr, kClusterRadius);
    RootCancellation out;
    for (RootCluster& n : nc) {
        while (n.matched < n.count) {
            std::size_t best = dc.size();
            double best_dist = tol * (1.0 + std::abs(n.centroid));
            for (std::size_t j = 0; j < dc.size(); ++j) {
                if (dc[j].matched == dc[j].count) continue;
                const double dist = std::abs(n.centroid - dc[j].centroid);
                if (dist <= best_dist) {
                    best_dist = dist;
                    best = j;
                }
            }
            if (best == dc.size()) break;
            int take = std::min(n.count - n.matched, dc[best].count - dc[best].matched);
            // complex clusters hold whole conjugate pairs; keep takes even
            if (!n.is_real || !dc[best].is_real) take -= take % 2;
            if (take == 0) break;
            n.matched += take;
            dc[best].matched += take;
            out.matched += take;
        }
        emit_cluster(n, out.num_roots);
    }
    for (const RootCluster& d : dc) emit_cluster(d, out.den_roots);
    return out;
}

// Probe points on rings around the root belt, kept away from every root so
// polynomial evaluations there stay well conditioned.
inline std::vector<Complex> probe_points(const std::vector<Complex>& roots) {
    double mag = 1.0;
    for (const Complex& r : roots) mag = std::max(mag, std::abs(r));
    std::vector<Complex> pts;
    const double rings[] = {0.45 * mag, 0.85 * mag, 1.35 * mag + 0.1, 2.3 * mag + 0.5};
    int ring = 0;
    for (double rho : rings) {
        ++ring;
        for (int i = 0; i < 16; ++i) {
            const double theta = (i + 0.137 * ring) * (6.283185307179586 / 16.0);
            const Complex z = std::polar(rho, theta);
            bool clear = true;
            for (const Complex& r : roots)
                if (std::abs(z - r) < 0.08 * (1.0 + std::abs(z))) { clear = false; break; }
            if (clear) pts.push_back(z);
            if (pts.size() >= 12) return pts;
        }
    }
    // fallback ring far outside the belt; never blocked by the distance test
    const double far = 5.0 * mag + 3.0;
    for (int i = 0; static_cast<int>(pts.size()) < 8; ++i)
        pts.push_back(std::polar(far, (i + 0.5) * 0.7853981633974483));
    return pts;
}

}  // namespace detail

// Cancel common numerator/denominator factors found by root matching. The
// match tolerance absorbs eigensolver scatter on repeated roots; the
// candidate is accepted only if the reduced form agrees with the original
// functionally at probe points away from every root, so a false match never
// changes the system beyond verify_tol.
inline RationalTF reduce(const RationalTF& sys, double root_tol = 3e-6, double verify_tol = 1e-9) {
    if (sys.num.is_zero() || sys.num.degree() == 0 || sys.den.degree() == 0) return sys;
    const std::vector<Complex> nr = sys.num.roots();
    const std::vector<Complex> dr = sys.den.roots();
    const auto cancel = detail::match_roots(nr, dr, root_tol);
    if (cancel.matched == 0) return sys;
    const Polynomial n = Polynomial::from_roots(cancel.num_roots, sys.num.leading());
    const Polynomial d = Polynomial::from_roots(cancel.den_roots, sys.den.leading());
    std::vector<Complex> all = nr;
    all.insert(all.end(), dr.begin(), dr.end());
    for (const Complex& z : detail::probe_points(all)) {
        const Complex va = sys.num.eval(z) * d.eval(z);
        const Complex vb = sys.den.eval(z) * n.eval(z);
        if (std::abs(va - vb) > verify_tol * (std::abs(va) + std::abs(vb))) return sys;
    }
    RationalTF r = sys.is_discrete() ? RationalTF::discrete(n, d, *sys.ts) : RationalTF::continuous(n, d);
    r.delay = sys.delay;
    return r;
}

// Product with cross-cancellation (a.num vs b.den and b.num vs a.den)
// performed before the result is assembled, so structurally cancelling
// factors never inflate the degree past the cap.
inline RationalTF tf_mul_reduced(const RationalTF& a, const RationalTF& b, double root_tol = 1e-7) {
    detail::require_same_domain(a, b, "tf_mul_reduced");
    if (a.num.is_zero() || b.num.is_zero()) {
        RationalTF zero;
        zero.ts = a.ts;
        return zero;
    }
    auto roots_of = [](const Polynomial& p) {
        return p.degree() > 0 ? p.roots() : std::vector<Complex>{};
    };
    const auto ab = detail::match_roots(roots_of(a.num), roots_of(b.den), root_tol);
    const auto ba = detail::match_roots(roots_of(b.num), roots_of(a.den), root_tol);
    RationalTF r;
    if (ab.matched == 0 && ba.matched == 0) {
        r = a.is_discrete() ? RationalTF::discrete(a.num * b.num, a.den * b.den, *a.ts)
                            : RationalTF::continuous(a.num * b.num, a.den * b.den);
    } else {
        std::vector<Complex> nr = ab.num_roots;
        nr.insert(nr.end(), ba.num_roots.begin(), ba.num_roots.end());
        std::vector<Complex> dr = ba.den_roots;
        dr.insert(dr.end(), ab.den_roots.begin(), ab.den_roots.end());
        const Polynomial n = Polynomial::from_roots(nr, a.num.leading() * b.num.leading());
        const Polynomial d = Polynomial::from_roots(dr, a.den.leading() * b.den.leading());
        r = a.is_discrete() ? RationalTF::discrete(n, d, *a.ts) : RationalTF::continuous(n, d);
    }
    r.delay = a.delay + b.delay;
    return r;
}

}  // namespace platoon_hinf
