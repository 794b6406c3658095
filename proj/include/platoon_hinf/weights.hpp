#pragma once

#include <cmath>
#include <optional>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace platoon_hinf {

// Discrete shaping filters for the synthesis channels. ws shapes the
// sensitivity (large at low frequency), wt the predecessor transfer (large
// at high frequency). wu optionally limits control effort.
struct WeightSet {
    RationalTF ws;
    RationalTF wt;
    std::optional<RationalTF> wu;

    void validate() const {
        check(ws, "ws");
        check(wt, "wt");
        if (wu) check(*wu, "wu");
        if (!detail::same_domain(ws, wt) || (wu && !detail::same_domain(ws, *wu)))
            throw ConfigError("weights must share one sampling period");
    }

  private:
    static void check(const RationalTF& w, const char* name) {
        if (!w.is_discrete()) throw ConfigError(std::string(name) + ": weight must be discrete");
        if (w.num.degree() > w.den.degree()) throw ConfigError(std::string(name) + ": weight must be proper");
        if (!is_stable(w)) throw ConfigError(std::string(name) + ": weight must be stable");
        if (w.delay != 0.0) throw ConfigError(std::string(name) + ": weight must be delay-free");
    }
};

// ws = 0.035 z^2/(z-0.99)^2, wt = 0.3 (z-0.99)^2/z^2. Their product is the
// constant 0.035*0.3 = 0.0105; ws(1) = 350 pins the low-frequency error
// attenuation, wt rolls in near the loop bandwidth.
inline WeightSet default_weights(double ts) {
    if (!(ts > 0.0)) throw ConfigError("ts must be > 0");
    WeightSet w;
    const Polynomial corner({0.9801, -1.98, 1.0});  // (z - 0.99)^2
    w.ws = RationalTF::discrete(Polynomial::monomial(2, 0.035), corner, ts);
    w.wt = RationalTF::discrete(corner.scaled(0.3), Polynomial::monomial(2), ts);
    return w;
}

}  // namespace platoon_hinf
