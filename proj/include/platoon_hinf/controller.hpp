#pragma once

#include <cstddef>
#include <vector>

#include "platoon_hinf/errors.hpp"
#include "platoon_hinf/polynomial.hpp"
#include "platoon_hinf/transfer_function.hpp"

namespace platoon_hinf {

inline constexpr int kMinControllerOrder = 1;
inline constexpr int kMaxControllerOrder = 10;

// Fixed-order compensator K(z) plus the flat coordinate vector the search
// runs on. Layout: num c0..c_order, then den d0..d_{order-1}; den leading
// coefficient is pinned to 1, so the parameterized den always has degree
// exactly `order`. The stored tf may still degenerate (all-zero numerator
// collapses to the canonical zero system).
struct Controller {
    RationalTF tf;
    int order = 0;
    std::vector<double> params;
};

inline std::size_t controller_param_count(int order) {
    return 2 * static_cast<std::size_t>(order) + 1;
}

inline void require_controller_order(int order) {
    if (order < kMinControllerOrder || order > kMaxControllerOrder)
        throw ConfigError("controller order must be between 1 and 10");
}

inline Controller controller_from_params(const std::vector<double>& params, int order, double ts) {
    require_controller_order(order);
    if (params.size() != controller_param_count(order))
        throw DomainError("controller parameter vector has the wrong length");
    const std::size_t n = static_cast<std::size_t>(order);
    std::vector<double> num(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(n + 1));
    std::vector<double> den(params.begin() + static_cast<std::ptrdiff_t>(n + 1), params.end());
    den.push_back(1.0);
    Controller c;
    c.order = order;
    c.params = params;
    c.tf = RationalTF::discrete(Polynomial(std::move(num)), Polynomial(std::move(den)), ts);
    return c;
}

// Coordinates for an existing compensator; den is normalized monic, so a
// vector produced here rebuilds the same tf up to that normalization and a
// params -> tf -> params round trip is exact.
inline Controller controller_from_tf(const RationalTF& k) {
    if (!k.is_discrete()) throw DomainError("controller must be discrete");
    if (k.delay != 0.0) throw DelayAdditionError("controller must be delay-free");
    const int order = k.den.degree();
    require_controller_order(order);
    if (k.num.degree() > order) throw DomainError("controller numerator degree exceeds its order");
    const double lead = k.den.leading();
    const std::size_t n = static_cast<std::size_t>(order);
    std::vector<double> params(controller_param_count(order), 0.0);
    for (std::size_t i = 0; i <= static_cast<std::size_t>(k.num.degree()); ++i)
        params[i] = k.num[i] / lead;
    for (std::size_t i = 0; i < n; ++i) params[n + 1 + i] = k.den[i] / lead;
    return controller_from_params(params, order, *k.ts);
}

}  // namespace platoon_hinf
