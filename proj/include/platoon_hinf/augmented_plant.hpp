#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "platoon_hinf/analysis.hpp"
#include "platoon_hinf/platoon.hpp"
#include "platoon_hinf/transfer_function.hpp"
#include "platoon_hinf/weights.hpp"

namespace platoon_hinf {

// One generalized-plant entry, kept as a product of low-order factors.
// flatten() multiplies the factors into the printed rational block;
// response() multiplies their pointwise values instead, which stays
// accurate near unit-circle pole clusters where the flattened
// coefficients cancel catastrophically.
struct TFProduct {
    std::vector<RationalTF> factors;

    Complex response(double f_hz) const {
        Complex v(1.0, 0.0);
        for (const RationalTF& s : factors) v *= eval_at(s, f_hz);
        return v;
    }

    RationalTF flatten() const {
        if (factors.empty()) throw DomainError("empty plant entry");
        RationalTF r = factors.front();
        for (std::size_t i = 1; i < factors.size(); ++i) r = tf_mul(r, factors[i]);
        return r;
    }
};

// Two-input generalized plant: exogenous reference r and control u. Each
// row maps (r, u) to one performance output; the measurement row feeds the
// controller, closing u = K * y_meas.
struct GeneralizedPlant {
    struct Row {
        TFProduct from_r;
        TFProduct from_u;
        std::string name;
    };
    std::vector<Row> performance;
    Row measurement;
};

// Rows: weighted sensitivity, optional weighted control effort, weighted
// predecessor transfer, raw predecessor transfer; measurement r - G*H*u.
inline GeneralizedPlant augmented_plant_acc(const PlatoonConfig& cfg, const WeightSet& w) {
    w.validate();
    const DiscreteBlocks b = discretize_blocks(cfg);
    const RationalTF one = RationalTF::gain_like(1.0, b.g);
    const RationalTF neg = RationalTF::gain_like(-1.0, b.g);
    const RationalTF zero = RationalTF::gain_like(0.0, b.g);
    GeneralizedPlant p;
    p.performance.push_back({{{w.ws}}, {{neg, w.ws, b.g, b.h}}, "weighted_sensitivity"});
    if (w.wu) p.performance.push_back({{{zero}}, {{neg, *w.wu}}, "weighted_control"});
    p.performance.push_back({{{zero}}, {{w.wt, b.g}}, "weighted_transfer"});
    p.performance.push_back({{{zero}}, {{b.g}}, "transfer"});
    p.measurement = {{{one}}, {{neg, b.g, b.h}}, "spacing_error"};
    return p;
}

// Feedforward variant: the reference path through the wireless delay D and
// the inverse spacing policy shows up in the r column.
inline GeneralizedPlant augmented_plant_cacc(const PlatoonConfig& cfg, const WeightSet& w) {
    w.validate();
    const DiscreteBlocks b = discretize_blocks(cfg);
    const RationalTF one = RationalTF::gain_like(1.0, b.g);
    const RationalTF neg = RationalTF::gain_like(-1.0, b.g);
    const RationalTF zero = RationalTF::gain_like(0.0, b.g);
    const RationalTF one_minus_d = tf_sub(one, b.d);
    const RationalTF h_inv = tf_inverse(b.h);
    GeneralizedPlant p;
    p.performance.push_back(
        {{{w.ws, one_minus_d}}, {{neg, w.ws, b.g, b.h}}, "weighted_sensitivity"});
    if (w.wu) p.performance.push_back({{{zero}}, {{neg, *w.wu}}, "weighted_control"});
    p.performance.push_back({{{w.wt, b.d, h_inv}}, {{w.wt, b.g}}, "weighted_transfer"});
    p.performance.push_back({{{b.d, h_inv}}, {{b.g}}, "transfer"});
    p.measurement = {{{one_minus_d}}, {{neg, b.g, b.h}}, "spacing_error"};
    return p;
}

// Close u = K * y_meas at one frequency and return the r -> performance[idx]
// response. The closure is the complex Schur complement per point; a
// rational closure would duplicate the weight denominators and lose the
// low-frequency channel values to coefficient cancellation.
inline Complex lft_channel_response(const GeneralizedPlant& p, const RationalTF& k,
                                    std::size_t idx, double f_hz) {
    if (idx >= p.performance.size()) throw DomainError("lft_channel_response: row index out of range");
    const Complex kv = eval_at(k, f_hz);
    const Complex u_over_r =
        kv * p.measurement.from_r.response(f_hz) / (1.0 - p.measurement.from_u.response(f_hz) * kv);
    const GeneralizedPlant::Row& row = p.performance[idx];
    return row.from_r.response(f_hz) + row.from_u.response(f_hz) * u_over_r;
}

}  // namespace platoon_hinf
