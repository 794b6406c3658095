#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "platoon_hinf/errors.hpp"

namespace platoon_hinf {

struct NelderMeadOptions {
    int max_iters = 400;     // simplex update steps, not function evaluations
    double init_step = 0.25; // absolute offset building the start simplex
    double f_tol = 1e-10;
    double x_tol = 1e-10;
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

// Derivative-free simplex descent (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5). Fully deterministic: ordering ties break on the older
// vertex index, so identical inputs trace identical paths.
template <class F>
NelderMeadResult nelder_mead(F&& f, const std::vector<double>& x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (n == 0) throw DomainError("nelder_mead: empty start point");
    if (opt.max_iters < 1) throw DomainError("nelder_mead: max_iters must be >= 1");

    NelderMeadResult out;
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        xs[i + 1][i] += opt.init_step * std::max(1.0, std::abs(x0[i]));
    for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(xs[i]);

    std::vector<std::size_t> ord(n + 1);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    auto sort_simplex = [&] {
        std::stable_sort(ord.begin(), ord.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    };

    std::vector<double> centroid(n), xr(n), xt(n);
    for (; out.iterations < opt.max_iters; ++out.iterations) {
        sort_simplex();
        const std::size_t best = ord.front(), worst = ord.back();
        const std::size_t second_worst = ord[n - 1];

        double f_spread = 0.0, x_spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            f_spread = std::max(f_spread, std::abs(fs[i] - fs[best]));
            for (std::size_t j = 0; j < n; ++j)
                x_spread = std::max(x_spread, std::abs(xs[i][j] - xs[best][j]));
        }
        if (f_spread <= opt.f_tol * (1.0 + std::abs(fs[best])) && x_spread <= opt.x_tol) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j) xr[j] = 2.0 * centroid[j] - xs[worst][j];
        const double fr = eval(xr);

        if (fr < fs[best]) {
            for (std::size_t j = 0; j < n; ++j) xt[j] = centroid[j] + 2.0 * (xr[j] - centroid[j]);
            const double fe = eval(xt);
            if (fe < fr) {
                xs[worst] = xt;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[second_worst]) {
            xs[worst] = xr;
            fs[worst] = fr;
            continue;
        }
        if (fr < fs[worst]) {
            // outside contraction
            for (std::size_t j = 0; j < n; ++j) xt[j] = centroid[j] + 0.5 * (xr[j] - centroid[j]);
            const double fc = eval(xt);
            if (fc <= fr) {
                xs[worst] = xt;
                fs[worst] = fc;
                continue;
            }
        } else {
            // inside contraction
            for (std::size_t j = 0; j < n; ++j)
                xt[j] = centroid[j] - 0.5 * (centroid[j] - xs[worst][j]);
            const double fc = eval(xt);
            if (fc < fs[worst]) {
                xs[worst] = xt;
                fs[worst] = fc;
                continue;
            }
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j)
                xs[i][j] = xs[best][j] + 0.5 * (xs[i][j] - xs[best][j]);
            fs[i] = eval(xs[i]);
        }
    }

    sort_simplex();
    out.x = xs[ord.front()];
    out.fx = fs[ord.front()];
    return out;
}

}  // namespace platoon_hinf
