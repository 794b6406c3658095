#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "platoon_hinf/errors.hpp"

namespace platoon_hinf {

using Complex = std::complex<double>;

// Real polynomial, coefficients stored in ascending powers. Exact trailing
// zeros are trimmed on construction; the zero polynomial is stored as {0}.
class Polynomial {
  public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { trim(); }
    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static Polynomial one() { return Polynomial({1.0}); }

    // c * x^k
    static Polynomial monomial(int k, double c = 1.0) {
        std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
        v.back() = c;
        return Polynomial(std::move(v));
    }

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    double leading() const { return coeffs_.back(); }

    // Coefficient of x^k, 0 beyond the stored degree.
    double operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    Complex eval(Complex x) const {
        Complex acc(0.0, 0.0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    double eval(double x) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    Polynomial scaled(double k) const {
        std::vector<double> v(coeffs_);
        for (double& c : v) c *= k;
        return Polynomial(std::move(v));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
        return Polynomial(std::move(v));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<double> v(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
        return Polynomial(std::move(v));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::vector<double> v(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(v));
    }

    // Roots via the companion matrix of the monic normalization. Constants
    // have no roots; the zero polynomial has no well-defined root set.
    std::vector<Complex> roots() const {
        if (is_zero()) throw DomainError("roots: zero polynomial");
        const int n = degree();
        if (n == 0) return {};
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) c(i, n - 1) = -coeffs_[static_cast<std::size_t>(i)] / leading();
        for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(c, /*computeEigenvectors=*/false);
        std::vector<Complex> r(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        return r;
    }

    // Real polynomial from a conjugate-closed root set. Near-real roots are
    // flattened; complex ones are greedily paired with their conjugates so
    // rounding noise in the input cannot produce complex coefficients.
    static Polynomial from_roots(std::vector<Complex> roots, double lead) {
        Polynomial p({lead});
        std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return std::abs(a.imag()) < std::abs(b.imag());
        });
        std::vector<bool> used(roots.size(), false);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            const Complex r = roots[i];
            const double scale = 1.0 + std::abs(r);
            if (std::abs(r.imag()) <= 1e-8 * scale) {
                p = p * Polynomial({-r.real(), 1.0});
                continue;
            }
            std::size_t partner = roots.size();
            double best = 1e-6 * scale;
            for (std::size_t j = i + 1; j < roots.size(); ++j) {
                if (used[j]) continue;
                const double dist = std::abs(std::conj(r) - roots[j]);
                if (dist < best) {
                    best = dist;
                    partner = j;
                }
            }
            if (partner < roots.size()) used[partner] = true;
            p = p * Polynomial({std::norm(r), -2.0 * r.real(), 1.0});
        }
        return p;
    }

  private:
    void trim() {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
        while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    }

    std::vector<double> coeffs_;
};

}  // namespace platoon_hinf
