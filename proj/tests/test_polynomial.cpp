#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <vector>

#include "platoon_hinf/polynomial.hpp"
#include "test_helpers.hpp"

using platoon_hinf::Complex;
using platoon_hinf::Polynomial;

TEST_CASE("polynomial construction trims trailing zeros", "[polynomial]") {
    const Polynomial p({1.0, 2.0, 0.0, 0.0});
    REQUIRE(p.degree() == 1);
    REQUIRE(p.coeffs() == std::vector<double>{1.0, 2.0});

    const Polynomial z({0.0, 0.0});
    REQUIRE(z.is_zero());
    REQUIRE(z.degree() == 0);

    REQUIRE(Polynomial().is_zero());
    REQUIRE_FALSE(Polynomial({0.0, 1.0}).is_zero());
}

TEST_CASE("polynomial evaluation matches the power expansion", "[polynomial]") {
    const Polynomial p({3.0, -1.0, 2.0});  // 3 - x + 2x^2
    REQUIRE(p.eval(0.0) == 3.0);
    REQUIRE(p.eval(2.0) == Catch::Approx(3.0 - 2.0 + 8.0));
    const Complex v = p.eval(Complex(1.0, 1.0));
    // 3 - (1+i) + 2(1+i)^2 = 3 - 1 - i + 4i = 2 + 3i
    REQUIRE(v.real() == Catch::Approx(2.0));
    REQUIRE(v.imag() == Catch::Approx(3.0));
}

TEST_CASE("polynomial arithmetic", "[polynomial]") {
    const Polynomial a({1.0, 1.0});   // 1 + x
    const Polynomial b({-1.0, 1.0});  // -1 + x

    SECTION("sum and difference") {
        REQUIRE((a + b).coeffs() == std::vector<double>{0.0, 2.0});
        REQUIRE((a - b).coeffs() == std::vector<double>{2.0});
    }
    SECTION("product of conjugate pair") {
        REQUIRE((a * b).coeffs() == std::vector<double>{-1.0, 0.0, 1.0});
    }
    SECTION("multiplication by zero collapses") {
        REQUIRE((a * Polynomial()).is_zero());
    }
    SECTION("degree adds under multiplication") {
        test_helpers::Rng rng(11);
        for (int k = 0; k < 20; ++k) {
            std::vector<double> ca, cb;
            for (int i = 0; i <= rng.uniform_int(0, 5); ++i) ca.push_back(rng.uniform(-2.0, 2.0));
            for (int i = 0; i <= rng.uniform_int(0, 5); ++i) cb.push_back(rng.uniform(-2.0, 2.0));
            ca.back() = ca.back() == 0.0 ? 1.0 : ca.back();
            cb.back() = cb.back() == 0.0 ? 1.0 : cb.back();
            const Polynomial pa(ca), pb(cb);
            REQUIRE((pa * pb).degree() == pa.degree() + pb.degree());
        }
    }
}

TEST_CASE("polynomial roots of a factored cubic", "[polynomial]") {
    // (x-1)(x-2)(x-3) = -6 + 11x - 6x^2 + x^3
    const Polynomial p({-6.0, 11.0, -6.0, 1.0});
    auto r = p.roots();
    REQUIRE(r.size() == 3);
    std::vector<double> re;
    for (const auto& x : r) {
        REQUIRE(std::abs(x.imag()) < 1e-9);
        re.push_back(x.real());
    }
    std::sort(re.begin(), re.end());
    REQUIRE(re[0] == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(re[1] == Catch::Approx(2.0).epsilon(1e-9));
    REQUIRE(re[2] == Catch::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("polynomial roots of x^2 + 1", "[polynomial]") {
    auto r = Polynomial({1.0, 0.0, 1.0}).roots();
    REQUIRE(r.size() == 2);
    std::sort(r.begin(), r.end(), [](const Complex& a, const Complex& b) { return a.imag() < b.imag(); });
    REQUIRE(r[0].real() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(r[0].imag() == Catch::Approx(-1.0).epsilon(1e-12));
    REQUIRE(r[1].imag() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roots of constants and the zero polynomial", "[polynomial]") {
    REQUIRE(Polynomial({4.0}).roots().empty());
    REQUIRE_THROWS_AS(Polynomial().roots(), platoon_hinf::DomainError);
}

TEST_CASE("from_roots round trip", "[polynomial]") {
    test_helpers::Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 7);
        const auto roots = test_helpers::random_roots(rng, n, -2.0, 2.0, 3.0);
        const double lead = rng.uniform(0.5, 2.0);
        const Polynomial p = Polynomial::from_roots(roots, lead);
        REQUIRE(p.degree() == n);
        REQUIRE(p.leading() == Catch::Approx(lead).epsilon(1e-12));
        for (const auto& r : roots) {
            REQUIRE(std::abs(p.eval(r)) < 1e-8 * std::max(1.0, p.max_abs_coeff()));
        }
    }
}
