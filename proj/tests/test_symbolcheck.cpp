#include <cmath>
#include <random>

#include "doctest.h"
#include "carlab/symbolcheck.hpp"
#include "generators.hpp"

using namespace carlab::symbol;
using carlab::poly::Complex;
using carlab::poly::MultiIndex;
using carlab::poly::sum_of_squares;

namespace {

// Recorded sphere minimum for m = 1, n = 1.
constexpr double kEllipticRegression = 2.0 / 3.0;

std::vector<double> unit_random(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> g;
    std::vector<double> z(d);
    double s = 0.0;
    for (auto& v : z) {
        v = g(rng);
        s += v * v;
    }
    for (auto& v : z) v /= std::sqrt(s);
    return z;
}

}  // namespace

TEST_SUITE("symbolcheck") {

TEST_CASE("factorization identities hold for small m and n") {
    for (int m = 1; m <= 3; ++m) {
        for (int n = 1; n <= 3; ++n) {
            const auto r = verify_factorization(m, n);
            INFO("m=" << m << " n=" << n);
            CHECK(r.chain_rule);
            CHECK(r.divisibility);
            CHECK(r.shifted_gradient);
            CHECK(r.shifted_identities);
            CHECK(r.remainder_norm <= kRemainderTolerance);
            CHECK(r.pass);
            if (m == 1) CHECK(r.ptilde.is_zero());
        }
    }
}

TEST_CASE("quotient for m = 2 is the constant 4") {
    // d_n^2 (P_2^2) = 8 xi_n^2 + 4 P_2 and 2! (d_n P_2)^2 = 8 xi_n^2
    for (std::size_t n = 1; n <= 3; ++n) {
        const auto p2 = sum_of_squares(n);
        const auto xn = carlab::poly::Polynomial::variable(n, n - 1);
        const auto second = derivative(p2.pow(2), MultiIndex::unit(n, n - 1, 2));
        CHECK(second.approx_equal(8.0 * xn.pow(2) + 4.0 * p2));
    }
    const auto r = verify_factorization(2, 2);
    CHECK(r.ptilde.degree() == 0);
    CHECK(std::abs(r.ptilde.coefficient(MultiIndex(r.ptilde.dimension())) - Complex(4.0)) <= 1e-12);
}

TEST_CASE("shifted gradient with a formal tau") {
    for (std::size_t n = 1; n <= 3; ++n) {
        const auto dn = 2.0 * carlab::poly::Polynomial::variable(n, n - 1);
        const auto s = shift_by_formal_tau(dn);
        REQUIRE(s.dimension() == n + 1);
        CHECK(s.terms().size() == 2);
        CHECK(s.coefficient(MultiIndex::unit(n + 1, n - 1)) == Complex(2.0));
        CHECK(std::abs(s.coefficient(MultiIndex::unit(n + 1, n)) - Complex(0.0, -2.0)) <= 1e-15);
    }
}

TEST_CASE("left form examples") {
    for (int m = 1; m <= 3; ++m) {
        const auto f = lhs_form_39(m, 1);
        const std::vector<double> z{0.0, 1.0, 0.0};
        CHECK(f(z) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto f = lhs_form_39(1, 1);
    const std::vector<double> z{1.0, 0.0, 0.0};
    CHECK(f(z) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("right form examples") {
    const auto g = rhs_form_39(1, 1);
    const std::vector<double> z{0.0, 1.0, 0.0};
    CHECK(g(z) == doctest::Approx(1.0).epsilon(1e-14));
    // eta~^4 + (1 - eta~^2)^2 at eta~^2 = 1/2
    const std::vector<double> mid{std::sqrt(0.25), std::sqrt(0.5), std::sqrt(0.25)};
    CHECK(g(mid) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("property: forms are homogeneous of degree 4m") {
    std::mt19937_64 rng(71);
    for (int m = 1; m <= 3; ++m) {
        for (int n = 1; n <= 2; ++n) {
            const auto f = lhs_form_39(m, n);
            const auto g = rhs_form_39(m, n);
            CHECK(f.degree() == 4 * m);
            for (int trial = 0; trial < 10; ++trial) {
                const auto z = unit_random(rng, f.arity());
                const double lambda = gen::uniform(rng, 0.5, 2.0);
                std::vector<double> lz(z);
                for (auto& v : lz) v *= lambda;
                const double scale = std::pow(lambda, 4 * m);
                CHECK(std::abs(f(lz) - scale * f(z)) <= 1e-9 * std::abs(scale * f(z)));
                CHECK(std::abs(g(lz) - scale * g(z)) <= 1e-9 * std::abs(scale * g(z)));
                std::vector<double> twice(z);
                for (auto& v : twice) v *= 2.0;
                CHECK(std::abs(f(twice) - std::pow(2.0, 4 * m) * f(z)) <= 1e-12 * std::pow(2.0, 4 * m) * f(z));
            }
        }
    }
}

TEST_CASE("sphere minimum examples") {
    for (int m = 1; m <= 2; ++m) {
        const auto g = rhs_form_39(m, 2);
        const auto r = min_ratio_on_sphere(g, g, kMinSphereSamples);
        CHECK(r.min_value == doctest::Approx(1.0).epsilon(1e-12));
    }

    const auto f = lhs_form_39(1, 1);
    const auto g = rhs_form_39(1, 1);
    const auto base = min_ratio_on_sphere(f, g, 20000, 1);
    const auto scaled = min_ratio_on_sphere(f.scaled(7.0), g, 20000, 1);
    CHECK(scaled.min_value == doctest::Approx(7.0 * base.min_value).epsilon(1e-12));
    CHECK(base.min_value > 0.0);
    CHECK(base.min_value == doctest::Approx(kEllipticRegression).epsilon(1e-6));

    double norm = 0.0;
    for (double v : base.argmin) norm += v * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
    CHECK(f(base.argmin) / g(base.argmin) == doctest::Approx(base.min_value).epsilon(1e-12));
}

TEST_CASE("sphere minimum lies below every coarse sample") {
    const auto f = lhs_form_39(2, 1);
    const auto g = rhs_form_39(2, 1);
    const std::uint64_t seed = 3;
    const auto r = min_ratio_on_sphere(f, g, kMinSphereSamples, seed);
    for (const auto& z : sphere_points(f.arity(), kMinSphereSamples, seed))
        CHECK(r.min_value <= f(z) / g(z));
}

TEST_CASE("sphere minimum is stable across seeds") {
    const auto f = lhs_form_39(1, 1);
    const auto g = rhs_form_39(1, 1);
    const double ref = min_ratio_on_sphere(f, g, 20000, 1).min_value;
    for (std::uint64_t seed : {2, 3}) {
        const double v = min_ratio_on_sphere(f, g, 20000, seed).min_value;
        CHECK(std::abs(v - ref) <= 0.01 * ref);
    }
}

TEST_CASE("sphere minimum is independent of worker count") {
    const auto f = lhs_form_39(1, 2);
    const auto g = rhs_form_39(1, 2);
    const auto a = min_ratio_on_sphere(f, g, 12000, 5, 1);
    const auto b = min_ratio_on_sphere(f, g, 12000, 5, 4);
    CHECK(a.min_value == b.min_value);
    CHECK(a.argmin == b.argmin);
}

TEST_CASE("right-only minimum for m = 1, n = 1") {
    const auto g = rhs_form_39(1, 1);
    const HomogeneousForm one([](std::span<const double> z) {
        double s = 0.0;
        for (double v : z) s += v * v;
        return s * s;
    }, 4, 1, 1);
    const auto r = min_ratio_on_sphere(g, one, 20000);
    CHECK(std::abs(r.min_value - kRhsMinimumM1N1) <= 1e-6);
}

TEST_CASE("sphere scan errors") {
    const auto f = lhs_form_39(1, 1);
    const HomogeneousForm zero([](std::span<const double>) { return 0.0; }, 4, 1, 1);
    CHECK_THROWS_AS(min_ratio_on_sphere(f, zero, kMinSphereSamples), std::domain_error);
    CHECK_THROWS_AS(min_ratio_on_sphere(f, rhs_form_39(1, 1), 100), std::invalid_argument);
    CHECK_THROWS_AS(min_ratio_on_sphere(f, rhs_form_39(1, 2), kMinSphereSamples), std::invalid_argument);
    CHECK_THROWS_AS(lhs_form_39(0, 1), std::invalid_argument);
}

TEST_CASE("sphere points have unit norm") {
    for (const auto& z : sphere_points(4, 200, 9)) {
        double s = 0.0;
        for (double v : z) s += v * v;
        CHECK(std::abs(s - 1.0) <= 1e-14);
    }
}

TEST_CASE("anisotropic form agrees with the left form at eta = 0") {
    std::mt19937_64 rng(73);
    for (int m = 1; m <= 3; ++m) {
        const auto f = lhs_form_39(m, 2);
        for (int trial = 0; trial < 10; ++trial) {
            auto z = gen::real_point(rng, 4, 2.0);
            z[1] = 0.0;
            CHECK(lhs_form_38(m, 2, z) == doctest::Approx(f(z)).epsilon(1e-13));
        }
    }
}

TEST_CASE("property: anisotropic scaling through the bijection") {
    // (tau, eta, xi) -> (l tau, l^{2m} eta, l xi) scales both sides by l^{4m}
    std::mt19937_64 rng(79);
    for (int m = 1; m <= 3; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto z = gen::real_point(rng, 3, 1.0);
            const double l = gen::uniform(rng, 0.5, 2.0);
            const std::vector<double> lz{l * z[0], std::pow(l, 2 * m) * z[1], l * z[2]};
            const double scale = std::pow(l, 4 * m);
            CHECK(lhs_form_38(m, 1, lz) == doctest::Approx(scale * lhs_form_38(m, 1, z)).epsilon(1e-10));
        }
    }
}

TEST_CASE("anisotropic Monte Carlo check for m = 1, n = 1") {
    const auto f = lhs_form_39(1, 1);
    const auto g = rhs_form_39(1, 1);
    const auto sphere = min_ratio_on_sphere(f, g, 20000);
    const auto r = check_38_from_39(1, 1, 100000, sphere.min_value);
    CHECK(r.pass);
    CHECK(r.violations == 0);
    CHECK(r.trials == 100000);
    CHECK(r.worst_ratio >= 1.0 - 1e-6);

    // an inflated constant must be caught
    const auto bad = check_38_from_39(1, 1, 20000, 10.0 * sphere.min_value);
    CHECK_FALSE(bad.pass);
    CHECK(bad.violations > 0);
}

TEST_CASE("reports serialize") {
    const auto r = verify_factorization(2, 1);
    const auto j = r.to_json();
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("m").get<int>() == 2);
}

}  // TEST_SUITE
