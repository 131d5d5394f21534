#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "carlab/gridops.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace carlab::grid;
using namespace std::complex_literals;
using carlab::poly::sum_of_squares;

namespace {

// Half extent 4, sigma = 4/8.
const Grid kLine({4.0}, {256});
constexpr double kSigma = 0.5;
// Below 1e-16 at the padded box edge.
constexpr double kNarrow = 0.35;

GridFunction centered_gaussian(const Grid& g, double sigma = kSigma) {
    const std::vector<double> c(g.dimension(), 0.0);
    return gaussian(g, c, sigma);
}

double max_abs(std::span<const Complex> v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_SUITE("gridops") {

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid({1.0}, {100}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({1.0}, {8}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({-1.0}, {64}), std::invalid_argument);
    CHECK_THROWS_AS(Grid({1.0, 1.0}, {64}), std::invalid_argument);
    const Grid g({1.0, 2.0}, {32, 64});
    CHECK(g.size() == 32 * 64);
    CHECK(g.stride(1) == 1);
    CHECK(g.stride(0) == 64);
    CHECK(g.spacing(1) == doctest::Approx(4.0 / 64));
    CHECK(g.refined(2).count(0) == 64);
}

TEST_CASE("index range covers exactly the box") {
    const Grid g({1.0}, {64});
    const auto r = index_range(g, Box::centered({0.5}));
    CHECK(g.coordinate(0, r.first[0]) >= -0.5);
    CHECK(g.coordinate(0, r.first[0] - 1) < -0.5);
    CHECK(g.coordinate(0, r.last[0]) <= 0.5);
    CHECK(g.coordinate(0, r.last[0] + 1) > 0.5);
}

TEST_CASE("spectral derivative of a Gaussian") {
    const GridFunction f = centered_gaussian(kLine);
    const GridFunction d = spectral_derivative(f, MultiIndex{1});
    std::vector<Complex> exact(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = kLine.coordinate(0, i);
        exact[i] = -1i * (-x / (kSigma * kSigma)) * f[i];
    }
    CHECK(max_abs_diff(d.samples(), exact) / max_abs(exact) <= 1e-8);
}

TEST_CASE("zero-order derivative is the identity") {
    const GridFunction f = centered_gaussian(kLine);
    const GridFunction d = spectral_derivative(f, MultiIndex{0});
    CHECK(max_abs_diff(d.samples(), f.samples()) == 0.0);
}

TEST_CASE("derivative of an even bump is odd") {
    const GridFunction f = centered_gaussian(kLine);
    const GridFunction d = spectral_derivative(f, MultiIndex{1});
    const std::size_t n = kLine.count(0);
    double worst = 0.0;
    for (std::size_t i = 1; i < n; ++i) worst = std::max(worst, std::abs(d[i] + d[n - i]));
    CHECK(worst / max_abs(d.samples()) <= 1e-10);
}

TEST_CASE("insufficient padding is rejected") {
    const Grid g({1.0}, {64});
    const GridFunction f = GridFunction::zeros(g, Box::centered({0.9}));
    CHECK_THROWS_AS(spectral_derivative(f, MultiIndex{1}), PaddingError);
    CHECK_THROWS_AS(apply_symbol(sum_of_squares(1), f), PaddingError);
}

TEST_CASE("apply_symbol examples") {
    const GridFunction f = centered_gaussian(kLine);
    const GridFunction same = apply_symbol(Polynomial::constant(1, 1.0), f);
    CHECK(max_abs_diff(same.samples(), f.samples()) <= 1e-15);

    // xi^2 acts as -d^2
    const GridFunction d2 = apply_symbol(sum_of_squares(1), f);
    std::vector<Complex> exact(f.size());
    const double s2 = kSigma * kSigma;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = kLine.coordinate(0, i);
        exact[i] = -(x * x / (s2 * s2) - 1.0 / s2) * f[i];
    }
    CHECK(max_abs_diff(d2.samples(), exact) / max_abs(exact) <= 1e-8);
}

TEST_CASE("parabolic symbol assembled from derivatives") {
    const Grid g({1.0, 1.0}, {64, 64});
    const std::vector<double> c{0.1, -0.05};
    const std::vector<double> k{2.0, -3.0};
    const GridFunction f = gaussian(g, c, 0.15, k, Complex(0.3, 0.8));
    const Polynomial sym = 1i * Polynomial::variable(2, 0) + Polynomial::variable(2, 1).pow(2);
    const GridFunction a = apply_symbol(sym, f);
    const GridFunction dt = spectral_derivative(f, MultiIndex{1, 0});
    const GridFunction dxx = spectral_derivative(f, MultiIndex{0, 2});
    std::vector<Complex> b(f.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 1i * dt[i] + dxx[i];
    CHECK(max_abs_diff(a.samples(), b) / max_abs(b) <= 1e-10);
}

TEST_CASE("property: spectral derivatives commute") {
    const Grid g({1.0, 1.0}, {64, 64});
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto c = gen::real_point(rng, 2, 0.2);
        const auto k = gen::real_point(rng, 2, 5.0);
        const GridFunction f = gaussian(g, c, 0.15, k, gen::complex_unit_square(rng));
        const MultiIndex beta{static_cast<int>(trial % 3), 1};
        const MultiIndex gamma{1, static_cast<int>((trial + 1) % 3)};
        const GridFunction nested = spectral_derivative(spectral_derivative(f, beta), gamma);
        const GridFunction once = spectral_derivative(f, beta + gamma);
        CHECK(oracle::relative_l2(nested.samples(), once.samples()) <= 1e-9);
    }
}

TEST_CASE("property: batch derivatives equal single derivatives") {
    const Grid g({1.0, 1.0}, {32, 32});
    const std::vector<double> c{0.0, 0.1};
    const GridFunction f = gaussian(g, c, 0.15);
    const std::vector<MultiIndex> betas{{0, 0}, {1, 0}, {0, 2}, {2, 1}};
    const auto batch = spectral_derivatives(f, betas);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const auto single = spectral_derivative(f, betas[i]);
        CHECK(max_abs_diff(batch[i].samples(), single.samples()) == 0.0);
    }
}

TEST_CASE("apply_conjugated examples") {
    const std::vector<double> c{0.1};
    const std::vector<double> k{2.0};
    const GridFunction v = gaussian(kLine, c, kNarrow, k);

    const GridFunction plain = apply_symbol(Polynomial::variable(1, 0), v);
    const GridFunction zero_w =
        apply_conjugated(Polynomial::variable(1, 0), WeightField::zero(kLine), Sign::minus, v);
    CHECK(max_abs_diff(zero_w.samples(), plain.samples()) <= 1e-13 * max_abs(plain.samples()));

    // W = x^2: (D - i x) v with D v from the closed form
    QuadraticWeight q = QuadraticWeight::zero(1);
    q.b[0] = 2.0;
    const WeightField w = WeightField::from_quadratic(kLine, q);
    const GridFunction got = apply_conjugated(Polynomial::variable(1, 0), w, Sign::minus, v);
    std::vector<Complex> exact(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = kLine.coordinate(0, i);
        const Complex dv = -1i * (-(x - c[0]) / (kNarrow * kNarrow) + 1i * k[0]) * v[i];
        exact[i] = dv - 1i * x * v[i];
    }
    const auto box = index_range(kLine, v.support());
    double worst = 0.0;
    for (std::size_t i = box.first[0]; i <= box.last[0]; ++i) worst = std::max(worst, std::abs(got[i] - exact[i]));
    CHECK(worst / max_abs(exact) <= 1e-9);

    // P = 1 round trip
    const Polynomial one = Polynomial::constant(1, 1.0);
    const GridFunction back = apply_conjugated(one, w, Sign::plus, apply_conjugated(one, w, Sign::minus, v));
    CHECK(max_abs_diff(back.samples(), v.samples()) <= 1e-14);
}

TEST_CASE("property: conjugation by the linear-quadratic weight") {
    // W = 2 tau (x + x^2/2), grad W / 2 = tau (1 + x)
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 4; ++trial) {
        const double tau = gen::uniform(rng, 0.5, 1.5);
        const std::vector<double> c{gen::uniform(rng, -0.2, 0.2)};
        const std::vector<double> k{gen::uniform(rng, -4.0, 4.0)};
        const GridFunction v = gaussian(kLine, c, 0.3, k, gen::complex_unit_square(rng));
        QuadraticWeight q = QuadraticWeight::zero(1);
        q.a[0] = 2.0 * tau;
        q.b[0] = 2.0 * tau;
        const WeightField w = WeightField::from_quadratic(kLine, q);
        const Sign sign = trial % 2 == 0 ? Sign::plus : Sign::minus;
        const GridFunction got = apply_conjugated(Polynomial::variable(1, 0), w, sign, v);
        const GridFunction dv = spectral_derivative(v, MultiIndex{1});
        std::vector<Complex> exact(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = kLine.coordinate(0, i);
            exact[i] = dv[i] + carlab::poly::sign_value(sign) * 1i * tau * (1.0 + x) * v[i];
        }
        const auto box = index_range(kLine, v.support());
        std::vector<Complex> a, b;
        for (std::size_t i = box.first[0]; i <= box.last[0]; ++i) {
            a.push_back(got[i]);
            b.push_back(exact[i]);
        }
        CHECK(oracle::relative_l2(a, b) <= 1e-9);
    }
}

TEST_CASE("overflow guard on conjugation") {
    QuadraticWeight q = QuadraticWeight::zero(1);
    // |W|/2 = 75 x^2 reaches 675 on the box
    q.b[0] = 300.0;
    const WeightField w = WeightField::from_quadratic(kLine, q);
    const GridFunction v = centered_gaussian(kLine);
    CHECK_THROWS_AS(apply_conjugated(Polynomial::variable(1, 0), w, Sign::plus, v), OverflowGuardError);
}

TEST_CASE("weight field follows its descriptor") {
    std::mt19937_64 rng(41);
    const Grid g({2.0, 2.0}, {32, 32});
    QuadraticWeight q{{gen::uniform(rng, -1, 1), gen::uniform(rng, -1, 1)},
                      {gen::uniform(rng, -1, 1), gen::uniform(rng, -1, 1)}, 0.3};
    const WeightField w = WeightField::from_quadratic(g, q);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const auto x = oracle::point(g, flat);
        const double direct = 0.3 + q.a[0] * x[0] + q.a[1] * x[1] + q.b[0] * x[0] * x[0] / 2 + q.b[1] * x[1] * x[1] / 2;
        CHECK(std::abs(w.samples()[flat] - direct) <= 1e-12);
    }
    const WeightField s = w.shifted(1.5);
    CHECK(s.samples()[5] == doctest::Approx(w.samples()[5] - 1.5));
}

TEST_CASE("Gaussian quadrature closed forms") {
    const GridFunction f = centered_gaussian(kLine);
    const double exact = oracle::gaussian_mass(kSigma);
    CHECK(std::abs(weighted_l2(f) - exact) / exact <= 1e-10);

    for (double a : {-1.0, 0.0, 0.7}) {
        for (double b : {-1.0, 0.0, 1.5}) {
            QuadraticWeight q = QuadraticWeight::zero(1);
            q.a[0] = a;
            q.b[0] = b;
            const double ref = oracle::gaussian_weighted_mass(kSigma, a, b);
            const double got = weighted_l2(f, WeightField::from_quadratic(kLine, q));
            CHECK(std::abs(got - ref) / ref <= 1e-10);
        }
    }

    const Grid plane({4.0, 4.0}, {128, 128});
    const GridFunction f2 = centered_gaussian(plane);
    const double exact2 = exact * exact;
    CHECK(std::abs(weighted_l2(f2) - exact2) / exact2 <= 1e-10);
}

TEST_CASE("zero function has zero norm") {
    CHECK(weighted_l2(GridFunction::zeros(kLine, padded_box(kLine))) == 0.0);
}

TEST_CASE("non-finite samples are reported") {
    GridFunction f = centered_gaussian(kLine);
    f.mutable_samples()[kLine.count(0) / 2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(weighted_l2(f), std::domain_error);
}

TEST_CASE("property: Parseval") {
    std::mt19937_64 rng(43);
    const Grid g({1.0, 1.0}, {64, 32});
    for (int trial = 0; trial < 5; ++trial) {
        const auto c = gen::real_point(rng, 2, 0.05);
        const auto k = gen::real_point(rng, 2, 8.0);
        const GridFunction f = gaussian(g, c, 0.12, k, gen::complex_unit_square(rng));
        std::vector<Complex> spec(f.samples().begin(), f.samples().end());
        fft_forward(g, spec);
        double freq = 0.0;
        for (const auto& z : spec) freq += std::norm(z);
        freq *= g.cell_volume() / static_cast<double>(g.size());
        // whole-grid sum; the support box holds all but ~1e-30 of the mass
        double space = 0.0;
        for (const auto& z : f.samples()) space += std::norm(z);
        space *= g.cell_volume();
        CHECK(std::abs(freq - space) / space <= 1e-12);
        CHECK(std::abs(weighted_l2(f) - space) / space <= 1e-12);
    }
}

TEST_CASE("FFT round trip") {
    std::mt19937_64 rng(47);
    const Grid g({1.0, 1.0, 1.0}, {16, 32, 16});
    std::vector<Complex> data(g.size());
    for (auto& z : data) z = gen::complex_unit_square(rng);
    auto copy = data;
    fft_forward(g, copy);
    fft_inverse(g, copy);
    CHECK(max_abs_diff(copy, data) <= 1e-14);
}

TEST_CASE("cross-check against fourth-order finite differences") {
    const Grid g({1.0, 1.0}, {256, 256});
    const std::vector<double> c{0.05, -0.1};
    const std::vector<double> k{4.0, -6.0};
    const GridFunction f = gaussian(g, c, 0.12, k, Complex(0.6, -0.2));
    for (std::size_t axis = 0; axis < 2; ++axis) {
        const auto spectral1 = spectral_derivative(f, MultiIndex::unit(2, axis));
        CHECK(oracle::relative_l2(spectral1.samples(), oracle::fd4_first(f, axis)) <= 1e-4);
        const auto spectral2 = spectral_derivative(f, MultiIndex::unit(2, axis, 2));
        CHECK(oracle::relative_l2(spectral2.samples(), oracle::fd4_second(f, axis)) <= 1e-4);
    }
}

TEST_CASE("ODE operator application") {
    const GridFunction f = centered_gaussian(Grid({4.0}, {512}), kNarrow);
    const auto op = carlab::poly::Ode1Operator::derivative(2);
    const auto a = apply_ode_operator(op, f);
    const auto b = spectral_derivative(f, MultiIndex{2});
    CHECK(max_abs_diff(a.samples(), b.samples()) <= 1e-12 * max_abs(b.samples()));
    const GridFunction f2 = centered_gaussian(Grid({1.0, 1.0}, {32, 32}), 0.1);
    CHECK_THROWS_AS(apply_ode_operator(op, f2), std::invalid_argument);
}

TEST_CASE("spectral refinement keeps the function") {
    const GridFunction f = centered_gaussian(kLine);
    const GridFunction r = spectral_refine(f, 2);
    CHECK(r.grid().count(0) == 512);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(r[2 * i] - f[i]) <= 1e-13);
    for (std::size_t i = 0; i + 1 < f.size(); i += 17) {
        const double x = r.grid().coordinate(0, 2 * i + 1);
        CHECK(std::abs(r[2 * i + 1] - std::exp(-x * x / (2 * kSigma * kSigma))) <= 1e-12);
    }
}

TEST_CASE("binary round trip is exact") {
    std::mt19937_64 rng(53);
    const Grid g({1.0, 2.0}, {16, 32});
    const GridFunction f = gaussian(g, gen::real_point(rng, 2, 0.1), 0.2,
                                    gen::real_point(rng, 2, 3.0), gen::complex_unit_square(rng));
    std::stringstream ss;
    write_binary(ss, f);
    const GridFunction g2 = read_binary(ss);
    CHECK(g2.grid() == f.grid());
    CHECK(g2.support() == f.support());
    CHECK(max_abs_diff(g2.samples(), f.samples()) == 0.0);

    std::stringstream bad("XXXX");
    CHECK_THROWS(read_binary(bad));
}

TEST_CASE("CSV output") {
    const Grid g({1.0}, {16});
    const GridFunction f = GridFunction::sample(g, padded_box(g), [](std::span<const double> x) {
        return Complex(x[0], -x[0]);
    });
    std::ostringstream os;
    write_csv_1d(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "x,re,im");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 16);

    const Grid g3({1.0, 1.0, 1.0}, {16, 16, 16});
    const GridFunction h = GridFunction::zeros(g3, padded_box(g3));
    std::ostringstream os3;
    write_csv_2d(os3, h, 0, 2, {0, 8, 0});
    std::istringstream is3(os3.str());
    std::getline(is3, line);
    CHECK(line == "x0,x2,re,im");
    CHECK_THROWS_AS(write_csv_2d(os3, h, 0, 2, {0}), std::invalid_argument);
    CHECK_THROWS_AS(write_csv_2d(os3, h, 1, 1), std::invalid_argument);
}

TEST_CASE("leakage and padding") {
    const GridFunction f = centered_gaussian(kLine, kNarrow);
    CHECK(f.has_padding());
    CHECK(f.leakage() <= 1e-13);
    // the L/8 bump still carries exp(-18) at the box edge
    CHECK(centered_gaussian(kLine).leakage() == doctest::Approx(std::exp(-18.0)).epsilon(1e-6));
}

}  // TEST_SUITE
