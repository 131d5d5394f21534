#include "carlab/symbolcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "carlab/parallel.hpp"

namespace carlab::symbol {

using poly::Complex;
using poly::MultiIndex;

namespace {

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

void require_positive(int m, int n) {
    if (m < 1 || n < 1) throw std::invalid_argument("m and n must be >= 1");
}

/// P_2^m, d_n P_2^m and d_n^m P_2^m, each shifted to (xi, tau).
struct ShiftedSymbols {
    Polynomial power;
    Polynomial first;
    Polynomial mth;
};

ShiftedSymbols shifted_symbols(int m, int n) {
    const Polynomial pm = poly::sum_of_squares(n).pow(m);
    const auto en = static_cast<std::size_t>(n - 1);
    return {shift_by_formal_tau(pm),
            shift_by_formal_tau(poly::derivative(pm, MultiIndex::unit(n, en))),
            shift_by_formal_tau(poly::derivative(pm, MultiIndex::unit(n, en, m)))};
}

/// (tau, eta~, xi) -> (xi, tau)
std::vector<double> xi_tau_point(std::span<const double> z) {
    std::vector<double> y(z.begin() + 2, z.end());
    y.push_back(z[0]);
    return y;
}

/// |-i eta + P(y)|^2 + tau^2 |d_n P(y)|^2 + tau^{2m} |d_n^m P(y)|^2 at y = (xi, tau).
double conjugated_lower_form(const ShiftedSymbols& s, int m, double eta, std::span<const double> z) {
    const double tau = z[0];
    const auto y = xi_tau_point(z);
    const std::span<const double> ys(y);
    return std::norm(Complex(0.0, -eta) + poly::evaluate(s.power, ys)) +
           tau * tau * std::norm(poly::evaluate(s.first, ys)) +
           std::pow(tau, 2 * m) * std::norm(poly::evaluate(s.mth, ys));
}

constexpr std::array<unsigned, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

void normalize(std::vector<double>& z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    s = std::sqrt(s);
    for (double& v : z) v /= s;
}

double ratio_at(const HomogeneousForm& num, const HomogeneousForm& den, std::span<const double> z) {
    return num(z) / den(z);
}

/// Orthonormal basis of the tangent space at unit vector z.
std::vector<std::vector<double>> tangent_basis(const std::vector<double>& z) {
    const std::size_t d = z.size();
    std::size_t skip = 0;
    for (std::size_t j = 1; j < d; ++j)
        if (std::abs(z[j]) > std::abs(z[skip])) skip = j;
    std::vector<std::vector<double>> basis{z};
    for (std::size_t j = 0; j < d; ++j) {
        if (j == skip) continue;
        std::vector<double> e(d, 0.0);
        e[j] = 1.0;
        for (const auto& b : basis) {
            const double dot = std::inner_product(e.begin(), e.end(), b.begin(), 0.0);
            for (std::size_t k = 0; k < d; ++k) e[k] -= dot * b[k];
        }
        normalize(e);
        basis.push_back(std::move(e));
    }
    basis.erase(basis.begin());
    return basis;
}

struct LocalMin {
    std::vector<double> z;
    double value;
    std::size_t iterations;
};

LocalMin refine(const HomogeneousForm& num, const HomogeneousForm& den, std::vector<double> z,
                double initial_step) {
    constexpr double kGolden = 0.6180339887498949;
    constexpr double kFinalStep = 1e-6;
    constexpr std::size_t kMaxIterations = 5000;

    auto along = [&](const std::vector<double>& e, double t) {
        std::vector<double> p(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) p[k] = z[k] + t * e[k];
        normalize(p);
        return p;
    };

    double best = ratio_at(num, den, z);
    double h = initial_step;
    std::size_t it = 0;
    while (h >= kFinalStep && it < kMaxIterations) {
        ++it;
        double largest_move = 0.0;
        for (const auto& e : tangent_basis(z)) {
            double a = -h, b = h;
            double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
            double fc = ratio_at(num, den, along(e, c)), fd = ratio_at(num, den, along(e, d));
            for (int g = 0; g < 40; ++g) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - kGolden * (b - a);
                    fc = ratio_at(num, den, along(e, c));
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + kGolden * (b - a);
                    fd = ratio_at(num, den, along(e, d));
                }
            }
            const double t = fc < fd ? c : d;
            const double ft = std::min(fc, fd);
            if (ft < best) {
                z = along(e, t);
                best = ft;
                largest_move = std::max(largest_move, std::abs(t));
            }
        }
        if (largest_move < 0.5 * h) h *= 0.5;
    }
    return {std::move(z), best, it};
}

}  // namespace

HomogeneousForm HomogeneousForm::scaled(double factor) const {
    Evaluator f = f_;
    return HomogeneousForm([f, factor](std::span<const double> z) { return factor * f(z); }, degree_,
                           m_, n_);
}

nlohmann::json FactorizationReport::to_json() const {
    return {{"m", m},
            {"n", n},
            {"chain_rule", chain_rule},
            {"divisibility", divisibility},
            {"shifted_gradient", shifted_gradient},
            {"shifted_identities", shifted_identities},
            {"remainder_norm", remainder_norm},
            {"Ptilde", ptilde.to_json()},
            {"pass", pass}};
}

nlohmann::json SphereMinReport::to_json() const {
    return {{"m", m},          {"n", n},         {"min_value", min_value},
            {"argmin", argmin}, {"samples", samples_used},
            {"refinement_iterations", refinement_iterations}, {"seed", seed}};
}

nlohmann::json Check38Report::to_json() const {
    return {{"pass", pass},
            {"trials", trials},
            {"violations", violations},
            {"C", constant},
            {"worst_ratio", worst_ratio}};
}

Polynomial shift_by_formal_tau(const Polynomial& p) {
    const std::size_t n = p.dimension();
    std::vector<std::vector<Complex>> map(n, std::vector<Complex>(n + 1, 0.0));
    for (std::size_t j = 0; j < n; ++j) map[j][j] = 1.0;
    map[n - 1][n] = Complex(0.0, -1.0);
    return poly::substitute_linear(p, map, n + 1);
}

FactorizationReport verify_factorization(int m, int n) {
    require_positive(m, n);
    FactorizationReport r;
    r.m = m;
    r.n = n;
    const auto nn = static_cast<std::size_t>(n);
    const MultiIndex en = MultiIndex::unit(nn, nn - 1);
    const Polynomial p2 = poly::sum_of_squares(nn);
    const Polynomial pm = p2.pow(m);
    const Polynomial dp2 = poly::derivative(p2, en);
    const Polynomial dpm = poly::derivative(pm, en);
    const Polynomial dmpm = poly::derivative(pm, MultiIndex::unit(nn, nn - 1, m));

    r.chain_rule = dpm.approx_equal(p2.pow(m - 1) * dp2 * Complex(m));

    const Polynomial diff = dmpm - dp2.pow(m) * Complex(factorial(m));
    const auto [q, rem] = poly::divide(diff, p2);
    r.ptilde = q;
    r.remainder_norm = rem.max_abs_coefficient() / std::max(1.0, diff.max_abs_coefficient());
    r.divisibility = r.remainder_norm <= kRemainderTolerance && (q * p2).approx_equal(diff);

    // d_n P_2 (xi - i tau e_n) = 2 xi_n - 2 i tau
    const Polynomial expected(nn + 1, {{MultiIndex::unit(nn + 1, nn - 1), 2.0},
                                       {MultiIndex::unit(nn + 1, nn), Complex(0.0, -2.0)}});
    r.shifted_gradient = shift_by_formal_tau(dp2).approx_equal(expected);

    const Polynomial s_p2 = shift_by_formal_tau(p2);
    const Polynomial s_dp2 = shift_by_formal_tau(dp2);
    const bool s1 = shift_by_formal_tau(dpm).approx_equal(s_p2.pow(m - 1) * s_dp2 * Complex(m));
    const bool s2 = shift_by_formal_tau(dmpm).approx_equal(
        s_dp2.pow(m) * Complex(factorial(m)) + s_p2 * shift_by_formal_tau(q));
    r.shifted_identities = s1 && s2;
    r.pass = r.chain_rule && r.divisibility && r.shifted_gradient && r.shifted_identities;
    return r;
}

HomogeneousForm lhs_form_39(int m, int n) {
    require_positive(m, n);
    const ShiftedSymbols s = shifted_symbols(m, n);
    auto f = [s, m](std::span<const double> z) {
        const double eta = std::pow(std::abs(z[1]), 2 * m - 1) * z[1];
        return conjugated_lower_form(s, m, eta, z);
    };
    return HomogeneousForm(f, 4 * m, m, n);
}

double lhs_form_38(int m, int n, std::span<const double> z) {
    require_positive(m, n);
    return conjugated_lower_form(shifted_symbols(m, n), m, z[1], z);
}

HomogeneousForm rhs_form_39(int m, int n) {
    require_positive(m, n);
    auto f = [m](std::span<const double> z) {
        double r2 = z[0] * z[0];
        for (std::size_t j = 2; j < z.size(); ++j) r2 += z[j] * z[j];
        return std::pow(std::abs(z[1]), 4 * m) + std::pow(r2, 2 * m);
    };
    return HomogeneousForm(f, 4 * m, m, n);
}

std::vector<std::vector<double>> sphere_points(std::size_t d, std::size_t count, std::uint64_t seed) {
    const std::size_t pairs = (d + 1) / 2;
    if (2 * pairs > kPrimes.size()) throw std::invalid_argument("sphere_points: dimension too large");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> offsets(2 * pairs);
    for (auto& o : offsets) o = unit(rng);

    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        std::vector<double> z;
        z.reserve(2 * pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
            double u1 = std::fmod(radical_inverse(i, kPrimes[2 * p]) + offsets[2 * p], 1.0);
            double u2 = std::fmod(radical_inverse(i, kPrimes[2 * p + 1]) + offsets[2 * p + 1], 1.0);
            u1 = std::max(u1, 1e-300);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            z.push_back(radius * std::cos(2.0 * std::numbers::pi * u2));
            z.push_back(radius * std::sin(2.0 * std::numbers::pi * u2));
        }
        z.resize(d);
        normalize(z);
        out.push_back(std::move(z));
    }
    return out;
}

SphereMinReport min_ratio_on_sphere(const HomogeneousForm& num, const HomogeneousForm& den,
                                    std::size_t samples, std::uint64_t seed, std::size_t workers) {
    if (num.arity() != den.arity()) throw std::invalid_argument("min_ratio_on_sphere: arity mismatch");
    if (samples < kMinSphereSamples) {
        std::ostringstream os;
        os << "min_ratio_on_sphere: samples must be >= " << kMinSphereSamples;
        throw std::invalid_argument(os.str());
    }
    const std::size_t d = num.arity();
    const auto points = sphere_points(d, samples, seed);
    std::vector<double> values(samples);
    std::vector<double> den_values(samples);
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (samples + kBlock - 1) / kBlock;
    parallel_for(blocks, workers, [&](std::size_t b) {
        for (std::size_t i = b * kBlock; i < std::min(samples, (b + 1) * kBlock); ++i) {
            den_values[i] = den(points[i]);
            values[i] = den_values[i] > 0.0 ? num(points[i]) / den_values[i] : 0.0;
        }
    });
    for (std::size_t i = 0; i < samples; ++i) {
        if (!(den_values[i] > 0.0)) {
            std::ostringstream os;
            os << "min_ratio_on_sphere: denominator vanishes at sample " << i << " (";
            for (std::size_t k = 0; k < d; ++k) os << (k ? ", " : "") << points[i][k];
            os << ")";
            throw std::domain_error(os.str());
        }
    }

    std::vector<std::size_t> order(samples);
    std::iota(order.begin(), order.end(), 0);
    constexpr std::size_t kStarts = 16;
    const std::size_t starts = std::min(kStarts, samples);
    std::partial_sort(order.begin(), order.begin() + starts, order.end(), [&](auto a, auto b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });

    // Typical spacing of the sample set on S^{d-1}.
    const double step = std::min(0.25, 2.0 * std::pow(static_cast<double>(samples), -1.0 / (d - 1)));
    std::vector<LocalMin> local(starts);
    parallel_for(starts, workers, [&](std::size_t s) {
        local[s] = refine(num, den, points[order[s]], step);
    });

    SphereMinReport r;
    r.m = num.m();
    r.n = num.n();
    r.samples_used = samples;
    r.seed = seed;
    r.min_value = values[order[0]];
    r.argmin = points[order[0]];
    for (const auto& lm : local) {
        r.refinement_iterations += lm.iterations;
        if (lm.value < r.min_value) {
            r.min_value = lm.value;
            r.argmin = lm.z;
        }
    }
    return r;
}

Check38Report check_38_from_39(int m, int n, std::size_t trials, double constant, std::uint64_t seed) {
    require_positive(m, n);
    const ShiftedSymbols s = shifted_symbols(m, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(-10.0, 10.0);
    Check38Report r;
    r.trials = trials;
    r.constant = constant;
    r.worst_ratio = std::numeric_limits<double>::infinity();
    std::vector<double> z(static_cast<std::size_t>(n) + 2);
    for (std::size_t t = 0; t < trials; ++t) {
        for (auto& v : z) v = box(rng);
        const double tau = z[0], eta = z[1];
        const double lhs = conjugated_lower_form(s, m, eta, z);
        double r2 = tau * tau;
        for (std::size_t j = 2; j < z.size(); ++j) r2 += z[j] * z[j];
        const double rhs = eta * eta + std::pow(r2, 2 * m);
        if (rhs <= 0.0) continue;
        const double ratio = lhs / (constant * rhs);
        r.worst_ratio = std::min(r.worst_ratio, ratio);
        if (lhs < (1.0 - 1e-6) * constant * rhs) ++r.violations;
    }
    r.pass = r.violations == 0 && constant > 0.0;
    return r;
}

}  // namespace carlab::symbol
