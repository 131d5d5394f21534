#pragma once

// Reference computations used only by tests.  None of these go through the
// FFT path, the polynomial power tables or the library quadrature.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "carlab/gridops.hpp"
#include "carlab/polycalc.hpp"

namespace oracle {

using Complex = std::complex<double>;
using carlab::grid::Grid;
using carlab::grid::GridFunction;

inline std::vector<double> point(const Grid& g, std::size_t flat) {
    std::vector<double> x(g.dimension());
    for (std::size_t j = 0; j < g.dimension(); ++j) {
        x[j] = g.coordinate(j, (flat / g.stride(j)) % g.count(j));
    }
    return x;
}

inline bool inside(const carlab::grid::Box& b, std::span<const double> x) {
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < b.lo[j] - 1e-12 || x[j] > b.hi[j] + 1e-12) return false;
    return true;
}

/// Rectangle rule over `box` of weight(x) * |f(x)|^2 for a pointwise integrand.
inline double rect(const Grid& g, const carlab::grid::Box& box,
                   const std::function<double(std::span<const double>)>& integrand) {
    double sum = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const auto x = point(g, flat);
        if (inside(box, x)) sum += integrand(x);
    }
    return sum * g.cell_volume();
}

/// 4th-order central difference along `axis`, periodic, returned as D = -i d.
inline std::vector<Complex> fd4_first(const GridFunction& f, std::size_t axis) {
    const Grid& g = f.grid();
    const std::size_t n = g.count(axis);
    const std::size_t s = g.stride(axis);
    const double h = g.spacing(axis);
    std::vector<Complex> out(f.size());
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        const std::size_t i = (flat / s) % n;
        const std::size_t base = flat - i * s;
        auto at = [&](long k) { return f[base + static_cast<std::size_t>((static_cast<long>(i) + k + 2 * static_cast<long>(n)) % static_cast<long>(n)) * s]; };
        const Complex d = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        out[flat] = Complex(0.0, -1.0) * d;
    }
    return out;
}

/// 4th-order central second difference along `axis`, returned as D^2 = -d^2.
inline std::vector<Complex> fd4_second(const GridFunction& f, std::size_t axis) {
    const Grid& g = f.grid();
    const std::size_t n = g.count(axis);
    const std::size_t s = g.stride(axis);
    const double h = g.spacing(axis);
    std::vector<Complex> out(f.size());
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        const std::size_t i = (flat / s) % n;
        const std::size_t base = flat - i * s;
        auto at = [&](long k) { return f[base + static_cast<std::size_t>((static_cast<long>(i) + k + 2 * static_cast<long>(n)) % static_cast<long>(n)) * s]; };
        const Complex d2 = (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
        out[flat] = -d2;
    }
    return out;
}

/// ||a - b|| / ||b|| in the discrete l2 sense.
inline double relative_l2(std::span<const Complex> a, std::span<const Complex> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

/// Term-by-term evaluation with std::pow.
inline Complex evaluate_naive(const carlab::poly::Polynomial& p, std::span<const Complex> z) {
    Complex sum{};
    for (const auto& [alpha, c] : p.terms()) {
        Complex t = c;
        for (std::size_t j = 0; j < z.size(); ++j)
            for (int k = 0; k < alpha[j]; ++k) t *= z[j];
        sum += t;
    }
    return sum;
}

// Gaussian closed forms in one variable.

/// int exp(-x^2 / s^2) dx
inline double gaussian_mass(double s) { return s * std::sqrt(std::numbers::pi); }

/// int exp(a x + b x^2 / 2 - x^2 / s^2) dx, requires 1/s^2 > b/2
inline double gaussian_weighted_mass(double s, double a, double b) {
    const double k = 1.0 / (s * s) - b / 2.0;
    return std::sqrt(std::numbers::pi / k) * std::exp(a * a / (4.0 * k));
}

}  // namespace oracle
