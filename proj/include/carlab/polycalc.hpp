#pragma once

/**
 * @file polycalc.hpp
 * @brief Constant-coefficient multivariate polynomials over C and
 *        one-dimensional differential operators with polynomial coefficients.
 *
 * A Polynomial P in d variables doubles as the Fourier symbol of the
 * constant-coefficient operator P(D), D = -i d/dx.  Coefficients are complex
 * doubles; every arithmetic result is pruned of terms below
 * 1e-14 * (largest coefficient magnitude) so that term maps stay canonical.
 */

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace carlab::poly {

using Complex = std::complex<double>;

inline constexpr double kPruneRelative = 1e-14;

/// Multi-index alpha = (alpha_1, ..., alpha_d) with nonnegative entries.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::size_t dimension) : entries_(dimension, 0) {}
    explicit MultiIndex(std::vector<int> entries);
    MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

    /// e_j: a single 1 in slot j.
    static MultiIndex unit(std::size_t dimension, std::size_t j, int power = 1);

    std::size_t dimension() const { return entries_.size(); }
    int order() const;
    int operator[](std::size_t j) const { return entries_[j]; }
    const std::vector<int>& entries() const { return entries_; }

    MultiIndex operator+(const MultiIndex& other) const;
    /// Componentwise <=.
    bool divides(const MultiIndex& other) const;
    MultiIndex operator-(const MultiIndex& other) const;

    /// alpha! = prod alpha_j!
    double factorial() const;

    auto operator<=>(const MultiIndex&) const = default;
    bool operator==(const MultiIndex&) const = default;

    std::string to_string() const;

private:
    std::vector<int> entries_;
};

/// All multi-indices of the given dimension with order in [min_order, max_order],
/// listed by increasing order then lexicographically.
std::vector<MultiIndex> enumerate_multi_indices(std::size_t dimension, int max_order,
                                                int min_order = 0);

class Polynomial {
public:
    using TermMap = std::map<MultiIndex, Complex>;

    Polynomial() = default;
    explicit Polynomial(std::size_t dimension) : dimension_(dimension) {}
    Polynomial(std::size_t dimension, TermMap terms);

    static Polynomial constant(std::size_t dimension, Complex value);
    /// The coordinate function xi_j.
    static Polynomial variable(std::size_t dimension, std::size_t j);
    static Polynomial monomial(const MultiIndex& alpha, Complex coefficient = 1.0);

    std::size_t dimension() const { return dimension_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Degree of the zero polynomial is -1.
    int degree() const;
    Complex coefficient(const MultiIndex& alpha) const;
    double max_abs_coefficient() const;

    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator-() const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator*(Complex scalar) const;
    friend Polynomial operator*(Complex scalar, const Polynomial& p) { return p * scalar; }

    Polynomial pow(int exponent) const;

    /// Same polynomial viewed in more variables; new variables are appended.
    Polynomial lift(std::size_t new_dimension) const;

    /// Structural equality after pruning, with the tolerance scaled by the
    /// larger of the two coefficient maxima.
    bool approx_equal(const Polynomial& other, double tol = 1e-12) const;

    nlohmann::json to_json() const;
    static Polynomial from_json(const nlohmann::json& j);

private:
    void prune();

    std::size_t dimension_ = 0;
    TermMap terms_;
};

/// P^(alpha) = d^alpha P.  Zero when |alpha| > deg P.
Polynomial derivative(const Polynomial& p, const MultiIndex& alpha);

/// Coefficientwise complex conjugate, written P-bar.
Polynomial conjugate(const Polynomial& p);

/// xi -> P(xi + w), expanded exactly by the binomial theorem.
Polynomial shift(const Polynomial& p, std::span<const Complex> w);

/// P(z) via per-variable power tables.
Complex evaluate(const Polynomial& p, std::span<const Complex> z);
Complex evaluate(const Polynomial& p, std::span<const double> z);

/// Linear substitution xi_j -> sum_k map[j][k] y_k.  map has dimension() rows,
/// each of length new_dimension.  Used to attach formal variables, e.g.
/// P(xi - i tau e_n) as a polynomial in (xi, tau).
Polynomial substitute_linear(const Polynomial& p,
                             const std::vector<std::vector<Complex>>& map,
                             std::size_t new_dimension);

/// Multivariate division by a single divisor under lex order (x_1 > x_2 > ...).
/// Returns quotient q and remainder r with p = q * divisor + r, where no term
/// of r is divisible by the leading monomial of divisor.
struct DivisionResult {
    Polynomial quotient;
    Polynomial remainder;
};
DivisionResult divide(const Polynomial& p, const Polynomial& divisor);

/// P_2(xi) = sum_j xi_j^2 in n variables.
Polynomial sum_of_squares(std::size_t n);

// ---------------------------------------------------------------------------

/// sum_k c_k(s) D_s^k with the coefficients kept to the left of the derivative
/// powers.  D_s = -i d/ds.
class Ode1Operator {
public:
    using CoefficientMap = std::map<int, Polynomial>;

    Ode1Operator() = default;
    explicit Ode1Operator(CoefficientMap coeffs);

    static Ode1Operator identity();
    /// D_s^k.
    static Ode1Operator derivative(int k = 1);
    /// Multiplication by c(s).
    static Ode1Operator multiplication(const Polynomial& c);

    const CoefficientMap& coefficients() const { return coeffs_; }
    /// Highest derivative power present; -1 for the zero operator.
    int order() const;
    /// Coefficient of D_s^k (the zero polynomial if absent).
    Polynomial coefficient(int k) const;

    Ode1Operator operator+(const Ode1Operator& other) const;
    Ode1Operator operator-(const Ode1Operator& other) const;
    Ode1Operator operator*(Complex scalar) const;

    bool approx_equal(const Ode1Operator& other, double tol = 1e-12) const;

private:
    void prune();
    CoefficientMap coeffs_;
};

/// Exact product A o B, renormalized to coefficients-left order using
/// D^j b = sum_r C(j,r) (D^r b) D^{j-r}.
Ode1Operator compose1d(const Ode1Operator& a, const Ode1Operator& b);

enum class Sign { plus, minus };
inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// (D_s +/- i tau (1+s))^K by repeated composition.
Ode1Operator build_conjugated_power(Sign sign, double tau, int k);

/// (D_s +/- i tau)^K, the constant-coefficient comparison operator.
Ode1Operator build_shifted_power(Sign sign, double tau, int k);

}  // namespace carlab::poly
