#pragma once

/**
 * @file symbolcheck.hpp
 * @brief Symbol-level checks for the powers P_2^m of the Laplacian symbol.
 *
 * Coordinates on R^{2+n} are ordered z = (tau, eta~, xi_1, ..., xi_n).  The
 * lower bound form of the conjugated parabolic symbol,
 *
 *   |-i |eta~|^{2m-1} eta~ + P_2^m(xi - i tau e_n)|^2
 *     + tau^2 |(d_n P_2^m)(xi - i tau e_n)|^2
 *     + tau^{2m} |(d_n^m P_2^m)(xi - i tau e_n)|^2,
 *
 * and the comparison form |eta~|^{4m} + |xi - i tau e_n|^{4m} are both
 * homogeneous of degree 4m, so their ratio is bounded below by its minimum on
 * the unit sphere.  That minimum is estimated by low-discrepancy sampling
 * followed by local golden-section refinement on tangent directions.
 */

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "carlab/polycalc.hpp"
#include "json.hpp"

namespace carlab::symbol {

using poly::Polynomial;

class HomogeneousForm {
public:
    using Evaluator = std::function<double(std::span<const double>)>;

    HomogeneousForm(Evaluator f, int degree, int m, int n)
        : f_(std::move(f)), degree_(degree), m_(m), n_(n) {}

    double operator()(std::span<const double> z) const { return f_(z); }
    int degree() const { return degree_; }
    int m() const { return m_; }
    int n() const { return n_; }
    /// Length of z: 2 + n.
    std::size_t arity() const { return static_cast<std::size_t>(n_) + 2; }

    HomogeneousForm scaled(double factor) const;

private:
    Evaluator f_;
    int degree_;
    int m_;
    int n_;
};

struct FactorizationReport {
    int m = 0;
    int n = 0;
    bool chain_rule = false;       // d_n P_2^m = m P_2^{m-1} d_n P_2
    bool divisibility = false;     // d_n^m P_2^m - m! (d_n P_2)^m = P_2 Ptilde
    bool shifted_gradient = false; // (d_n P_2)(xi - i tau e_n) = 2 (xi_n - i tau)
    bool shifted_identities = false;
    double remainder_norm = 0.0;
    Polynomial ptilde;
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kRemainderTolerance = 1e-10;

/// Symbolic check of the three identities, first in xi and then lifted to
/// (xi, tau) with tau as an extra formal variable (index n).
FactorizationReport verify_factorization(int m, int n);

/// P(xi - i tau e_n) as a polynomial in (xi_1..xi_n, tau).
Polynomial shift_by_formal_tau(const Polynomial& p);

HomogeneousForm lhs_form_39(int m, int n);
HomogeneousForm rhs_form_39(int m, int n);

struct SphereMinReport {
    int m = 0;
    int n = 0;
    double min_value = 0.0;
    std::vector<double> argmin;
    std::size_t samples_used = 0;
    std::size_t refinement_iterations = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

inline constexpr std::size_t kMinSphereSamples = 10000;

/// min over |z| = 1 of num(z) / den(z).  Throws std::domain_error naming the
/// point if den is not positive at a sample.
SphereMinReport min_ratio_on_sphere(const HomogeneousForm& num, const HomogeneousForm& den,
                                    std::size_t samples, std::uint64_t seed = 1,
                                    std::size_t workers = 1);

struct Check38Report {
    bool pass = false;
    std::size_t trials = 0;
    std::size_t violations = 0;
    double constant = 0.0;
    double worst_ratio = 0.0;  // min over trials of lhs / (C * rhs)

    nlohmann::json to_json() const;
};

/// Evaluates the anisotropic inequality directly in (tau, eta, xi),
///   lhs(tau, eta, xi) >= C (|eta|^2 + (|xi|^2 + tau^2)^{2m}),
/// for random points with |eta|, |xi_j|, |tau| <= 10, using the constant C of
/// the sphere report, with tolerance factor 1 - 1e-6.
Check38Report check_38_from_39(int m, int n, std::size_t trials, double constant,
                               std::uint64_t seed = 1);

/// Left side of the anisotropic inequality with eta used directly.
double lhs_form_38(int m, int n, std::span<const double> z);

/// Closed-form minimum of |eta~|^{4} + (1 - eta~^2)^2 on the circle: 1/2.
inline constexpr double kRhsMinimumM1N1 = 0.5;

/// Points of the unit sphere in R^d from a shifted Halton sequence pushed
/// through Box-Muller and normalized.
std::vector<std::vector<double>> sphere_points(std::size_t d, std::size_t count, std::uint64_t seed);

}  // namespace carlab::symbol
