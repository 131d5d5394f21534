#pragma once

// Numerical checks of the Treves identity for quadratic weights, of its
// sign-restricted corollary (positive curvature b >= 0), and of the pointwise
// error bounds for powers of D_s +/- i tau (1+s).

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "carlab/gridops.hpp"
#include "carlab/polycalc.hpp"
#include "json.hpp"

namespace carlab::treves {

using grid::GridFunction;
using grid::QuadraticWeight;
using poly::MultiIndex;
using poly::Polynomial;
using poly::Sign;

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    /// (b^alpha / alpha!) * || Pbar^(alpha)(D - i grad Q/2) v ||^2 for each alpha.
    std::map<MultiIndex, double> terms;
    double relative_error = 0.0;

    nlohmann::json to_json() const;
};

/// Multi-indices alpha with alpha_j = 0 wherever b_j = 0 and |alpha| <= max_order.
std::vector<MultiIndex> curvature_indices(std::span<const double> b, int max_order,
                                          int min_order = 0);

/// b^alpha with 0^0 = 1.
double power(std::span<const double> b, const MultiIndex& alpha);

/// Both sides of
///   int e^Q |P(D)u|^2 = sum_alpha b^alpha/alpha! int |Pbar^(alpha)(D - i grad Q/2) v|^2,
/// v = e^{Q/2} u.
IdentityReport verify_treves(const Polynomial& p, const QuadraticWeight& q, const GridFunction& u);

struct Lemma22Report {
    /// Unset when both sides are empty sums or every member was degenerate.
    std::optional<double> c_est;
    bool pass = false;
    bool vacuous = false;
    std::size_t members_used = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

/// min over the family of
///   sum_{|alpha|>=k} b^alpha ||Pbar^(alpha)(D - i grad Q/2) v||^2
///   / sum_{|alpha|>=k} b^alpha ||P^(alpha)(D + i grad Q/2) v||^2.
/// Throws std::invalid_argument if some b_j < 0 or the family is empty.
Lemma22Report estimate_lemma22(const Polynomial& p, const QuadraticWeight& q, int k,
                               std::span<const GridFunction> family, std::uint64_t seed = 0);

struct Lemma23Params {
    int k = 1;
    double tau = 10.0;
    double delta = 0.3;
    Sign sign = Sign::plus;
    double delta0 = 0.5;
    double tau0 = 1.0;
};

struct Lemma23Report {
    Lemma23Params params;
    double c_est_23 = 0.0;
    double c_est_24 = 0.0;
    double c_est_23_refined = 0.0;
    double c_est_24_refined = 0.0;
    bool pass_23 = false;
    bool pass_24 = false;
    std::size_t points = 0;

    nlohmann::json to_json() const;
};

inline constexpr double kDenominatorFloor = 1e-280;
inline constexpr double kRefinementStability = 0.10;

/// Pointwise constants over |s| < delta, max over the grid:
///   |(D + i tau(1+s))^K u - D^K u| / sum_{k<K} tau^{K-k} |D^k u|
///   |(D + i tau(1+s))^K u - (D + i tau)^K u| / ((1 + delta tau) sum_{k<K} tau^{K-1-k} |D^k u|)
/// then repeats on the spectrally refined grid (x2) and flags a pass when the
/// constant is finite and moves by at most 10%.
Lemma23Report verify_lemma23(const Lemma23Params& params, const GridFunction& u);

/// Same with the constants maximized over a family.
Lemma23Report verify_lemma23(const Lemma23Params& params, std::span<const GridFunction> family);

/// One randomized instance of the identity check.
struct TrevesCase {
    Polynomial p;
    QuadraticWeight q;
    GridFunction u;
};

/// Grid [-4, 4)^d with 512 points (d = 1) or 256 per axis (d = 2) unless
/// `points` is given; deg P uniform in [1, max_degree]; |a_j|, |b_j| <= 2
/// (zero when `zero_weight`); u a modulated Gaussian of width 0.3 near 0.
TrevesCase random_treves_case(std::uint64_t seed, std::size_t dimension, int max_degree = 4,
                              bool zero_weight = false, std::size_t points = 0);

/// Modulated complex Gaussians on [-4, 4) with widths in [0.3, 0.6] and
/// centers in [-0.5, 0.5], for the pointwise bounds.
std::vector<GridFunction> bump_family_1d(std::uint64_t seed, std::size_t count,
                                         std::size_t points = 512);

/// Random polynomial of degree exactly `degree` with complex coefficients in
/// the unit square.
Polynomial random_polynomial(std::mt19937_64& rng, std::size_t dimension, int degree);

}  // namespace carlab::treves
