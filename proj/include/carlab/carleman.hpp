#pragma once

// Carleman weights, admissible test-function families and tau-sweeps of the
// weighted inequalities for the higher order parabolic operator
// d_t + (-Delta)^m and Schrodinger operator D_t + (-Delta)^m.
//
// Grids are (1+n)-dimensional with axis 0 = t and axis n = x_n.  Both weights
// depend on (t, x_n) only, so weighted norms are accumulated from energy
// densities summed over x' = (x_1..x_{n-1}).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carlab/gridops.hpp"
#include "carlab/polycalc.hpp"
#include "json.hpp"

namespace carlab::carleman {

using grid::Grid;
using grid::GridFunction;
using poly::MultiIndex;
using poly::Polynomial;

enum class OperatorKind { parabolic, schrodinger, custom };

std::string to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

struct OperatorSymbol {
    OperatorKind kind = OperatorKind::parabolic;
    int m = 1;
    int n = 1;
    /// Polynomial in (eta, xi_1..xi_n).
    Polynomial symbol;

    /// i eta + |xi|^{2m}
    static OperatorSymbol parabolic(int m, int n);
    /// eta + |xi|^{2m}
    static OperatorSymbol schrodinger(int m, int n);
};

enum class WeightKind { standard, saddle };

std::string to_string(WeightKind k);
WeightKind weight_kind_from_string(const std::string& s);

/// standard: phi = -N t^2/2 + x_n + x_n^2/2
/// saddle:   phi = -2 c t^2 + x_n + N x_n^2/2
class CarlemanWeight {
public:
    WeightKind kind() const { return kind_; }
    double n_param() const { return n_; }
    double saddle_c() const { return c_; }

    double operator()(double t, double xn) const;
    /// (d_t phi, d_{x_n} phi); the x' components vanish.
    std::pair<double, double> gradient(double t, double xn) const;
    /// Evaluates at grid coordinates (t, x_1, ..., x_n).
    double at(std::span<const double> x) const { return (*this)(x.front(), x.back()); }

    friend CarlemanWeight make_weight(WeightKind kind, double n, std::optional<double> saddle_c);

private:
    WeightKind kind_ = WeightKind::standard;
    double n_ = 0.0;
    double c_ = 0.0;
};

/// Throws std::invalid_argument for N < 0 or a saddle weight without c > 0.
CarlemanWeight make_weight(WeightKind kind, double n, std::optional<double> saddle_c = std::nullopt);

/// N = 4 delta0^{-2} delta (1 - delta/4).
double time_confinement_preset(double delta, double delta0);

struct TestFunctionSpec {
    double delta_prime = 0.2;
    int n = 1;
    int bump_count = 3;
    std::uint64_t seed = 1;
    double amplitude_min = 0.5;
    double amplitude_max = 1.0;
    /// Modulation bound as a fraction of the Nyquist frequency; 0 disables it.
    double modulation_fraction = 0.25;
    bool complex_amplitudes = true;
};

/// Grid for a spec: t and x_n cover [-delta'/0.7, delta'/0.7], x' covers [-1, 1].
/// `counts` lists points per axis (1 + n entries).
Grid make_grid(const TestFunctionSpec& spec, std::vector<std::size_t> counts);

/// Support box of generated functions: |t|, |x_n| <= delta', |x'| <= 0.75.
grid::Box support_box(const TestFunctionSpec& spec, const Grid& g);

/// Random superpositions of separable mollifier bumps, deterministic per seed.
std::vector<GridFunction> generate_family(const TestFunctionSpec& spec, const Grid& g,
                                          std::size_t count);

/// exp(1 - 1/(1 - r^2)) for |r| < 1, else 0.
double mollifier(double r);

struct LhsTerm {
    MultiIndex derivative;  // full (t, x) multi-index
    int tau_exponent = 0;   // the term is tau^{tau_exponent} ||D^derivative u||^2
    bool time = false;
    double norm = 0.0;      // weighted norm, before the tau power
    double contribution = 0.0;

    std::string label() const;
};

/// Index set and tau exponents of the left side for an operator.
std::vector<LhsTerm> lhs_term_layout(const OperatorSymbol& op);

struct LhsResult {
    double total = 0.0;
    std::vector<LhsTerm> terms;
};

/// max of phi over the (t, x_n) points where u is nonzero; falls back to the
/// support box when u vanishes.  Weighted norms use 2 tau (phi - shift).
double support_shift(const CarlemanWeight& w, const GridFunction& u);

/// Left side with the weight e^{2 tau (phi - shift)}.  When `shift` is unset
/// support_shift is used.  Quadrature runs over the (t, x_n) points where u is
/// nonzero, since every D^beta u vanishes off supp u.
LhsResult carleman_lhs(const GridFunction& u, double tau, const CarlemanWeight& w,
                       const OperatorSymbol& op, std::optional<double> shift = std::nullopt);

/// ||P(D_t, D_x) u||^2 with the same weight convention.
double carleman_rhs(const GridFunction& u, double tau, const CarlemanWeight& w,
                    const OperatorSymbol& op, std::optional<double> shift = std::nullopt);

/// Precomputed |D^beta u|^2 densities summed over x' onto the (t, x_n) plane
/// of the support box.  Sums are accumulated in long double so that unshifted
/// weights up to e^{1200} stay representable.
class MemberDensities {
public:
    MemberDensities(const GridFunction& u, const OperatorSymbol& op);

    /// Weighted left-side terms and right side at tau.  Throws
    /// std::domain_error if a result is not a finite double.
    std::pair<LhsResult, double> evaluate(double tau, const CarlemanWeight& w, double shift) const;
    /// max phi over the points where u is nonzero (the box if u == 0).
    double support_max_phi(const CarlemanWeight& w) const;
    /// max |phi| over the support box.
    double support_max_abs_phi(const CarlemanWeight& w) const;
    const OperatorSymbol& op() const { return op_; }
    const std::vector<std::size_t>& counts() const { return counts_; }

private:
    OperatorSymbol op_;
    std::vector<std::size_t> counts_;
    std::vector<LhsTerm> layout_;
    std::vector<std::vector<double>> densities_;
    std::vector<double> rhs_density_;
    std::vector<char> active_;
    std::vector<double> t_coords_;
    std::vector<double> xn_coords_;
    double cell_volume_ = 0.0;
};

/// Densities for every member, computed on up to `workers` threads.
std::vector<MemberDensities> member_densities(std::span<const GridFunction> family,
                                             const OperatorSymbol& op, std::size_t workers = 1);

struct TauPoint {
    double tau = 0.0;
    double c_star = 0.0;
    std::size_t argmax_member = 0;
    std::vector<LhsTerm> breakdown;  // contributions of the argmax member, divided by its rhs
    std::string dominant;
    double rhs_min = 0.0;
    std::size_t family_size = 0;
    std::size_t members_used = 0;
    bool degenerate = false;
};

struct SweepOptions {
    double cap_factor = 10.0;
    std::size_t workers = 1;
    bool renormalize = true;
};

struct SweepReport {
    OperatorKind kind = OperatorKind::parabolic;
    int m = 1;
    int n = 1;
    WeightKind weight = WeightKind::standard;
    double n_param = 0.0;
    double saddle_c = 0.0;
    TestFunctionSpec spec;
    std::vector<std::size_t> counts;
    bool renormalized = true;
    std::vector<TauPoint> points;
    double c_cap = 0.0;
    std::optional<double> tau0_est;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

inline constexpr double kMaxWeightExponent = 1200.0;

/// Log-spaced tau values in [lo, hi]; throws std::invalid_argument naming
/// "tau" when lo >= hi, lo <= 0 or points < 1.
std::vector<double> log_spaced(double lo, double hi, std::size_t points);

SweepReport sweep(const OperatorSymbol& op, const CarlemanWeight& w, const TestFunctionSpec& spec,
                  const Grid& g, std::span<const double> taus, std::size_t family_size,
                  const SweepOptions& options = {});

/// Same, on a caller-provided family.
SweepReport sweep(const OperatorSymbol& op, const CarlemanWeight& w, const TestFunctionSpec& spec,
                  std::span<const GridFunction> family, std::span<const double> taus,
                  const SweepOptions& options = {});

/// Same, on precomputed densities (the weight may change between calls).
SweepReport sweep(const CarlemanWeight& w, const TestFunctionSpec& spec,
                  std::span<const MemberDensities> members, std::span<const double> taus,
                  const SweepOptions& options = {});

/// max over the support box of |2 phi|.
double max_abs_two_phi(const CarlemanWeight& w, const TestFunctionSpec& spec);

/// Largest tau with tau * max|d_{x_n} phi| <= Nyquist(x_n) / 4 on the support.
double resolved_tau_max(const CarlemanWeight& w, const TestFunctionSpec& spec, const Grid& g);

/// min(200, kMaxWeightExponent / max|2 phi|, resolved_tau_max).
double default_tau_max(const CarlemanWeight& w, const TestFunctionSpec& spec, const Grid& g);

/// max C* over the upper half of the tau range <= factor * max over the lower half.
bool bounded_growth(const SweepReport& r, double factor = 2.0);

}  // namespace carlab::carleman
