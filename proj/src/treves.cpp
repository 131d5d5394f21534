#include "carlab/treves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace carlab::treves {

using grid::WeightField;

namespace {

nlohmann::json alpha_json(const MultiIndex& a) { return a.entries(); }

struct Constants {
    double c23 = 0.0;
    double c24 = 0.0;
    std::size_t points = 0;
};

Constants lemma23_constants(const Lemma23Params& prm, const GridFunction& u) {
    const int K = prm.k;
    std::vector<MultiIndex> betas;
    for (int k = 0; k <= K; ++k) betas.push_back(MultiIndex{k});
    const auto derivs = grid::spectral_derivatives(u, betas);
    const poly::Ode1Operator conj = poly::build_conjugated_power(prm.sign, prm.tau, K);
    const poly::Ode1Operator flat = poly::build_shifted_power(prm.sign, prm.tau, K);

    Constants c;
    const auto& g = u.grid();
    for (std::size_t i = 0; i < g.count(0); ++i) {
        const double s = g.coordinate(0, i);
        if (std::abs(s) >= prm.delta) continue;
        ++c.points;
        const std::array<double, 1> x{s};
        grid::Complex conj_u{}, flat_u{};
        for (int k = 0; k <= K; ++k) {
            conj_u += poly::evaluate(conj.coefficient(k), std::span<const double>(x)) * derivs[k][i];
            flat_u += poly::evaluate(flat.coefficient(k), std::span<const double>(x)) * derivs[k][i];
        }
        double rhs23 = 0.0, rhs24 = 0.0;
        for (int k = 0; k < K; ++k) {
            const double a = std::abs(derivs[k][i]);
            rhs23 += std::pow(prm.tau, K - k) * a;
            rhs24 += std::pow(prm.tau, K - 1 - k) * a;
        }
        rhs24 *= 1.0 + prm.delta * prm.tau;
        const double lhs23 = std::abs(conj_u - derivs[K][i]);
        const double lhs24 = std::abs(conj_u - flat_u);
        if (rhs23 > kDenominatorFloor) c.c23 = std::max(c.c23, lhs23 / rhs23);
        if (rhs24 > kDenominatorFloor) c.c24 = std::max(c.c24, lhs24 / rhs24);
    }
    return c;
}

bool stable(double coarse, double fine) {
    if (!std::isfinite(coarse) || !std::isfinite(fine)) return false;
    if (coarse == 0.0 && fine == 0.0) return true;
    return std::abs(fine - coarse) <= kRefinementStability * std::max(std::abs(coarse), 1e-300);
}

}  // namespace

nlohmann::json IdentityReport::to_json() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [alpha, v] : terms) t.push_back({{"alpha", alpha_json(alpha)}, {"value", v}});
    return {{"lhs", lhs}, {"rhs", rhs}, {"relative_error", relative_error}, {"terms", t}};
}

nlohmann::json Lemma22Report::to_json() const {
    nlohmann::json j{{"pass", pass}, {"vacuous", vacuous}, {"members_used", members_used}, {"seed", seed}};
    j["C_est"] = c_est ? nlohmann::json(*c_est) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json Lemma23Report::to_json() const {
    return {{"K", params.k},
            {"tau", params.tau},
            {"delta", params.delta},
            {"sign", params.sign == Sign::plus ? "+" : "-"},
            {"C_est_23", c_est_23},
            {"C_est_24", c_est_24},
            {"C_est_23_refined", c_est_23_refined},
            {"C_est_24_refined", c_est_24_refined},
            {"pass_23", pass_23},
            {"pass_24", pass_24},
            {"points", points}};
}

std::vector<MultiIndex> curvature_indices(std::span<const double> b, int max_order, int min_order) {
    std::vector<MultiIndex> out;
    for (auto& alpha : poly::enumerate_multi_indices(b.size(), max_order, min_order)) {
        bool ok = true;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (b[j] == 0.0 && alpha[j] != 0) ok = false;
        if (ok) out.push_back(std::move(alpha));
    }
    return out;
}

double power(std::span<const double> b, const MultiIndex& alpha) {
    double r = 1.0;
    for (std::size_t j = 0; j < b.size(); ++j)
        for (int i = 0; i < alpha[j]; ++i) r *= b[j];
    return r;
}

IdentityReport verify_treves(const Polynomial& p, const QuadraticWeight& q, const GridFunction& u) {
    const auto& g = u.grid();
    if (p.dimension() != g.dimension() || q.dimension() != g.dimension())
        throw std::invalid_argument("verify_treves: dimension mismatch");
    const WeightField w = WeightField::from_quadratic(g, q);
    if (w.max_abs_on(u.support()) > 2.0 * grid::kOverflowGuard)
        throw grid::OverflowGuardError("verify_treves: e^Q leaves double range on the support");

    IdentityReport r;
    r.lhs = grid::weighted_l2(grid::apply_symbol(p, u), w);

    // v = e^{Q/2} u, restricted to the support box.
    std::vector<grid::Complex> vs(u.size());
    const auto ws = w.samples();
    for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = u[i] * std::exp(0.5 * ws[i]);
    GridFunction v(g, std::move(vs), u.support());
    v.clamp_to_support();

    const Polynomial pbar = poly::conjugate(p);
    for (const auto& alpha : curvature_indices(q.b, std::max(p.degree(), 0))) {
        const Polynomial d = poly::derivative(pbar, alpha);
        const double coef = power(q.b, alpha) / alpha.factorial();
        const double norm =
            d.is_zero() ? 0.0 : grid::weighted_l2(grid::apply_conjugated(d, w, Sign::minus, v));
        r.terms[alpha] = coef * norm;
        r.rhs += coef * norm;
    }
    r.relative_error = std::abs(r.lhs - r.rhs) / std::max({r.lhs, r.rhs, 1e-300});
    return r;
}

Lemma22Report estimate_lemma22(const Polynomial& p, const QuadraticWeight& q, int k,
                               std::span<const GridFunction> family, std::uint64_t seed) {
    for (double bj : q.b)
        if (bj < 0.0) throw std::invalid_argument("estimate_lemma22: requires b_j >= 0 for all j");
    if (family.empty()) throw std::invalid_argument("estimate_lemma22: empty family");
    Lemma22Report r;
    r.seed = seed;
    const auto indices = curvature_indices(q.b, std::max(p.degree(), 0), k);
    // Terms with b^alpha = 0 or P^(alpha) = 0 contribute nothing.
    std::vector<std::pair<MultiIndex, double>> active;
    for (const auto& a : indices) {
        const double ba = power(q.b, a);
        if (ba != 0.0 && !poly::derivative(p, a).is_zero()) active.emplace_back(a, ba);
    }
    if (active.empty()) {
        r.vacuous = true;
        r.pass = true;
        return r;
    }
    const Polynomial pbar = poly::conjugate(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : family) {
        const WeightField w = WeightField::from_quadratic(v.grid(), q);
        double left = 0.0, right = 0.0;
        for (const auto& [a, ba] : active) {
            left += ba * grid::weighted_l2(
                             grid::apply_conjugated(poly::derivative(pbar, a), w, Sign::minus, v));
            right += ba * grid::weighted_l2(
                              grid::apply_conjugated(poly::derivative(p, a), w, Sign::plus, v));
        }
        if (right < kDenominatorFloor) continue;
        ++r.members_used;
        best = std::min(best, left / right);
    }
    if (r.members_used == 0) {
        r.vacuous = true;
        r.pass = true;
        return r;
    }
    r.c_est = best;
    r.pass = std::isfinite(best) && best > 0.0;
    return r;
}

Lemma23Report verify_lemma23(const Lemma23Params& params, const GridFunction& u) {
    return verify_lemma23(params, std::span<const GridFunction>(&u, 1));
}

Lemma23Report verify_lemma23(const Lemma23Params& params, std::span<const GridFunction> family) {
    if (params.k < 1) throw std::invalid_argument("verify_lemma23: K must be >= 1");
    if (!(params.delta > 0.0) || params.delta > params.delta0)
        throw std::invalid_argument("verify_lemma23: need 0 < delta <= delta0");
    if (!(params.tau > params.tau0)) throw std::invalid_argument("verify_lemma23: need tau > tau0");
    if (family.empty()) throw std::invalid_argument("verify_lemma23: empty family");
    Lemma23Report r;
    r.params = params;
    for (const auto& u : family) {
        if (u.grid().dimension() != 1)
            throw std::invalid_argument("verify_lemma23: functions must be one-dimensional");
        const Constants coarse = lemma23_constants(params, u);
        const Constants fine = lemma23_constants(params, grid::spectral_refine(u, 2));
        r.c_est_23 = std::max(r.c_est_23, coarse.c23);
        r.c_est_24 = std::max(r.c_est_24, coarse.c24);
        r.c_est_23_refined = std::max(r.c_est_23_refined, fine.c23);
        r.c_est_24_refined = std::max(r.c_est_24_refined, fine.c24);
        r.points += coarse.points;
    }
    r.pass_23 = stable(r.c_est_23, r.c_est_23_refined);
    r.pass_24 = stable(r.c_est_24, r.c_est_24_refined);
    return r;
}

Polynomial random_polynomial(std::mt19937_64& rng, std::size_t dimension, int degree) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Polynomial::TermMap t;
    for (const auto& alpha : poly::enumerate_multi_indices(dimension, degree))
        t[alpha] = {unit(rng), unit(rng)};
    // Keep the degree exact.
    t[MultiIndex::unit(dimension, dimension - 1, degree)] += 1.0;
    return Polynomial(dimension, std::move(t));
}

TrevesCase random_treves_case(std::uint64_t seed, std::size_t dimension, int max_degree,
                              bool zero_weight, std::size_t points) {
    if (dimension < 1) throw std::invalid_argument("random_treves_case: dimension must be >= 1");
    if (max_degree < 1) throw std::invalid_argument("random_treves_case: degree must be >= 1");
    if (points == 0) points = dimension == 1 ? 512 : 256;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int degree = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_degree));

    TrevesCase c{random_polynomial(rng, dimension, degree), QuadraticWeight::zero(dimension), {}};
    std::vector<double> center(dimension), wave(dimension);
    for (std::size_t j = 0; j < dimension; ++j) {
        const double a = 2.0 * unit(rng);
        const double b = 2.0 * unit(rng);
        if (!zero_weight) {
            c.q.a[j] = a;
            c.q.b[j] = b;
        }
        center[j] = 0.5 * unit(rng);
        wave[j] = 2.0 * unit(rng);
    }
    const grid::Grid g(std::vector<double>(dimension, 4.0), std::vector<std::size_t>(dimension, points));
    c.u = grid::gaussian(g, center, 0.3, wave, std::polar(1.0, 3.0 * unit(rng)));
    return c;
}

std::vector<GridFunction> bump_family_1d(std::uint64_t seed, std::size_t count, std::size_t points) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const grid::Grid g({4.0}, {points});
    std::vector<GridFunction> out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::array<double, 1> center{0.5 * unit(rng)};
        const double sigma = 0.45 + 0.15 * unit(rng);
        const std::array<double, 1> wave{5.0 * unit(rng)};
        const grid::Complex amp = std::polar(0.75 + 0.25 * unit(rng), 3.0 * unit(rng));
        out.push_back(grid::gaussian(g, center, sigma, wave, amp));
    }
    return out;
}

}  // namespace carlab::treves
