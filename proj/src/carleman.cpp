#include "carlab/carleman.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "carlab/parallel.hpp"

namespace carlab::carleman {

using grid::Complex;

namespace {

Polynomial laplacian_power(int m, int n) {
    // |xi|^{2m} in the variables (eta, xi_1..xi_n); eta is variable 0.
    Polynomial p2 = Polynomial::constant(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        const Polynomial x = Polynomial::variable(n + 1, j);
        p2 = p2 + x * x;
    }
    return p2.pow(m);
}

void check_mn(int m, int n) {
    if (m < 1) throw std::invalid_argument("operator: m must be >= 1");
    if (n < 1) throw std::invalid_argument("operator: n must be >= 1");
}

std::string number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Candidates for extrema of a + b x + c x^2 on [-h, h].
std::pair<double, double> quadratic_range(double b, double c, double h) {
    std::vector<double> xs{-h, h};
    if (c != 0.0) {
        const double v = -b / (2.0 * c);
        if (std::abs(v) <= h) xs.push_back(v);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : xs) {
        const double y = b * x + c * x * x;
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    return {lo, hi};
}

// Coefficients of phi = ct t^2 + bx x_n + cx x_n^2.
struct PhiCoefficients {
    double ct, bx, cx;
};

PhiCoefficients coefficients(const CarlemanWeight& w) {
    if (w.kind() == WeightKind::standard) return {-0.5 * w.n_param(), 1.0, 0.5};
    return {-2.0 * w.saddle_c(), 1.0, 0.5 * w.n_param()};
}

void validate_spec(const TestFunctionSpec& spec) {
    if (!(spec.delta_prime > 0.0)) throw std::invalid_argument("spec: delta_prime must be positive");
    if (spec.n < 1) throw std::invalid_argument("spec: n must be >= 1");
    if (spec.bump_count < 1) throw std::invalid_argument("spec: bump_count must be >= 1");
    if (!(spec.amplitude_min > 0.0) || spec.amplitude_max < spec.amplitude_min)
        throw std::invalid_argument("spec: need 0 < amplitude_min <= amplitude_max");
    if (spec.modulation_fraction < 0.0 || spec.modulation_fraction > 1.0)
        throw std::invalid_argument("spec: modulation_fraction must lie in [0, 1]");
}

struct Bump {
    std::vector<double> center;
    std::vector<double> radius;
    std::vector<double> wave;
    Complex amplitude;
};

}  // namespace

std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::parabolic: return "parabolic";
        case OperatorKind::schrodinger: return "schrodinger";
        case OperatorKind::custom: return "custom";
    }
    return "custom";
}

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "parabolic") return OperatorKind::parabolic;
    if (s == "schrodinger") return OperatorKind::schrodinger;
    if (s == "custom") return OperatorKind::custom;
    throw std::invalid_argument("operator kind must be parabolic or schrodinger, got '" + s + "'");
}

OperatorSymbol OperatorSymbol::parabolic(int m, int n) {
    check_mn(m, n);
    const Polynomial eta = Polynomial::variable(n + 1, 0);
    return {OperatorKind::parabolic, m, n, eta * Complex(0.0, 1.0) + laplacian_power(m, n)};
}

OperatorSymbol OperatorSymbol::schrodinger(int m, int n) {
    check_mn(m, n);
    const Polynomial eta = Polynomial::variable(n + 1, 0);
    return {OperatorKind::schrodinger, m, n, eta + laplacian_power(m, n)};
}

std::string to_string(WeightKind k) { return k == WeightKind::standard ? "standard" : "saddle"; }

WeightKind weight_kind_from_string(const std::string& s) {
    if (s == "standard") return WeightKind::standard;
    if (s == "saddle") return WeightKind::saddle;
    throw std::invalid_argument("weight kind must be standard or saddle, got '" + s + "'");
}

double CarlemanWeight::operator()(double t, double xn) const {
    if (kind_ == WeightKind::standard) return -n_ * t * t / 2.0 + xn + xn * xn / 2.0;
    return -2.0 * c_ * t * t + xn + n_ * xn * xn / 2.0;
}

std::pair<double, double> CarlemanWeight::gradient(double t, double xn) const {
    if (kind_ == WeightKind::standard) return {-n_ * t, 1.0 + xn};
    return {-4.0 * c_ * t, 1.0 + n_ * xn};
}

CarlemanWeight make_weight(WeightKind kind, double n, std::optional<double> saddle_c) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw std::invalid_argument("weight: N must be >= 0");
    CarlemanWeight w;
    w.kind_ = kind;
    w.n_ = n;
    if (kind == WeightKind::saddle) {
        if (!saddle_c || !(*saddle_c > 0.0) || !std::isfinite(*saddle_c))
            throw std::invalid_argument("weight: saddle weight requires c > 0");
        w.c_ = *saddle_c;
    }
    return w;
}

double time_confinement_preset(double delta, double delta0) {
    if (!(delta > 0.0) || !(delta0 > 0.0))
        throw std::invalid_argument("time_confinement_preset: delta and delta0 must be positive");
    return 4.0 / (delta0 * delta0) * delta * (1.0 - delta / 4.0);
}

Grid make_grid(const TestFunctionSpec& spec, std::vector<std::size_t> counts) {
    validate_spec(spec);
    const std::size_t d = static_cast<std::size_t>(spec.n) + 1;
    if (counts.size() != d) throw std::invalid_argument("make_grid: need 1 + n grid counts");
    std::vector<double> extents(d, 1.0);
    extents.front() = spec.delta_prime / 0.7;
    extents.back() = spec.delta_prime / 0.7;
    return Grid(std::move(extents), std::move(counts));
}

grid::Box support_box(const TestFunctionSpec& spec, const Grid& g) {
    const std::size_t d = g.dimension();
    std::vector<double> half(d, 0.75);
    half.front() = spec.delta_prime;
    half.back() = spec.delta_prime;
    return grid::Box::centered(std::move(half));
}

double mollifier(double r) {
    const double q = 1.0 - r * r;
    return q > 0.0 ? std::exp(1.0 - 1.0 / q) : 0.0;
}

std::vector<GridFunction> generate_family(const TestFunctionSpec& spec, const Grid& g,
                                          std::size_t count) {
    validate_spec(spec);
    const std::size_t d = g.dimension();
    if (d != static_cast<std::size_t>(spec.n) + 1)
        throw std::invalid_argument("generate_family: grid dimension must be 1 + n");
    const grid::Box box = support_box(spec, g);
    for (std::size_t j = 0; j < d; ++j) {
        if (box.hi[j] > (1.0 - grid::kPaddingFraction) * g.half_extent(j) + 1e-12)
            throw grid::PaddingError("generate_family: support box exceeds the padded region");
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<GridFunction> out;
    out.reserve(count);
    for (std::size_t member = 0; member < count; ++member) {
        std::vector<Bump> bumps(static_cast<std::size_t>(spec.bump_count));
        for (auto& b : bumps) {
            b.center.resize(d);
            b.radius.resize(d);
            b.wave.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double half = box.hi[j];
                const double r = half * (0.3 + 0.3 * unit(rng));
                b.radius[j] = r;
                b.center[j] = (half - r) * (2.0 * unit(rng) - 1.0);
                const double kmax = spec.modulation_fraction * std::numbers::pi / g.spacing(j);
                b.wave[j] = kmax * (2.0 * unit(rng) - 1.0);
            }
            const double mag = spec.amplitude_min + (spec.amplitude_max - spec.amplitude_min) * unit(rng);
            const double arg = 2.0 * std::numbers::pi * unit(rng);
            b.amplitude = spec.complex_amplitudes ? std::polar(mag, arg) : Complex(mag, 0.0);
        }

        std::vector<Complex> samples(g.size());
        std::vector<std::vector<Complex>> factors(d);
        for (const auto& b : bumps) {
            for (std::size_t j = 0; j < d; ++j) {
                factors[j].assign(g.count(j), Complex{});
                for (std::size_t i = 0; i < g.count(j); ++i) {
                    const double x = g.coordinate(j, i);
                    const double psi = mollifier((x - b.center[j]) / b.radius[j]);
                    if (psi != 0.0) factors[j][i] = psi * std::polar(1.0, b.wave[j] * x);
                }
            }
            std::vector<std::size_t> idx(d, 0);
            for (std::size_t flat = 0; flat < samples.size(); ++flat) {
                Complex v = b.amplitude;
                for (std::size_t j = 0; j < d && v != Complex{}; ++j) v *= factors[j][idx[j]];
                samples[flat] += v;
                for (std::size_t j = d; j-- > 0;) {
                    if (++idx[j] < g.count(j)) break;
                    idx[j] = 0;
                }
            }
        }
        out.emplace_back(g, std::move(samples), box);
    }
    return out;
}

std::string LhsTerm::label() const {
    if (time) return "Dt";
    std::string s = "Dx[";
    for (std::size_t j = 1; j < derivative.dimension(); ++j) {
        if (j > 1) s += ' ';
        s += std::to_string(derivative[j]);
    }
    return s + "]";
}

std::vector<LhsTerm> lhs_term_layout(const OperatorSymbol& op) {
    check_mn(op.m, op.n);
    const std::size_t n = static_cast<std::size_t>(op.n);
    const int m = op.m;
    auto lift = [&](const MultiIndex& a) {
        std::vector<int> e(n + 1, 0);
        for (std::size_t j = 0; j < n; ++j) e[j + 1] = a[j];
        return MultiIndex(std::move(e));
    };
    std::vector<LhsTerm> out;
    switch (op.kind) {
        case OperatorKind::parabolic:
            out.push_back({MultiIndex::unit(n + 1, 0), -m, true});
            for (const auto& a : poly::enumerate_multi_indices(n, 2 * m))
                out.push_back({lift(a), 3 * m - 2 * a.order(), false});
            break;
        case OperatorKind::schrodinger:
            for (const auto& a : poly::enumerate_multi_indices(n, 2 * m - 2))
                out.push_back({lift(a), 3 * m - 2 * a.order(), false});
            for (const auto& a : poly::enumerate_multi_indices(n, 2 * m - 2, 2 * m - 2))
                out.push_back({lift(a + MultiIndex::unit(n, n - 1)), 2 - m, false});
            break;
        case OperatorKind::custom:
            throw std::invalid_argument("lhs_term_layout: no left side is defined for custom operators");
    }
    return out;
}

// --- densities -------------------------------------------------------------------

MemberDensities::MemberDensities(const GridFunction& u, const OperatorSymbol& op)
    : op_(op), counts_(u.grid().counts()), layout_(lhs_term_layout(op)) {
    const Grid& g = u.grid();
    const std::size_t d = g.dimension();
    if (d != static_cast<std::size_t>(op.n) + 1)
        throw std::invalid_argument("carleman: function grid must have dimension 1 + n");
    if (!u.has_padding())
        throw grid::PaddingError("carleman: support box is within 25% of the grid boundary");
    const grid::IndexRange range = grid::index_range(g, u.support());
    const std::size_t last_axis = d - 1;
    auto extent = [&](std::size_t j) {
        return range.last[j] >= range.first[j] ? range.last[j] - range.first[j] + 1 : 0;
    };
    const std::size_t nt = extent(0);
    const std::size_t nx = d == 1 ? 1 : extent(last_axis);
    for (std::size_t i = 0; i < nt; ++i) t_coords_.push_back(g.coordinate(0, range.first[0] + i));
    for (std::size_t i = 0; i < nx; ++i)
        xn_coords_.push_back(g.coordinate(last_axis, range.first[last_axis] + i));
    cell_volume_ = g.cell_volume();

    // Sum |f|^2 over the box, projected onto (t, x_n).
    auto project = [&](const GridFunction& f) {
        std::vector<double> plane(nt * nx, 0.0);
        bool empty = false;
        for (std::size_t j = 0; j < d; ++j) empty = empty || extent(j) == 0;
        if (empty) return plane;
        std::vector<std::size_t> idx = range.first;
        const auto s = f.samples();
        while (true) {
            std::size_t flat = 0;
            for (std::size_t j = 0; j < d; ++j) flat += idx[j] * g.stride(j);
            plane[(idx[0] - range.first[0]) * nx + (idx[last_axis] - range.first[last_axis])] +=
                std::norm(s[flat]);
            std::size_t j = d;
            while (j-- > 0) {
                if (++idx[j] <= range.last[j]) break;
                idx[j] = range.first[j];
            }
            if (j == static_cast<std::size_t>(-1)) break;
        }
        return plane;
    };

    const std::vector<double> base = project(u);
    active_.resize(base.size());
    for (std::size_t p = 0; p < base.size(); ++p) active_[p] = base[p] > 0.0;

    const grid::Spectrum spectrum(u);
    densities_.reserve(layout_.size());
    for (const auto& term : layout_)
        densities_.push_back(term.derivative.order() == 0 ? base
                                                          : project(spectrum.derivative(term.derivative)));
    rhs_density_ = project(spectrum.apply(op.symbol));
}

double MemberDensities::support_max_phi(const CarlemanWeight& w) const {
    double best = -std::numeric_limits<double>::infinity();
    double box = best;
    const std::size_t nx = xn_coords_.size();
    for (std::size_t i = 0; i < t_coords_.size(); ++i)
        for (std::size_t k = 0; k < nx; ++k) {
            const double phi = w(t_coords_[i], xn_coords_[k]);
            box = std::max(box, phi);
            if (active_[i * nx + k]) best = std::max(best, phi);
        }
    return std::isfinite(best) ? best : (std::isfinite(box) ? box : 0.0);
}

double MemberDensities::support_max_abs_phi(const CarlemanWeight& w) const {
    double best = 0.0;
    for (double t : t_coords_)
        for (double x : xn_coords_) best = std::max(best, std::abs(w(t, x)));
    return best;
}

std::pair<LhsResult, double> MemberDensities::evaluate(double tau, const CarlemanWeight& w,
                                                       double shift) const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("carleman: tau must be positive");
    const std::size_t nx = xn_coords_.size();
    std::vector<long double> weight(active_.size(), 0.0L);
    for (std::size_t i = 0; i < t_coords_.size(); ++i)
        for (std::size_t k = 0; k < nx; ++k) {
            const std::size_t p = i * nx + k;
            if (active_[p])
                weight[p] = std::exp(2.0L * tau * (static_cast<long double>(w(t_coords_[i], xn_coords_[k])) - shift));
        }
    auto integrate = [&](const std::vector<double>& density) {
        long double acc = 0.0L;
        for (std::size_t p = 0; p < density.size(); ++p)
            if (active_[p]) acc += weight[p] * density[p];
        return acc * cell_volume_;
    };
    auto finite = [](long double v, const char* what) {
        if (!std::isfinite(v) || v > std::numeric_limits<double>::max())
            throw std::domain_error(std::string("carleman: non-finite weighted norm in ") + what +
                                    "; renormalize the weight");
        return static_cast<double>(v);
    };

    LhsResult lhs;
    lhs.terms = layout_;
    long double total = 0.0L;
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        const long double norm = integrate(densities_[i]);
        const long double contribution = std::pow(static_cast<long double>(tau), layout_[i].tau_exponent) * norm;
        lhs.terms[i].norm = finite(norm, "lhs");
        lhs.terms[i].contribution = finite(contribution, "lhs");
        total += contribution;
    }
    lhs.total = finite(total, "lhs");
    return {std::move(lhs), finite(integrate(rhs_density_), "rhs")};
}

std::vector<MemberDensities> member_densities(std::span<const GridFunction> family,
                                             const OperatorSymbol& op, std::size_t workers) {
    std::vector<std::optional<MemberDensities>> slots(family.size());
    parallel_for(family.size(), workers, [&](std::size_t i) { slots[i].emplace(family[i], op); });
    std::vector<MemberDensities> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

double support_shift(const CarlemanWeight& w, const GridFunction& u) {
    // Only the (t, x_n) support matters; the operator choice does not.
    const grid::Box& box = u.support();
    const Grid& g = u.grid();
    const grid::IndexRange range = grid::index_range(g, box);
    const std::size_t d = g.dimension();
    double best = -std::numeric_limits<double>::infinity();
    double fallback = best;
    std::vector<double> x(d);
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        std::size_t rest = flat;
        bool inside = true;
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t i = rest / g.stride(j);
            rest %= g.stride(j);
            inside = inside && i >= range.first[j] && i <= range.last[j];
            x[j] = g.coordinate(j, i);
        }
        if (!inside) continue;
        const double phi = w.at(x);
        fallback = std::max(fallback, phi);
        if (u[flat] != Complex{}) best = std::max(best, phi);
    }
    return std::isfinite(best) ? best : (std::isfinite(fallback) ? fallback : 0.0);
}

LhsResult carleman_lhs(const GridFunction& u, double tau, const CarlemanWeight& w,
                       const OperatorSymbol& op, std::optional<double> shift) {
    const MemberDensities md(u, op);
    return md.evaluate(tau, w, shift.value_or(md.support_max_phi(w))).first;
}

double carleman_rhs(const GridFunction& u, double tau, const CarlemanWeight& w,
                    const OperatorSymbol& op, std::optional<double> shift) {
    const MemberDensities md(u, op);
    return md.evaluate(tau, w, shift.value_or(md.support_max_phi(w))).second;
}

// --- sweeps -------------------------------------------------------------------------

std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    if (points < 1) throw std::invalid_argument("tau: need at least one point");
    if (!(lo > 0.0) || !std::isfinite(hi)) throw std::invalid_argument("tau: range must be positive and finite");
    if (points == 1) {
        if (hi < lo) throw std::invalid_argument("tau: min must not exceed max");
        return {lo};
    }
    if (!(lo < hi)) throw std::invalid_argument("tau: min must be smaller than max");
    std::vector<double> out(points);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

double max_abs_two_phi(const CarlemanWeight& w, const TestFunctionSpec& spec) {
    const PhiCoefficients c = coefficients(w);
    const double h = spec.delta_prime;
    const auto [tlo, thi] = quadratic_range(0.0, c.ct, h);
    const auto [xlo, xhi] = quadratic_range(c.bx, c.cx, h);
    return 2.0 * std::max(std::abs(tlo + xlo), std::abs(thi + xhi));
}

double resolved_tau_max(const CarlemanWeight& w, const TestFunctionSpec& spec, const Grid& g) {
    const PhiCoefficients c = coefficients(w);
    const double h = spec.delta_prime;
    const double slope = std::max(std::abs(c.bx + 2.0 * c.cx * h), std::abs(c.bx - 2.0 * c.cx * h));
    const double band = 0.25 * std::numbers::pi / g.spacing(g.dimension() - 1);
    return slope > 0.0 ? band / slope : std::numeric_limits<double>::infinity();
}

double default_tau_max(const CarlemanWeight& w, const TestFunctionSpec& spec, const Grid& g) {
    return std::min({200.0, kMaxWeightExponent / max_abs_two_phi(w, spec), resolved_tau_max(w, spec, g)});
}

SweepReport sweep(const CarlemanWeight& w, const TestFunctionSpec& spec,
                  std::span<const MemberDensities> members, std::span<const double> taus,
                  const SweepOptions& options) {
    if (members.empty()) throw std::invalid_argument("sweep: empty family");
    if (taus.empty()) throw std::invalid_argument("tau: empty tau grid");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0) || !std::isfinite(taus[i]))
            throw std::invalid_argument("tau: values must be positive and finite");
        if (i > 0 && !(taus[i] > taus[i - 1]))
            throw std::invalid_argument("tau: grid must be strictly increasing");
    }
    if (taus.back() * max_abs_two_phi(w, spec) > kMaxWeightExponent)
        throw grid::OverflowGuardError("tau: tau_max * max|2 phi| exceeds 1200 on the support");
    const OperatorSymbol& op = members.front().op();
    if (op.kind == OperatorKind::schrodinger && !(spec.delta_prime < 0.5))
        throw std::invalid_argument("spec: Schrodinger sweeps require delta_prime < 1/2");
    SweepReport r;
    r.kind = op.kind;
    r.m = op.m;
    r.n = op.n;
    r.weight = w.kind();
    r.n_param = w.n_param();
    r.saddle_c = w.saddle_c();
    r.spec = spec;
    r.counts = members.front().counts();
    r.renormalized = options.renormalize;

    std::vector<double> shifts(members.size(), 0.0);
    if (options.renormalize)
        for (std::size_t k = 0; k < members.size(); ++k) shifts[k] = members[k].support_max_phi(w);

    // Slot (tau index, member index) holds one pure evaluation.
    const std::size_t nm = members.size();
    std::vector<std::pair<LhsResult, double>> cells(taus.size() * nm);
    parallel_for(cells.size(), options.workers, [&](std::size_t c) {
        const std::size_t ti = c / nm;
        const std::size_t k = c % nm;
        cells[c] = members[k].evaluate(taus[ti], w, shifts[k]);
    });

    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        TauPoint pt;
        pt.tau = taus[ti];
        pt.family_size = nm;
        pt.rhs_min = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t k = 0; k < nm; ++k) {
            const auto& [lhs, rhs] = cells[ti * nm + k];
            pt.rhs_min = std::min(pt.rhs_min, rhs);
            if (!(rhs > 1e-280)) continue;
            ++pt.members_used;
            const double ratio = lhs.total / rhs;
            if (!found || ratio > pt.c_star) {
                found = true;
                pt.c_star = ratio;
                pt.argmax_member = k;
            }
        }
        pt.degenerate = !found;
        if (found) {
            const auto& [lhs, rhs] = cells[ti * nm + pt.argmax_member];
            pt.breakdown = lhs.terms;
            double top = -1.0;
            for (auto& t : pt.breakdown) {
                t.contribution /= rhs;
                if (t.contribution > top) {
                    top = t.contribution;
                    pt.dominant = t.label();
                }
            }
        }
        r.points.push_back(std::move(pt));
    }

    std::vector<double> valid;
    for (const auto& p : r.points)
        if (!p.degenerate) valid.push_back(p.c_star);
    if (!valid.empty()) {
        std::vector<double> sorted = valid;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        r.c_cap = options.cap_factor * median;
        // Smallest tau from which every later non-degenerate point stays under the cap.
        for (std::size_t i = r.points.size(); i-- > 0;) {
            const auto& p = r.points[i];
            if (p.degenerate) continue;
            if (p.c_star > r.c_cap) break;
            r.tau0_est = p.tau;
        }
    }
    return r;
}

SweepReport sweep(const OperatorSymbol& op, const CarlemanWeight& w, const TestFunctionSpec& spec,
                  std::span<const GridFunction> family, std::span<const double> taus,
                  const SweepOptions& options) {
    if (family.empty()) throw std::invalid_argument("sweep: empty family");
    if (taus.empty()) throw std::invalid_argument("tau: empty tau grid");
    const auto members = member_densities(family, op, options.workers);
    return sweep(w, spec, members, taus, options);
}

SweepReport sweep(const OperatorSymbol& op, const CarlemanWeight& w, const TestFunctionSpec& spec,
                  const Grid& g, std::span<const double> taus, std::size_t family_size,
                  const SweepOptions& options) {
    if (op.kind == OperatorKind::schrodinger && !(spec.delta_prime < 0.5))
        throw std::invalid_argument("spec: Schrodinger sweeps require delta_prime < 1/2");
    const auto family = generate_family(spec, g, family_size);
    return sweep(op, w, spec, std::span<const GridFunction>(family), taus, options);
}

bool bounded_growth(const SweepReport& r, double factor) {
    std::vector<double> values;
    for (const auto& p : r.points) {
        if (p.degenerate) continue;
        if (!std::isfinite(p.c_star)) return false;
        values.push_back(p.c_star);
    }
    if (values.empty()) return false;
    if (values.size() == 1) return true;
    const std::size_t half = values.size() / 2;
    const double lower = *std::max_element(values.begin(), values.begin() + half);
    const double upper = *std::max_element(values.begin() + half, values.end());
    return upper <= factor * lower;
}

nlohmann::json SweepReport::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        nlohmann::json breakdown = nlohmann::json::object();
        for (const auto& t : p.breakdown)
            breakdown[t.label()] = {{"tau_exponent", t.tau_exponent}, {"ratio", t.contribution}};
        pts.push_back({{"tau", p.tau},
                       {"C_star", p.degenerate ? nlohmann::json(nullptr) : nlohmann::json(p.c_star)},
                       {"argmax_member", p.argmax_member},
                       {"dominant_alpha", p.dominant},
                       {"rhs_min", p.rhs_min},
                       {"family_size", p.family_size},
                       {"members_used", p.members_used},
                       {"degenerate", p.degenerate},
                       {"breakdown", breakdown}});
    }
    return {{"operator", {{"kind", carleman::to_string(kind)}, {"m", m}, {"n", n}}},
            {"weight", {{"kind", carleman::to_string(weight)}, {"N", n_param}, {"c", saddle_c}}},
            {"spec",
             {{"delta_prime", spec.delta_prime},
              {"bumps", spec.bump_count},
              {"seed", spec.seed},
              {"amplitude", {spec.amplitude_min, spec.amplitude_max}},
              {"modulation_fraction", spec.modulation_fraction}}},
            {"grid", counts},
            {"renormalized", renormalized},
            {"C_cap", c_cap},
            {"tau0_est", tau0_est ? nlohmann::json(*tau0_est) : nlohmann::json(nullptr)},
            {"bounded_growth", bounded_growth(*this)},
            {"points", pts}};
}

std::string SweepReport::to_csv() const {
    std::string out = "tau,C_star,dominant_alpha,rhs_min\n";
    for (const auto& p : points) {
        out += number(p.tau) + ',' + (p.degenerate ? std::string("nan") : number(p.c_star)) + ',' +
               p.dominant + ',' + number(p.rhs_min) + '\n';
    }
    return out;
}

}  // namespace carlab::carleman
