#include "carlab/polycalc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace carlab::poly {

namespace {

void require_same_dimension(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw std::invalid_argument(os.str());
    }
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

template <class T>
T int_power(T base, int e) {
    T r{1};
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

// --- MultiIndex --------------------------------------------------------------

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int e : entries_)
        if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
}

MultiIndex MultiIndex::unit(std::size_t dimension, std::size_t j, int power) {
    if (j >= dimension) throw std::invalid_argument("MultiIndex::unit: slot out of range");
    MultiIndex m(dimension);
    m.entries_[j] = power;
    return m;
}

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    require_same_dimension(dimension(), other.dimension(), "MultiIndex::operator+");
    MultiIndex r = *this;
    for (std::size_t j = 0; j < entries_.size(); ++j) r.entries_[j] += other.entries_[j];
    return r;
}

bool MultiIndex::divides(const MultiIndex& other) const {
    if (dimension() != other.dimension()) return false;
    for (std::size_t j = 0; j < entries_.size(); ++j)
        if (entries_[j] > other.entries_[j]) return false;
    return true;
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
    if (!other.divides(*this)) throw std::invalid_argument("MultiIndex::operator-: negative result");
    MultiIndex r = *this;
    for (std::size_t j = 0; j < entries_.size(); ++j) r.entries_[j] -= other.entries_[j];
    return r;
}

double MultiIndex::factorial() const {
    double r = 1.0;
    for (int e : entries_)
        for (int i = 2; i <= e; ++i) r *= i;
    return r;
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < entries_.size(); ++j) os << (j ? "," : "") << entries_[j];
    os << ')';
    return os.str();
}

std::vector<MultiIndex> enumerate_multi_indices(std::size_t dimension, int max_order,
                                                int min_order) {
    std::vector<MultiIndex> out;
    if (max_order < 0 || dimension == 0) return out;
    min_order = std::max(min_order, 0);
    for (int order = min_order; order <= max_order; ++order) {
        // Compositions of `order` into `dimension` parts, lexicographically descending
        // in the first slot.
        std::vector<int> cur(dimension, 0);
        auto rec = [&](auto&& self, std::size_t slot, int remaining) -> void {
            if (slot + 1 == dimension) {
                cur[slot] = remaining;
                out.emplace_back(cur);
                return;
            }
            for (int v = remaining; v >= 0; --v) {
                cur[slot] = v;
                self(self, slot + 1, remaining - v);
            }
        };
        rec(rec, 0, order);
    }
    return out;
}

// --- Polynomial --------------------------------------------------------------

Polynomial::Polynomial(std::size_t dimension, TermMap terms)
    : dimension_(dimension), terms_(std::move(terms)) {
    for (const auto& [alpha, c] : terms_) {
        if (alpha.dimension() != dimension_)
            throw std::invalid_argument("Polynomial: term index has wrong length");
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::invalid_argument("Polynomial: non-finite coefficient");
    }
    prune();
}

Polynomial Polynomial::constant(std::size_t dimension, Complex value) {
    return Polynomial(dimension, {{MultiIndex(dimension), value}});
}

Polynomial Polynomial::variable(std::size_t dimension, std::size_t j) {
    return Polynomial(dimension, {{MultiIndex::unit(dimension, j), 1.0}});
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, Complex coefficient) {
    return Polynomial(alpha.dimension(), {{alpha, coefficient}});
}

void Polynomial::prune() {
    const double cut = kPruneRelative * max_abs_coefficient();
    std::erase_if(terms_, [cut](const auto& kv) {
        return kv.second == Complex{0.0, 0.0} || std::abs(kv.second) <= cut;
    });
}

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.order());
    return d;
}

Complex Polynomial::coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? Complex{} : it->second;
}

double Polynomial::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [alpha, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    require_same_dimension(dimension_, other.dimension_, "Polynomial::operator+");
    TermMap t = terms_;
    for (const auto& [alpha, c] : other.terms_) t[alpha] += c;
    return Polynomial(dimension_, std::move(t));
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + (-other); }

Polynomial Polynomial::operator-() const {
    TermMap t = terms_;
    for (auto& [alpha, c] : t) c = -c;
    return Polynomial(dimension_, std::move(t));
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    require_same_dimension(dimension_, other.dimension_, "Polynomial::operator*");
    TermMap t;
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : other.terms_) t[a + b] += ca * cb;
    return Polynomial(dimension_, std::move(t));
}

Polynomial Polynomial::operator*(Complex scalar) const {
    TermMap t = terms_;
    for (auto& [alpha, c] : t) c *= scalar;
    return Polynomial(dimension_, std::move(t));
}

Polynomial Polynomial::pow(int exponent) const {
    if (exponent < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
    Polynomial result = constant(dimension_, 1.0);
    Polynomial base = *this;
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        exponent >>= 1;
        if (exponent) base = base * base;
    }
    return result;
}

Polynomial Polynomial::lift(std::size_t new_dimension) const {
    if (new_dimension < dimension_) throw std::invalid_argument("Polynomial::lift: cannot shrink");
    TermMap t;
    for (const auto& [alpha, c] : terms_) {
        std::vector<int> e = alpha.entries();
        e.resize(new_dimension, 0);
        t.emplace(MultiIndex(std::move(e)), c);
    }
    return Polynomial(new_dimension, std::move(t));
}

bool Polynomial::approx_equal(const Polynomial& other, double tol) const {
    if (dimension_ != other.dimension_) return false;
    const double scale = std::max({max_abs_coefficient(), other.max_abs_coefficient(), 1e-300});
    TermMap diff = terms_;
    for (const auto& [alpha, c] : other.terms_) diff[alpha] -= c;
    for (const auto& [alpha, c] : diff)
        if (std::abs(c) > tol * scale) return false;
    return true;
}

nlohmann::json Polynomial::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [alpha, c] : terms_)
        terms.push_back({{"alpha", alpha.entries()}, {"re", c.real()}, {"im", c.imag()}});
    return {{"dimension", dimension_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
    const auto d = j.at("dimension").get<std::size_t>();
    TermMap t;
    for (const auto& term : j.at("terms")) {
        MultiIndex alpha(term.at("alpha").get<std::vector<int>>());
        if (alpha.dimension() != d)
            throw std::invalid_argument("Polynomial::from_json: alpha length != dimension");
        t[alpha] += Complex(term.value("re", 0.0), term.value("im", 0.0));
    }
    return Polynomial(d, std::move(t));
}

Polynomial derivative(const Polynomial& p, const MultiIndex& alpha) {
    require_same_dimension(p.dimension(), alpha.dimension(), "derivative");
    Polynomial::TermMap t;
    for (const auto& [gamma, c] : p.terms()) {
        if (!alpha.divides(gamma)) continue;
        double factor = 1.0;
        for (std::size_t j = 0; j < gamma.dimension(); ++j)
            for (int i = 0; i < alpha[j]; ++i) factor *= gamma[j] - i;
        t[gamma - alpha] += c * factor;
    }
    return Polynomial(p.dimension(), std::move(t));
}

Polynomial conjugate(const Polynomial& p) {
    Polynomial::TermMap t = p.terms();
    for (auto& [alpha, c] : t) c = std::conj(c);
    return Polynomial(p.dimension(), std::move(t));
}

Polynomial shift(const Polynomial& p, std::span<const Complex> w) {
    require_same_dimension(p.dimension(), w.size(), "shift");
    const std::size_t d = p.dimension();
    Polynomial::TermMap out;
    for (const auto& [gamma, c] : p.terms()) {
        // prod_j (xi_j + w_j)^{gamma_j}, expanded slot by slot.
        std::vector<std::pair<std::vector<int>, Complex>> partial{{std::vector<int>(d, 0), c}};
        for (std::size_t j = 0; j < d; ++j) {
            if (gamma[j] == 0) continue;
            std::vector<std::pair<std::vector<int>, Complex>> next;
            for (const auto& [e, v] : partial)
                for (int k = 0; k <= gamma[j]; ++k) {
                    Complex wpow = int_power(w[j], gamma[j] - k);
                    if (wpow == Complex{}) continue;
                    auto e2 = e;
                    e2[j] = k;
                    next.emplace_back(std::move(e2), v * binomial(gamma[j], k) * wpow);
                }
            partial = std::move(next);
        }
        for (auto& [e, v] : partial) out[MultiIndex(std::move(e))] += v;
    }
    return Polynomial(d, std::move(out));
}

namespace {

template <class Scalar>
Complex evaluate_impl(const Polynomial& p, std::span<const Scalar> z) {
    require_same_dimension(p.dimension(), z.size(), "evaluate");
    const int deg = std::max(p.degree(), 0);
    const std::size_t d = p.dimension();
    std::vector<Complex> powers(d * static_cast<std::size_t>(deg + 1));
    for (std::size_t j = 0; j < d; ++j) {
        Complex acc = 1.0;
        for (int k = 0; k <= deg; ++k) {
            powers[j * (deg + 1) + k] = acc;
            acc *= Complex(z[j]);
        }
    }
    Complex sum{};
    for (const auto& [alpha, c] : p.terms()) {
        Complex term = c;
        for (std::size_t j = 0; j < d; ++j)
            if (alpha[j]) term *= powers[j * (deg + 1) + alpha[j]];
        sum += term;
    }
    return sum;
}

}  // namespace

Complex evaluate(const Polynomial& p, std::span<const Complex> z) { return evaluate_impl(p, z); }
Complex evaluate(const Polynomial& p, std::span<const double> z) { return evaluate_impl(p, z); }

Polynomial substitute_linear(const Polynomial& p,
                             const std::vector<std::vector<Complex>>& map,
                             std::size_t new_dimension) {
    require_same_dimension(p.dimension(), map.size(), "substitute_linear");
    std::vector<Polynomial> images;
    images.reserve(map.size());
    for (const auto& row : map) {
        require_same_dimension(row.size(), new_dimension, "substitute_linear row");
        Polynomial::TermMap t;
        for (std::size_t k = 0; k < new_dimension; ++k)
            if (row[k] != Complex{}) t[MultiIndex::unit(new_dimension, k)] += row[k];
        images.emplace_back(new_dimension, std::move(t));
    }
    // Cache powers of each image.
    const int deg = std::max(p.degree(), 0);
    std::vector<std::vector<Polynomial>> pw(map.size());
    for (std::size_t j = 0; j < map.size(); ++j) {
        pw[j].push_back(Polynomial::constant(new_dimension, 1.0));
        for (int k = 1; k <= deg; ++k) pw[j].push_back(pw[j].back() * images[j]);
    }
    Polynomial out(new_dimension);
    for (const auto& [alpha, c] : p.terms()) {
        Polynomial term = Polynomial::constant(new_dimension, c);
        for (std::size_t j = 0; j < alpha.dimension(); ++j)
            if (alpha[j]) term = term * pw[j][alpha[j]];
        out = out + term;
    }
    return out;
}

DivisionResult divide(const Polynomial& p, const Polynomial& divisor) {
    require_same_dimension(p.dimension(), divisor.dimension(), "divide");
    if (divisor.is_zero()) throw std::domain_error("divide: zero divisor");
    const auto& [lead_m, lead_c] = *divisor.terms().rbegin();
    const std::size_t d = p.dimension();
    Polynomial::TermMap work = p.terms();
    Polynomial::TermMap quotient;
    Polynomial::TermMap remainder;
    const double cut = kPruneRelative * std::max(p.max_abs_coefficient(), 1e-300);
    while (!work.empty()) {
        auto it = std::prev(work.end());
        const MultiIndex m = it->first;
        const Complex c = it->second;
        work.erase(it);
        if (std::abs(c) <= cut) continue;
        if (lead_m.divides(m)) {
            const MultiIndex shift_m = m - lead_m;
            const Complex factor = c / lead_c;
            quotient[shift_m] += factor;
            for (const auto& [dm, dc] : divisor.terms()) {
                if (dm == lead_m) continue;  // cancels exactly against the removed term
                work[shift_m + dm] -= factor * dc;
            }
        } else {
            remainder[m] += c;
        }
    }
    return {Polynomial(d, std::move(quotient)), Polynomial(d, std::move(remainder))};
}

Polynomial sum_of_squares(std::size_t n) {
    Polynomial::TermMap t;
    for (std::size_t j = 0; j < n; ++j) t[MultiIndex::unit(n, j, 2)] = 1.0;
    return Polynomial(n, std::move(t));
}

// --- Ode1Operator ------------------------------------------------------------

Ode1Operator::Ode1Operator(CoefficientMap coeffs) : coeffs_(std::move(coeffs)) {
    for (const auto& [k, c] : coeffs_) {
        if (k < 0) throw std::invalid_argument("Ode1Operator: negative derivative order");
        if (c.dimension() != 1)
            throw std::invalid_argument("Ode1Operator: coefficients must be univariate");
    }
    prune();
}

void Ode1Operator::prune() {
    double scale = 0.0;
    for (const auto& [k, c] : coeffs_) scale = std::max(scale, c.max_abs_coefficient());
    const double cut = kPruneRelative * scale;
    for (auto& [k, c] : coeffs_) {
        Polynomial::TermMap t;
        for (const auto& [alpha, v] : c.terms())
            if (std::abs(v) > cut) t.emplace(alpha, v);
        c = Polynomial(1, std::move(t));
    }
    std::erase_if(coeffs_, [](const auto& kv) { return kv.second.is_zero(); });
}

Ode1Operator Ode1Operator::identity() { return derivative(0); }

Ode1Operator Ode1Operator::derivative(int k) {
    return Ode1Operator({{k, Polynomial::constant(1, 1.0)}});
}

Ode1Operator Ode1Operator::multiplication(const Polynomial& c) { return Ode1Operator({{0, c}}); }

int Ode1Operator::order() const { return coeffs_.empty() ? -1 : coeffs_.rbegin()->first; }

Polynomial Ode1Operator::coefficient(int k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? Polynomial(1) : it->second;
}

Ode1Operator Ode1Operator::operator+(const Ode1Operator& other) const {
    CoefficientMap c = coeffs_;
    for (const auto& [k, p] : other.coeffs_) {
        auto [it, inserted] = c.try_emplace(k, p);
        if (!inserted) it->second = it->second + p;
    }
    return Ode1Operator(std::move(c));
}

Ode1Operator Ode1Operator::operator-(const Ode1Operator& other) const {
    return *this + other * Complex(-1.0);
}

Ode1Operator Ode1Operator::operator*(Complex scalar) const {
    CoefficientMap c = coeffs_;
    for (auto& [k, p] : c) p = p * scalar;
    return Ode1Operator(std::move(c));
}

bool Ode1Operator::approx_equal(const Ode1Operator& other, double tol) const {
    double scale = 1e-300;
    for (const auto& [k, c] : coeffs_) scale = std::max(scale, c.max_abs_coefficient());
    for (const auto& [k, c] : other.coeffs_) scale = std::max(scale, c.max_abs_coefficient());
    const Ode1Operator diff = *this - other;
    for (const auto& [k, c] : diff.coeffs_)
        if (c.max_abs_coefficient() > tol * scale) return false;
    return true;
}

Ode1Operator compose1d(const Ode1Operator& a, const Ode1Operator& b) {
    const MultiIndex e1 = MultiIndex::unit(1, 0);
    Ode1Operator::CoefficientMap out;
    auto accumulate = [&out](int k, const Polynomial& p) {
        auto [it, inserted] = out.try_emplace(k, p);
        if (!inserted) it->second = it->second + p;
    };
    for (const auto& [j, aj] : a.coefficients()) {
        for (const auto& [k, bk] : b.coefficients()) {
            // D^r b_k = (-i)^r b_k^{(r)}
            Polynomial dr = bk;
            Complex minus_i_pow = 1.0;
            for (int r = 0; r <= j && !dr.is_zero(); ++r) {
                accumulate(j - r + k, aj * dr * (binomial(j, r) * minus_i_pow));
                dr = derivative(dr, e1);
                minus_i_pow *= Complex(0.0, -1.0);
            }
        }
    }
    return Ode1Operator(std::move(out));
}

namespace {

Ode1Operator power_of(const Ode1Operator& base, int k) {
    if (k < 0) throw std::invalid_argument("operator power: K must be >= 0");
    Ode1Operator r = Ode1Operator::identity();
    for (int i = 0; i < k; ++i) r = compose1d(base, r);
    return r;
}

}  // namespace

Ode1Operator build_conjugated_power(Sign sign, double tau, int k) {
    // D_s + sign * i tau (1 + s)
    const Complex c = sign_value(sign) * Complex(0.0, tau);
    Polynomial coef(1, {{MultiIndex{0}, c}, {MultiIndex{1}, c}});
    return power_of(Ode1Operator::derivative(1) + Ode1Operator::multiplication(coef), k);
}

Ode1Operator build_shifted_power(Sign sign, double tau, int k) {
    const Complex c = sign_value(sign) * Complex(0.0, tau);
    return power_of(
        Ode1Operator::derivative(1) + Ode1Operator::multiplication(Polynomial::constant(1, c)), k);
}

}  // namespace carlab::poly
