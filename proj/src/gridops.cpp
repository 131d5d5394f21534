#include "carlab/gridops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace carlab::grid {

namespace {

bool is_power_of_two(std::size_t n) { return n && (n & (n - 1)) == 0; }

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Visit every grid point of `range`, passing the flat index and coordinates.
template <class Fn>
void for_each_point(const Grid& grid, const IndexRange& range, Fn&& fn) {
    const std::size_t d = grid.dimension();
    for (std::size_t j = 0; j < d; ++j)
        if (range.first[j] > range.last[j]) return;
    std::vector<std::size_t> idx = range.first;
    std::vector<double> x(d);
    std::vector<std::size_t> strides(d);
    for (std::size_t j = 0; j < d; ++j) strides[j] = grid.stride(j);
    while (true) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < d; ++j) {
            flat += idx[j] * strides[j];
            x[j] = grid.coordinate(j, idx[j]);
        }
        fn(flat, std::span<const double>(x));
        std::size_t j = d;
        while (j > 0) {
            --j;
            if (idx[j] < range.last[j]) {
                ++idx[j];
                break;
            }
            idx[j] = range.first[j];
            if (j == 0) return;
        }
    }
}

IndexRange full_range(const Grid& grid) {
    IndexRange r;
    for (std::size_t j = 0; j < grid.dimension(); ++j) {
        r.first.push_back(0);
        r.last.push_back(grid.count(j) - 1);
    }
    return r;
}

// FFTW planning is not thread-safe; plans are created under a lock and then
// executed through the new-array interface, which is.
class PlanCache {
public:
    fftw_plan get(const std::vector<std::size_t>& counts, int direction) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(counts, direction);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<int> n(counts.begin(), counts.end());
        std::size_t total = 1;
        for (auto c : counts) total *= c;
        auto* buf = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, direction,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void execute(const Grid& grid, std::vector<Complex>& data, int direction) {
    if (data.size() != grid.size()) throw std::invalid_argument("fft: size mismatch");
    fftw_plan plan = plan_cache().get(grid.counts(), direction);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

/// Per-axis tables xi_j^k for k = 0..max_power in FFT storage order.
std::vector<std::vector<std::vector<double>>> frequency_powers(const Grid& grid, int max_power) {
    std::vector<std::vector<std::vector<double>>> out(grid.dimension());
    for (std::size_t j = 0; j < grid.dimension(); ++j) {
        const auto xi = frequencies(grid, j);
        out[j].assign(max_power + 1, std::vector<double>(xi.size(), 1.0));
        for (int k = 1; k <= max_power; ++k)
            for (std::size_t i = 0; i < xi.size(); ++i) out[j][k][i] = out[j][k - 1][i] * xi[i];
    }
    return out;
}

/// Multiplies the spectrum in place by the symbol P(xi).
void multiply_by_symbol(const Grid& grid, const Polynomial& p, std::vector<Complex>& spectrum) {
    const auto tables = frequency_powers(grid, std::max(p.degree(), 0));
    const std::size_t d = grid.dimension();
    std::vector<std::size_t> idx(d, 0);
    std::vector<std::pair<std::vector<int>, Complex>> terms;
    for (const auto& [alpha, c] : p.terms()) terms.emplace_back(alpha.entries(), c);
    for (std::size_t flat = 0; flat < spectrum.size(); ++flat) {
        Complex value{};
        for (const auto& [alpha, c] : terms) {
            double m = 1.0;
            for (std::size_t j = 0; j < d; ++j)
                if (alpha[j]) m *= tables[j][alpha[j]][idx[j]];
            value += c * m;
        }
        spectrum[flat] *= value;
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < grid.count(j)) break;
            idx[j] = 0;
        }
    }
}

void check_padding(const GridFunction& f, const char* what) {
    if (!f.has_padding()) {
        throw PaddingError(std::string(what) +
                           ": support box is within 25% of the grid boundary on some axis");
    }
}

template <class T>
void put(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw std::runtime_error("read_binary: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

// --- Grid ----------------------------------------------------------------------

Grid::Grid(std::vector<double> half_extent, std::vector<std::size_t> counts)
    : half_extent_(std::move(half_extent)), counts_(std::move(counts)) {
    if (half_extent_.size() != counts_.size() || half_extent_.empty())
        throw std::invalid_argument("Grid: extents and counts must have equal nonzero length");
    for (std::size_t j = 0; j < counts_.size(); ++j) {
        if (!(half_extent_[j] > 0.0) || !std::isfinite(half_extent_[j]))
            throw std::invalid_argument("Grid: half extent must be positive");
        if (counts_[j] < kMinPoints || !is_power_of_two(counts_[j])) {
            std::ostringstream os;
            os << "Grid: axis " << j << " point count " << counts_[j]
               << " must be a power of two >= " << kMinPoints;
            throw std::invalid_argument(os.str());
        }
    }
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < dimension(); ++j) v *= spacing(j);
    return v;
}

std::size_t Grid::size() const {
    std::size_t n = 1;
    for (auto c : counts_) n *= c;
    return n;
}

std::size_t Grid::stride(std::size_t j) const {
    std::size_t s = 1;
    for (std::size_t k = j + 1; k < counts_.size(); ++k) s *= counts_[k];
    return s;
}

Grid Grid::refined(std::size_t factor) const {
    auto c = counts_;
    for (auto& v : c) v *= factor;
    return Grid(half_extent_, c);
}

Box Box::centered(std::vector<double> half_widths) {
    Box b;
    for (double h : half_widths) {
        b.lo.push_back(-h);
        b.hi.push_back(h);
    }
    return b;
}

bool Box::contains(std::span<const double> x) const {
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] < lo[j] || x[j] > hi[j]) return false;
    return true;
}

IndexRange index_range(const Grid& grid, const Box& box) {
    if (box.lo.size() != grid.dimension() || box.hi.size() != grid.dimension())
        throw std::invalid_argument("index_range: box dimension mismatch");
    IndexRange r;
    for (std::size_t j = 0; j < grid.dimension(); ++j) {
        const double h = grid.spacing(j);
        const double L = grid.half_extent(j);
        const auto n = static_cast<long long>(grid.count(j));
        const auto first = std::max(0LL, static_cast<long long>(std::ceil((box.lo[j] + L) / h - 1e-9)));
        const auto last = std::min(n - 1, static_cast<long long>(std::floor((box.hi[j] + L) / h + 1e-9)));
        if (first > last) {
            // empty: encoded as first > last
            r.first.push_back(1);
            r.last.push_back(0);
        } else {
            r.first.push_back(static_cast<std::size_t>(first));
            r.last.push_back(static_cast<std::size_t>(last));
        }
    }
    return r;
}

// --- GridFunction --------------------------------------------------------------

GridFunction::GridFunction(Grid grid, std::vector<Complex> samples, Box support)
    : grid_(std::move(grid)), samples_(std::move(samples)), support_(std::move(support)) {
    if (samples_.size() != grid_.size())
        throw std::invalid_argument("GridFunction: sample count does not match grid");
    if (support_.lo.size() != grid_.dimension() || support_.hi.size() != grid_.dimension())
        throw std::invalid_argument("GridFunction: support box dimension mismatch");
}

GridFunction GridFunction::sample(const Grid& grid, const Box& support,
                                  const std::function<Complex(std::span<const double>)>& f) {
    std::vector<Complex> s(grid.size());
    for_each_point(grid, full_range(grid),
                   [&](std::size_t flat, std::span<const double> x) { s[flat] = f(x); });
    return GridFunction(grid, std::move(s), support);
}

GridFunction GridFunction::zeros(const Grid& grid, const Box& support) {
    return GridFunction(grid, std::vector<Complex>(grid.size()), support);
}

bool GridFunction::has_padding() const {
    for (std::size_t j = 0; j < grid_.dimension(); ++j) {
        const double bound = (1.0 - kPaddingFraction) * grid_.half_extent(j) + 1e-12;
        if (support_.lo[j] < -bound || support_.hi[j] > bound) return false;
    }
    return true;
}

double GridFunction::leakage() const {
    double inside = 0.0, outside = 0.0;
    for_each_point(grid_, full_range(grid_), [&](std::size_t flat, std::span<const double> x) {
        const double a = std::abs(samples_[flat]);
        if (support_.contains(x))
            inside = std::max(inside, a);
        else
            outside = std::max(outside, a);
    });
    const double top = std::max(inside, outside);
    return top > 0.0 ? outside / top : 0.0;
}

GridFunction GridFunction::operator+(const GridFunction& other) const {
    require_same_grid(grid_, other.grid_, "GridFunction::operator+");
    Box box = support_;
    for (std::size_t j = 0; j < box.lo.size(); ++j) {
        box.lo[j] = std::min(box.lo[j], other.support_.lo[j]);
        box.hi[j] = std::max(box.hi[j], other.support_.hi[j]);
    }
    std::vector<Complex> s = samples_;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += other.samples_[i];
    return GridFunction(grid_, std::move(s), std::move(box));
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
    return *this + other * Complex(-1.0);
}

GridFunction GridFunction::operator*(Complex c) const {
    std::vector<Complex> s = samples_;
    for (auto& v : s) v *= c;
    return GridFunction(grid_, std::move(s), support_);
}

void GridFunction::clamp_to_support() {
    const IndexRange inside = index_range(grid_, support_);
    std::vector<Complex> kept(samples_.size());
    for_each_point(grid_, inside,
                   [&](std::size_t flat, std::span<const double>) { kept[flat] = samples_[flat]; });
    samples_ = std::move(kept);
}

// --- weights -------------------------------------------------------------------

double QuadraticWeight::operator()(std::span<const double> x) const {
    double q = c;
    for (std::size_t j = 0; j < a.size(); ++j) q += a[j] * x[j] + 0.5 * b[j] * x[j] * x[j];
    return q;
}

QuadraticWeight QuadraticWeight::scaled(double s) const {
    QuadraticWeight r = *this;
    for (auto& v : r.a) v *= s;
    for (auto& v : r.b) v *= s;
    r.c *= s;
    return r;
}

WeightField::WeightField(Grid grid, std::vector<double> samples,
                         std::optional<QuadraticWeight> quadratic)
    : grid_(std::move(grid)), samples_(std::move(samples)), quadratic_(std::move(quadratic)) {
    if (samples_.size() != grid_.size())
        throw std::invalid_argument("WeightField: sample count does not match grid");
    if (quadratic_ && quadratic_->dimension() != grid_.dimension())
        throw std::invalid_argument("WeightField: descriptor dimension mismatch");
}

WeightField WeightField::from_quadratic(const Grid& grid, const QuadraticWeight& q) {
    if (q.a.size() != grid.dimension() || q.b.size() != grid.dimension())
        throw std::invalid_argument("WeightField::from_quadratic: dimension mismatch");
    for (double v : q.a)
        if (!std::isfinite(v)) throw std::invalid_argument("QuadraticWeight: non-finite entry");
    for (double v : q.b)
        if (!std::isfinite(v)) throw std::invalid_argument("QuadraticWeight: non-finite entry");
    std::vector<double> s(grid.size());
    for_each_point(grid, full_range(grid),
                   [&](std::size_t flat, std::span<const double> x) { s[flat] = q(x); });
    return WeightField(grid, std::move(s), q);
}

WeightField WeightField::from_function(const Grid& grid,
                                       const std::function<double(std::span<const double>)>& f) {
    std::vector<double> s(grid.size());
    for_each_point(grid, full_range(grid),
                   [&](std::size_t flat, std::span<const double> x) { s[flat] = f(x); });
    return WeightField(grid, std::move(s));
}

WeightField WeightField::zero(const Grid& grid) {
    return from_quadratic(grid, QuadraticWeight::zero(grid.dimension()));
}

double WeightField::max_on(const Box& box) const {
    double m = -std::numeric_limits<double>::infinity();
    for_each_point(grid_, index_range(grid_, box),
                   [&](std::size_t flat, std::span<const double>) { m = std::max(m, samples_[flat]); });
    return m;
}

double WeightField::max_abs_on(const Box& box) const {
    double m = 0.0;
    for_each_point(grid_, index_range(grid_, box), [&](std::size_t flat, std::span<const double>) {
        m = std::max(m, std::abs(samples_[flat]));
    });
    return m;
}

WeightField WeightField::shifted(double shift) const {
    std::vector<double> s = samples_;
    for (auto& v : s) v -= shift;
    auto q = quadratic_;
    if (q) q->c -= shift;
    return WeightField(grid_, std::move(s), std::move(q));
}

// --- FFT -----------------------------------------------------------------------

void fft_forward(const Grid& grid, std::vector<Complex>& data) { execute(grid, data, FFTW_FORWARD); }

void fft_inverse(const Grid& grid, std::vector<Complex>& data) {
    execute(grid, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : data) v *= scale;
}

std::vector<double> frequencies(const Grid& grid, std::size_t j) {
    const std::size_t n = grid.count(j);
    const double base = std::numbers::pi / grid.half_extent(j);
    std::vector<double> xi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
        xi[i] = base * k;
    }
    return xi;
}

// --- operators -------------------------------------------------------------------

Spectrum::Spectrum(const GridFunction& f)
    : grid_(f.grid()), support_(f.support()), data_(f.samples().begin(), f.samples().end()) {
    check_padding(f, "Spectrum");
    fft_forward(grid_, data_);
}

GridFunction Spectrum::apply(const Polynomial& p) const {
    if (p.dimension() != grid_.dimension())
        throw std::invalid_argument("apply_symbol: polynomial dimension does not match grid");
    std::vector<Complex> work = data_;
    multiply_by_symbol(grid_, p, work);
    fft_inverse(grid_, work);
    return GridFunction(grid_, std::move(work), support_);
}

GridFunction Spectrum::derivative(const MultiIndex& beta) const {
    if (beta.dimension() != grid_.dimension())
        throw std::invalid_argument("spectral_derivative: multi-index dimension mismatch");
    return apply(Polynomial::monomial(beta));
}

GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta) {
    if (beta.dimension() != f.grid().dimension())
        throw std::invalid_argument("spectral_derivative: multi-index dimension mismatch");
    check_padding(f, "spectral_derivative");
    if (beta.order() == 0) return f;
    return Spectrum(f).derivative(beta);
}

std::vector<GridFunction> spectral_derivatives(const GridFunction& f,
                                               std::span<const MultiIndex> betas) {
    const Spectrum spectrum(f);
    std::vector<GridFunction> out;
    out.reserve(betas.size());
    for (const auto& beta : betas) {
        if (beta.dimension() != f.grid().dimension())
            throw std::invalid_argument("spectral_derivatives: multi-index dimension mismatch");
        out.push_back(beta.order() == 0 ? f : spectrum.derivative(beta));
    }
    return out;
}

GridFunction apply_symbol(const Polynomial& p, const GridFunction& f) {
    if (p.dimension() != f.grid().dimension())
        throw std::invalid_argument("apply_symbol: polynomial dimension does not match grid");
    return Spectrum(f).apply(p);
}

GridFunction apply_conjugated(const Polynomial& p, const WeightField& w, Sign sign,
                              const GridFunction& v) {
    require_same_grid(w.grid(), v.grid(), "apply_conjugated");
    const double guard = 0.5 * w.max_abs_on(v.support());
    if (!std::isfinite(guard) || guard > kOverflowGuard) {
        std::ostringstream os;
        os << "apply_conjugated: max |W|/2 on the support is " << guard << " > " << kOverflowGuard
           << "; renormalize the weight by subtracting its maximum on the support";
        throw OverflowGuardError(os.str());
    }
    // sign=+ : e^{W/2} P(D) e^{-W/2} v;  sign=- : e^{-W/2} P(D) e^{W/2} v
    const double s = sign_value(sign);
    const auto weights = w.samples();
    const IndexRange inside = index_range(v.grid(), v.support());
    std::vector<Complex> inner(v.size());
    for_each_point(v.grid(), inside, [&](std::size_t flat, std::span<const double>) {
        inner[flat] = v[flat] * std::exp(-0.5 * s * weights[flat]);
    });
    // Outside the support box samples are zero by the GridFunction invariant;
    // only in-box values are carried through the exponentials.
    const GridFunction mid = apply_symbol(p, GridFunction(v.grid(), std::move(inner), v.support()));
    std::vector<Complex> out(v.size());
    for_each_point(v.grid(), inside, [&](std::size_t flat, std::span<const double>) {
        out[flat] = mid[flat] * std::exp(0.5 * s * weights[flat]);
    });
    return GridFunction(v.grid(), std::move(out), v.support());
}

double weighted_l2(const GridFunction& f, const WeightField* w) {
    if (w) require_same_grid(w->grid(), f.grid(), "weighted_l2");
    double sum = 0.0;
    bool finite = true;
    for_each_point(f.grid(), index_range(f.grid(), f.support()),
                   [&](std::size_t flat, std::span<const double>) {
                       const Complex v = f[flat];
                       if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) finite = false;
                       const double a2 = std::norm(v);
                       if (a2 == 0.0) return;
                       if (w) {
                           const double wv = w->samples()[flat];
                           if (!std::isfinite(wv)) finite = false;
                           sum += std::exp(wv) * a2;
                       } else {
                           sum += a2;
                       }
                   });
    if (!finite || !std::isfinite(sum))
        throw std::domain_error("weighted_l2: non-finite samples or weighted sum");
    return sum * f.grid().cell_volume();
}

GridFunction apply_ode_operator(const poly::Ode1Operator& op, const GridFunction& f) {
    if (f.grid().dimension() != 1)
        throw std::invalid_argument("apply_ode_operator: grid must be one-dimensional");
    std::vector<MultiIndex> betas;
    std::vector<int> orders;
    for (const auto& [k, c] : op.coefficients()) {
        betas.push_back(MultiIndex{k});
        orders.push_back(k);
    }
    const auto derivs = spectral_derivatives(f, betas);
    std::vector<Complex> out(f.size());
    const IndexRange inside = index_range(f.grid(), f.support());
    std::size_t term = 0;
    for (const auto& [k, c] : op.coefficients()) {
        const auto& dk = derivs[term++];
        for_each_point(f.grid(), inside, [&](std::size_t flat, std::span<const double> x) {
            out[flat] += poly::evaluate(c, x) * dk[flat];
        });
    }
    return GridFunction(f.grid(), std::move(out), f.support());
}

GridFunction spectral_refine(const GridFunction& f, std::size_t factor) {
    if (factor == 1) return f;
    const Grid& coarse = f.grid();
    const Grid fine = coarse.refined(factor);
    std::vector<Complex> spec(f.samples().begin(), f.samples().end());
    fft_forward(coarse, spec);
    const std::size_t d = coarse.dimension();
    std::vector<Complex> fine_spec(fine.size());
    // Map every coarse mode k (signed) to the fine lattice; the Nyquist mode is
    // split evenly between +N/2 and -N/2.
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        std::vector<std::vector<std::pair<std::size_t, double>>> targets(d);
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t n = coarse.count(j), nf = fine.count(j);
            const std::size_t i = idx[j];
            if (i < n / 2) {
                targets[j].emplace_back(i, 1.0);
            } else if (i > n / 2) {
                targets[j].emplace_back(nf - (n - i), 1.0);
            } else {
                targets[j].emplace_back(n / 2, 0.5);
                targets[j].emplace_back(nf - n / 2, 0.5);
            }
        }
        // Cartesian product over axes.
        std::vector<std::size_t> pick(d, 0);
        while (true) {
            std::size_t target = 0;
            double weight = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                target += targets[j][pick[j]].first * fine.stride(j);
                weight *= targets[j][pick[j]].second;
            }
            fine_spec[target] += weight * spec[flat];
            std::size_t j = d;
            bool done = true;
            while (j-- > 0) {
                if (++pick[j] < targets[j].size()) {
                    done = false;
                    break;
                }
                pick[j] = 0;
            }
            if (done) break;
        }
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < coarse.count(j)) break;
            idx[j] = 0;
        }
    }
    fft_inverse(fine, fine_spec);
    const double scale = static_cast<double>(fine.size()) / static_cast<double>(coarse.size());
    for (auto& v : fine_spec) v *= scale;
    return GridFunction(fine, std::move(fine_spec), f.support());
}

Box padded_box(const Grid& grid) {
    std::vector<double> h;
    for (std::size_t j = 0; j < grid.dimension(); ++j)
        h.push_back((1.0 - kPaddingFraction) * grid.half_extent(j));
    return Box::centered(std::move(h));
}

GridFunction gaussian(const Grid& grid, std::span<const double> center, double sigma,
                      std::span<const double> wavevector, Complex amplitude) {
    const std::size_t d = grid.dimension();
    if (center.size() != d || (!wavevector.empty() && wavevector.size() != d))
        throw std::invalid_argument("gaussian: dimension mismatch");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
    std::vector<double> c(center.begin(), center.end());
    std::vector<double> k(wavevector.begin(), wavevector.end());
    return GridFunction::sample(grid, padded_box(grid), [&](std::span<const double> x) {
        double r2 = 0.0, phase = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            r2 += (x[j] - c[j]) * (x[j] - c[j]);
            if (!k.empty()) phase += k[j] * x[j];
        }
        return amplitude * std::exp(-r2 / (2.0 * sigma * sigma)) * std::polar(1.0, phase);
    });
}

// --- I/O -------------------------------------------------------------------------

void write_binary(std::ostream& os, const GridFunction& f) {
    os.write("CLGF", 4);
    put<std::uint32_t>(os, 1);
    const auto d = static_cast<std::uint32_t>(f.grid().dimension());
    put<std::uint32_t>(os, d);
    for (std::size_t j = 0; j < d; ++j) put<double>(os, f.grid().half_extent(j));
    for (std::size_t j = 0; j < d; ++j) put<std::uint64_t>(os, f.grid().count(j));
    for (std::size_t j = 0; j < d; ++j) {
        put<double>(os, f.support().lo[j]);
        put<double>(os, f.support().hi[j]);
    }
    for (const Complex& v : f.samples()) {
        put<double>(os, v.real());
        put<double>(os, v.imag());
    }
}

GridFunction read_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CLGF", 4) != 0)
        throw std::runtime_error("read_binary: bad magic");
    if (get<std::uint32_t>(is) != 1) throw std::runtime_error("read_binary: unsupported version");
    const auto d = get<std::uint32_t>(is);
    std::vector<double> ext(d);
    std::vector<std::size_t> counts(d);
    Box box{std::vector<double>(d), std::vector<double>(d)};
    for (auto& e : ext) e = get<double>(is);
    for (auto& c : counts) c = get<std::uint64_t>(is);
    for (std::size_t j = 0; j < d; ++j) {
        box.lo[j] = get<double>(is);
        box.hi[j] = get<double>(is);
    }
    Grid grid(std::move(ext), std::move(counts));
    std::vector<Complex> s(grid.size());
    for (auto& v : s) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        v = {re, im};
    }
    return GridFunction(std::move(grid), std::move(s), std::move(box));
}

namespace {

// Shortest round-trip representation, independent of the global locale.
void write_number(std::ostream& os, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, res.ptr - buf);
}

}  // namespace

void write_csv_1d(std::ostream& os, const GridFunction& f) {
    if (f.grid().dimension() != 1) throw std::invalid_argument("write_csv_1d: grid is not 1D");
    os << "x,re,im\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        write_number(os, f.grid().coordinate(0, i));
        os << ',';
        write_number(os, f[i].real());
        os << ',';
        write_number(os, f[i].imag());
        os << '\n';
    }
}

void write_csv_2d(std::ostream& os, const GridFunction& f, std::size_t axis0, std::size_t axis1,
                  std::vector<std::size_t> fixed) {
    const Grid& g = f.grid();
    const std::size_t d = g.dimension();
    if (d < 2 || axis0 >= d || axis1 >= d || axis0 == axis1)
        throw std::invalid_argument("write_csv_2d: invalid axes");
    if (fixed.empty()) fixed.assign(d, 0);
    if (fixed.size() != d) throw std::invalid_argument("write_csv_2d: fixed index list has wrong length");
    os << "x" << axis0 << ",x" << axis1 << ",re,im\n";
    for (std::size_t i = 0; i < g.count(axis0); ++i)
        for (std::size_t k = 0; k < g.count(axis1); ++k) {
            auto idx = fixed;
            idx[axis0] = i;
            idx[axis1] = k;
            std::size_t flat = 0;
            for (std::size_t j = 0; j < d; ++j) flat += idx[j] * g.stride(j);
            write_number(os, g.coordinate(axis0, i));
            os << ',';
            write_number(os, g.coordinate(axis1, k));
            os << ',';
            write_number(os, f[flat].real());
            os << ',';
            write_number(os, f[flat].imag());
            os << '\n';
        }
}

}  // namespace carlab::grid
