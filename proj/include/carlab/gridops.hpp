#pragma once

// Uniform tensor grids, FFT-based differentiation and rectangle-rule
// quadrature for compactly supported complex functions.
//
// Layout: samples are row-major with the LAST axis fastest.  When a time axis
// exists it is axis 0.  All differential operators treat the grid as periodic;
// callers keep supports at least 25% away from the boundary so that the
// periodic extension of a compactly supported function is still smooth.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "carlab/polycalc.hpp"

namespace carlab::grid {

using Complex = std::complex<double>;
using poly::MultiIndex;
using poly::Polynomial;
using poly::Sign;

/// Support touching the periodic wrap region.
class PaddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// e^{W/2} would leave double range.  Fix by renormalizing the weight
/// (subtract a constant; Carleman ratios are invariant under that shift).
class OverflowGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPaddingFraction = 0.25;
inline constexpr double kOverflowGuard = 600.0;
inline constexpr std::size_t kMinPoints = 16;

class Grid {
public:
    Grid() = default;
    /// Axis j covers [-half_extent[j], half_extent[j]) with counts[j] points.
    Grid(std::vector<double> half_extent, std::vector<std::size_t> counts);

    std::size_t dimension() const { return half_extent_.size(); }
    double half_extent(std::size_t j) const { return half_extent_[j]; }
    std::size_t count(std::size_t j) const { return counts_[j]; }
    const std::vector<std::size_t>& counts() const { return counts_; }
    const std::vector<double>& half_extents() const { return half_extent_; }
    double spacing(std::size_t j) const { return 2.0 * half_extent_[j] / counts_[j]; }
    double coordinate(std::size_t j, std::size_t i) const { return -half_extent_[j] + i * spacing(j); }
    double cell_volume() const;
    std::size_t size() const;
    std::size_t stride(std::size_t j) const;

    /// Grid with every count multiplied by `factor` (same extents).
    Grid refined(std::size_t factor = 2) const;

    bool operator==(const Grid&) const = default;

private:
    std::vector<double> half_extent_;
    std::vector<std::size_t> counts_;
};

/// Closed axis-aligned box [lo_j, hi_j].
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box centered(std::vector<double> half_widths);
    bool contains(std::span<const double> x) const;
    bool operator==(const Box&) const = default;
};

/// Index ranges [first_j, last_j] of grid points inside a box.
struct IndexRange {
    std::vector<std::size_t> first;
    std::vector<std::size_t> last;
};
IndexRange index_range(const Grid& grid, const Box& box);

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, std::vector<Complex> samples, Box support);

    /// Samples f(x) at every grid point; `support` is the caller's claim about
    /// where f is nonzero.
    static GridFunction sample(const Grid& grid, const Box& support,
                               const std::function<Complex(std::span<const double>)>& f);
    static GridFunction zeros(const Grid& grid, const Box& support);

    const Grid& grid() const { return grid_; }
    const Box& support() const { return support_; }
    std::span<const Complex> samples() const { return samples_; }
    std::vector<Complex>& mutable_samples() { return samples_; }
    std::size_t size() const { return samples_.size(); }
    Complex operator[](std::size_t i) const { return samples_[i]; }

    /// The support box keeps a margin of at least 25% of the half extent on
    /// every side.
    bool has_padding() const;
    /// Largest |sample| outside the support box relative to the overall max.
    double leakage() const;

    GridFunction operator+(const GridFunction& other) const;
    GridFunction operator-(const GridFunction& other) const;
    GridFunction operator*(Complex c) const;

    /// Zero every sample outside the support box.
    void clamp_to_support();

private:
    Grid grid_;
    std::vector<Complex> samples_;
    Box support_;
};

/// Q(x) = c + sum_j a_j x_j + sum_j b_j x_j^2 / 2.
struct QuadraticWeight {
    std::vector<double> a;
    std::vector<double> b;
    double c = 0.0;

    static QuadraticWeight zero(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), 0.0}; }
    std::size_t dimension() const { return a.size(); }
    double operator()(std::span<const double> x) const;
    /// Component j of grad Q / 2.
    double half_gradient(std::size_t j, double xj) const { return 0.5 * (a[j] + b[j] * xj); }
    QuadraticWeight scaled(double s) const;
};

/// Sampled real weight W; the analytic form is kept when known.
class WeightField {
public:
    WeightField() = default;
    WeightField(Grid grid, std::vector<double> samples,
                std::optional<QuadraticWeight> quadratic = std::nullopt);

    static WeightField from_quadratic(const Grid& grid, const QuadraticWeight& q);
    static WeightField from_function(const Grid& grid,
                                     const std::function<double(std::span<const double>)>& f);
    static WeightField zero(const Grid& grid);

    const Grid& grid() const { return grid_; }
    std::span<const double> samples() const { return samples_; }
    const std::optional<QuadraticWeight>& quadratic() const { return quadratic_; }

    double max_on(const Box& box) const;
    double max_abs_on(const Box& box) const;
    /// W - shift; the quadratic descriptor follows.
    WeightField shifted(double shift) const;

private:
    Grid grid_;
    std::vector<double> samples_;
    std::optional<QuadraticWeight> quadratic_;
};

// --- FFT --------------------------------------------------------------------

/// Unnormalized forward DFT (e^{-i k x}) over all axes, in place.
void fft_forward(const Grid& grid, std::vector<Complex>& data);
/// Inverse DFT including the 1/N normalization, in place.
void fft_inverse(const Grid& grid, std::vector<Complex>& data);

/// Angular frequencies of axis j in FFT storage order.
std::vector<double> frequencies(const Grid& grid, std::size_t j);

// --- operators ---------------------------------------------------------------

/// Forward transform of a function, reusable for several symbols.
class Spectrum {
public:
    explicit Spectrum(const GridFunction& f);

    /// P(D) f.
    GridFunction apply(const Polynomial& p) const;
    GridFunction derivative(const MultiIndex& beta) const;

private:
    Grid grid_;
    Box support_;
    std::vector<Complex> data_;
};

/// D^beta f = (-i d)^beta f.
GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta);

/// Several derivatives from one forward transform.
std::vector<GridFunction> spectral_derivatives(const GridFunction& f,
                                               std::span<const MultiIndex> betas);

/// P(D) f: multiply the transform by P(xi).
GridFunction apply_symbol(const Polynomial& p, const GridFunction& f);

/// P(D +/- i grad W / 2) v = e^{+/- W/2} P(D) (e^{-/+ W/2} v).
GridFunction apply_conjugated(const Polynomial& p, const WeightField& w, Sign sign,
                              const GridFunction& v);

/// Sum over the support box of e^{W} |f|^2 times the cell volume.
double weighted_l2(const GridFunction& f, const WeightField* w = nullptr);
inline double weighted_l2(const GridFunction& f, const WeightField& w) { return weighted_l2(f, &w); }

/// Apply sum_k c_k(x) D^k along a 1D grid.
GridFunction apply_ode_operator(const poly::Ode1Operator& op, const GridFunction& f);

/// Band-limited interpolation onto a grid refined by `factor` (zero-padded spectrum).
GridFunction spectral_refine(const GridFunction& f, std::size_t factor = 2);

/// exp(-|x-c|^2 / (2 sigma^2)) e^{i k.x} with support box [-0.75 L, 0.75 L] on
/// every axis (the widest box that keeps the padding margin).
GridFunction gaussian(const Grid& grid, std::span<const double> center, double sigma,
                      std::span<const double> wavevector = {}, Complex amplitude = 1.0);

/// The widest padded box of a grid.
Box padded_box(const Grid& grid);

// --- I/O ---------------------------------------------------------------------

/// Binary container: "CLGF" magic, uint32 version, uint32 dims, dims x f64 half
/// extents, dims x u64 counts, dims x 2 f64 support box, then interleaved re/im
/// f64 samples.  Everything little-endian.
void write_binary(std::ostream& os, const GridFunction& f);
GridFunction read_binary(std::istream& is);

/// CSV of a 1D function (x,re,im) or a 2D slice (x0,x1,re,im).  For grids of
/// dimension > 2, `fixed` holds indices for every axis except the two kept
/// (`axis0`, `axis1`).
void write_csv_1d(std::ostream& os, const GridFunction& f);
void write_csv_2d(std::ostream& os, const GridFunction& f, std::size_t axis0 = 0,
                  std::size_t axis1 = 1, std::vector<std::size_t> fixed = {});

}  // namespace carlab::grid
