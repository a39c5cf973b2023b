#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace hfsim {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;
using RealField = std::vector<double>;

class FftPlans;

// Periodic box [-L/2, L/2)^d with M points per axis. Physical samples are
// stored row-major with x_j = -L/2 + j*dx. Spectral samples use FFT order:
// storage index k holds frequency signed_index(k)/L.
class SpectralGrid {
public:
    SpectralGrid(int d, double L, int M);

    int dim() const { return d_; }
    double length() const { return L_; }
    int points_per_axis() const { return M_; }
    double dx() const { return L_ / M_; }
    double dxi() const { return 1.0 / L_; }
    std::size_t size() const { return size_; }
    double cell_volume() const;
    double dual_cell_volume() const;

    int signed_index(int k) const { return k < M_ / 2 ? k : k - M_; }
    int storage_index(int s) const { return s >= 0 ? s : s + M_; }
    double coord(int j) const { return -0.5 * L_ + j * dx(); }
    double freq(int k) const { return signed_index(k) / L_; }
    double nyquist() const { return 0.5 * M_ / L_; }

    std::array<int, 3> unravel(std::size_t flat) const;
    std::size_t ravel(const std::array<int, 3>& idx) const;

    // |x|^2 at physical sample `flat`; |xi|^2 at spectral sample `flat`.
    double x_norm2(std::size_t flat) const;
    double xi_norm2(std::size_t flat) const;
    RealField radii() const;
    RealField freq_radii() const;

    // Physical index of -x (periodic wrap for the -L/2 face).
    std::size_t reflect_index(std::size_t flat) const;
    // Spectral storage index of -xi.
    std::size_t reflect_freq_index(std::size_t flat) const;

    bool same_shape(const SpectralGrid& other) const;
    void require_shape(std::span<const cplx> f) const;

    const FftPlans& plans() const { return *plans_; }

private:
    int d_;
    double L_;
    int M_;
    std::size_t size_;
    std::shared_ptr<const FftPlans> plans_;
};

SpectralGrid make_grid(int d, double L, int M);

struct FieldState {
    std::shared_ptr<const SpectralGrid> grid;
    std::vector<Field> psi;
    double t = 0.0;

    std::size_t particles() const { return psi.size(); }
    void validate() const;
};

// Continuum-normalized transform matching F f(xi) = int e^{-2 pi i x.xi} f(x) dx.
Field forward_ft(const SpectralGrid& g, std::span<const cplx> f);
Field inverse_ft(const SpectralGrid& g, std::span<const cplx> F);

// Spectral multiplier m(xi): inverse_ft(m * forward_ft(f)).
Field apply_multiplier(const SpectralGrid& g, std::span<const double> m, std::span<const cplx> f);
Field apply_multiplier(const SpectralGrid& g, std::span<const cplx> m, std::span<const cplx> f);

// (f * h)(x) as a periodic Riemann-sum convolution.
Field convolve(const SpectralGrid& g, std::span<const cplx> f, std::span<const cplx> h);

// Evaluates sum_n f(x_n) exp(-2 pi i sigma x_j . x_n) dx^d at every physical
// node x_j, i.e. the continuum transform of f sampled on the rescaled lattice
// xi = sigma * x_j. Used for dilations that leave the dual lattice.
Field scaled_transform(const SpectralGrid& g, std::span<const cplx> f, double sigma);

// Band-limited interpolant of f evaluated at x_j * s. Points outside the box
// evaluate to zero (f is treated as compactly supported in the box).
Field dilate_bandlimited(const SpectralGrid& g, std::span<const cplx> f, double s);

struct DecayReport {
    double edge_ratio = 0.0;      // max |f| on the outer face / max |f|
    double spectral_ratio = 0.0;  // max |F f| on the Nyquist face / max |F f|
    bool ok(double tol) const { return edge_ratio <= tol && spectral_ratio <= tol; }
};
DecayReport decay_check(const SpectralGrid& g, std::span<const cplx> f);

// Radius beyond which |f| < tol * max|f| (0 for the zero field).
double support_radius(const SpectralGrid& g, std::span<const cplx> f, double tol);
double spectral_support_radius(const SpectralGrid& g, std::span<const cplx> F, double tol);

template <class Fn>
Field sample(const SpectralGrid& g, Fn&& fn) {
    Field out(g.size());
    const int d = g.dim();
    for (std::size_t n = 0; n < g.size(); ++n) {
        auto idx = g.unravel(n);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) x[a] = g.coord(idx[a]);
        out[n] = fn(x);
    }
    return out;
}

}  // namespace hfsim
