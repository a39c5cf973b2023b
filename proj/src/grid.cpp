#include "hfsim/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace hfsim {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

class FftPlans {
public:
    FftPlans(int d, int M) {
        std::array<int, 3> n{M, M, M};
        std::size_t total = 1;
        for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(M);
        std::vector<cplx> scratch(total);
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fwd_ = fftw_plan_dft(d, n.data(), p, p, FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft(d, n.data(), p, p, FFTW_BACKWARD, flags);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw planning failed");
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    void forward(cplx* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(fwd_, p, p);
    }
    void backward(cplx* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(bwd_, p, p);
    }

private:
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

SpectralGrid::SpectralGrid(int d, double L, int M) : d_(d), L_(L), M_(M) {
    if (d < 1 || d > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("box length must be positive");
    if (M < 8) throw std::invalid_argument("points per axis must be at least 8");
    if (M % 2 != 0) throw std::invalid_argument("points per axis must be even");
    if ((M & (M - 1)) != 0) throw std::invalid_argument("points per axis must be a power of two");
    size_ = 1;
    for (int a = 0; a < d; ++a) size_ *= static_cast<std::size_t>(M);
    plans_ = std::make_shared<const FftPlans>(d, M);
}

SpectralGrid make_grid(int d, double L, int M) { return SpectralGrid(d, L, M); }

double SpectralGrid::cell_volume() const { return std::pow(dx(), d_); }
double SpectralGrid::dual_cell_volume() const { return std::pow(dxi(), d_); }

std::array<int, 3> SpectralGrid::unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % M_);
        flat /= M_;
    }
    return idx;
}

std::size_t SpectralGrid::ravel(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < d_; ++a) flat = flat * M_ + static_cast<std::size_t>(idx[a]);
    return flat;
}

double SpectralGrid::x_norm2(std::size_t flat) const {
    auto idx = unravel(flat);
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += coord(idx[a]) * coord(idx[a]);
    return r2;
}

double SpectralGrid::xi_norm2(std::size_t flat) const {
    auto idx = unravel(flat);
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += freq(idx[a]) * freq(idx[a]);
    return r2;
}

RealField SpectralGrid::radii() const {
    RealField r(size_);
    for (std::size_t n = 0; n < size_; ++n) r[n] = std::sqrt(x_norm2(n));
    return r;
}

RealField SpectralGrid::freq_radii() const {
    RealField r(size_);
    for (std::size_t n = 0; n < size_; ++n) r[n] = std::sqrt(xi_norm2(n));
    return r;
}

std::size_t SpectralGrid::reflect_index(std::size_t flat) const {
    auto idx = unravel(flat);
    for (int a = 0; a < d_; ++a) idx[a] = (M_ - idx[a]) % M_;
    return ravel(idx);
}

std::size_t SpectralGrid::reflect_freq_index(std::size_t flat) const {
    auto idx = unravel(flat);
    for (int a = 0; a < d_; ++a) idx[a] = (M_ - idx[a]) % M_;
    return ravel(idx);
}

bool SpectralGrid::same_shape(const SpectralGrid& o) const {
    return d_ == o.d_ && M_ == o.M_ && L_ == o.L_;
}

void SpectralGrid::require_shape(std::span<const cplx> f) const {
    if (f.size() != size_) {
        throw std::invalid_argument("field has " + std::to_string(f.size()) + " samples, grid expects " +
                                    std::to_string(size_));
    }
}

void FieldState::validate() const {
    if (!grid) throw std::invalid_argument("field state has no grid");
    for (const auto& f : psi) {
        grid->require_shape(f);
        for (const auto& v : f) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::domain_error("field state holds a non-finite sample");
        }
    }
}

namespace {

// (-1)^{sum of signed indices}: phase for the box starting at -L/2.
void apply_centering_phase(const SpectralGrid& g, std::vector<cplx>& F) {
    const int d = g.dim();
    for (std::size_t n = 0; n < F.size(); ++n) {
        auto idx = g.unravel(n);
        int s = 0;
        for (int a = 0; a < d; ++a) s += g.signed_index(idx[a]);
        if (s & 1) F[n] = -F[n];
    }
}

// Applies a dense M x M matrix along every axis: out[j] = sum_n A[j][n] in[n].
Field apply_axis_matrix(const SpectralGrid& g, std::span<const cplx> f, const std::vector<cplx>& A) {
    const int d = g.dim();
    const int M = g.points_per_axis();
    Field cur(f.begin(), f.end());
    Field next(cur.size());
    std::vector<cplx> line(M), res(M);
    for (int axis = 0; axis < d; ++axis) {
        std::size_t stride = 1;
        for (int a = d - 1; a > axis; --a) stride *= static_cast<std::size_t>(M);
        const std::size_t block = stride * static_cast<std::size_t>(M);
        for (std::size_t base = 0; base < cur.size(); base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (int n = 0; n < M; ++n) line[n] = cur[base + off + n * stride];
                for (int j = 0; j < M; ++j) {
                    cplx acc = 0.0;
                    const cplx* row = &A[static_cast<std::size_t>(j) * M];
                    for (int n = 0; n < M; ++n) acc += row[n] * line[n];
                    res[j] = acc;
                }
                for (int j = 0; j < M; ++j) next[base + off + j * stride] = res[j];
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

}  // namespace

Field forward_ft(const SpectralGrid& g, std::span<const cplx> f) {
    g.require_shape(f);
    Field F(f.begin(), f.end());
    g.plans().forward(F.data());
    const double w = g.cell_volume();
    for (auto& v : F) v *= w;
    apply_centering_phase(g, F);
    return F;
}

Field inverse_ft(const SpectralGrid& g, std::span<const cplx> F) {
    g.require_shape(F);
    Field f(F.begin(), F.end());
    apply_centering_phase(g, f);
    g.plans().backward(f.data());
    const double w = g.dual_cell_volume();
    for (auto& v : f) v *= w;
    return f;
}

Field apply_multiplier(const SpectralGrid& g, std::span<const double> m, std::span<const cplx> f) {
    if (m.size() != g.size()) throw std::invalid_argument("multiplier shape mismatch");
    Field F = forward_ft(g, f);
    for (std::size_t n = 0; n < F.size(); ++n) F[n] *= m[n];
    return inverse_ft(g, F);
}

Field apply_multiplier(const SpectralGrid& g, std::span<const cplx> m, std::span<const cplx> f) {
    if (m.size() != g.size()) throw std::invalid_argument("multiplier shape mismatch");
    Field F = forward_ft(g, f);
    for (std::size_t n = 0; n < F.size(); ++n) F[n] *= m[n];
    return inverse_ft(g, F);
}

Field convolve(const SpectralGrid& g, std::span<const cplx> f, std::span<const cplx> h) {
    Field F = forward_ft(g, f);
    Field H = forward_ft(g, h);
    for (std::size_t n = 0; n < F.size(); ++n) F[n] *= H[n];
    return inverse_ft(g, F);
}

Field scaled_transform(const SpectralGrid& g, std::span<const cplx> f, double sigma) {
    g.require_shape(f);
    const int M = g.points_per_axis();
    std::vector<cplx> A(static_cast<std::size_t>(M) * M);
    const double dx = g.dx();
    for (int j = 0; j < M; ++j) {
        for (int n = 0; n < M; ++n) {
            const double phase = -2.0 * std::numbers::pi * sigma * g.coord(j) * g.coord(n);
            A[static_cast<std::size_t>(j) * M + n] = std::polar(dx, phase);
        }
    }
    return apply_axis_matrix(g, f, A);
}

Field dilate_bandlimited(const SpectralGrid& g, std::span<const cplx> f, double s) {
    Field F = forward_ft(g, f);
    const int M = g.points_per_axis();
    const double half = 0.5 * g.length();
    std::vector<cplx> A(static_cast<std::size_t>(M) * M);
    for (int j = 0; j < M; ++j) {
        const double y = s * g.coord(j);
        if (std::abs(y) > half) continue;
        for (int k = 0; k < M; ++k) {
            const double phase = 2.0 * std::numbers::pi * g.freq(k) * y;
            A[static_cast<std::size_t>(j) * M + k] = std::polar(g.dxi(), phase);
        }
    }
    return apply_axis_matrix(g, F, A);
}

DecayReport decay_check(const SpectralGrid& g, std::span<const cplx> f) {
    g.require_shape(f);
    const int d = g.dim();
    const int M = g.points_per_axis();
    double fmax = 0.0, edge = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const double v = std::abs(f[n]);
        fmax = std::max(fmax, v);
        auto idx = g.unravel(n);
        for (int a = 0; a < d; ++a) {
            if (idx[a] == 0 || idx[a] == M - 1) {
                edge = std::max(edge, v);
                break;
            }
        }
    }
    Field F = forward_ft(g, f);
    double Fmax = 0.0, Fedge = 0.0;
    for (std::size_t n = 0; n < F.size(); ++n) {
        const double v = std::abs(F[n]);
        Fmax = std::max(Fmax, v);
        auto idx = g.unravel(n);
        for (int a = 0; a < d; ++a) {
            const int s = g.signed_index(idx[a]);
            if (s == -M / 2 || s == M / 2 - 1) {
                Fedge = std::max(Fedge, v);
                break;
            }
        }
    }
    DecayReport r;
    r.edge_ratio = fmax > 0.0 ? edge / fmax : 0.0;
    r.spectral_ratio = Fmax > 0.0 ? Fedge / Fmax : 0.0;
    return r;
}

double support_radius(const SpectralGrid& g, std::span<const cplx> f, double tol) {
    double fmax = 0.0;
    for (const auto& v : f) fmax = std::max(fmax, std::abs(v));
    if (fmax == 0.0) return 0.0;
    double r2 = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        if (std::abs(f[n]) >= tol * fmax) r2 = std::max(r2, g.x_norm2(n));
    }
    return std::sqrt(r2);
}

double spectral_support_radius(const SpectralGrid& g, std::span<const cplx> F, double tol) {
    double fmax = 0.0;
    for (const auto& v : F) fmax = std::max(fmax, std::abs(v));
    if (fmax == 0.0) return 0.0;
    double r2 = 0.0;
    for (std::size_t n = 0; n < F.size(); ++n) {
        if (std::abs(F[n]) >= tol * fmax) r2 = std::max(r2, g.xi_norm2(n));
    }
    return std::sqrt(r2);
}

}  // namespace hfsim
