#include "hfsim/propagator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hfsim {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double resolve_tol = 1e-10;

void require_time(const SpectralGrid& g, double t) {
    if (t == 0.0) throw std::invalid_argument("M_t and D_t are undefined at t = 0");
    const double thr = small_time_threshold(g);
    if (std::abs(t) < thr) {
        std::ostringstream os;
        os << "|t|=" << std::abs(t) << " is below the chirp resolution threshold " << thr;
        throw std::domain_error(os.str());
    }
}

Field chirp(const SpectralGrid& g, double t, double sign, std::span<const cplx> f) {
    g.require_shape(f);
    Field out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[n] * std::polar(1.0, sign * g.x_norm2(n) / (4.0 * t));
    return out;
}

cplx dilation_prefactor(int d, double t, double power) {
    return std::pow(cplx(0.0, 4.0 * pi * t), power * d);
}

// w(s x) on the grid, guarded against support or bandwidth leaving the box.
Field guarded_dilation(const SpectralGrid& g, std::span<const cplx> w, double s) {
    const double as = std::abs(s);
    if (as < 1.0) {
        const double R = support_radius(g, w, resolve_tol);
        if (R / as > 0.5 * g.length() * std::sqrt(static_cast<double>(g.dim()))) {
            std::ostringstream os;
            os << "dilation by " << 1.0 / as << " pushes the support radius " << R << " outside the box";
            throw std::domain_error(os.str());
        }
    } else if (as > 1.0) {
        Field W = forward_ft(g, w);
        const double Xi = spectral_support_radius(g, W, resolve_tol);
        if (Xi * as > g.nyquist() * std::sqrt(static_cast<double>(g.dim()))) {
            std::ostringstream os;
            os << "compression by " << as << " pushes bandwidth " << Xi << " past the Nyquist frequency";
            throw std::domain_error(os.str());
        }
    }
    return dilate_bandlimited(g, w, s);
}

void require_resolved(const SpectralGrid& g, std::span<const cplx> f, const char* what) {
    auto r = decay_check(g, f);
    if (!r.ok(1e-9)) {
        std::ostringstream os;
        os << what << " is not resolved on the grid (edge ratio " << r.edge_ratio << ", spectral edge ratio "
           << r.spectral_ratio << ")";
        throw std::domain_error(os.str());
    }
}

// The rescaled lattice x_j / (4 pi t) reaches |xi| = L / (8 pi |t|); its alias
// images are shifted by 1/dx and must miss the chirped spectrum.
void require_alias_free(const SpectralGrid& g, double t, std::span<const cplx> chirped, const char* what) {
    const double reach = g.length() / (8.0 * pi * std::abs(t));
    const double band = spectral_support_radius(g, forward_ft(g, chirped), 1e-12);
    if (reach + band > 1.0 / g.dx()) {
        std::ostringstream os;
        os << what << ": rescaled lattice reach " << reach << " plus spectral radius " << band
           << " exceeds the alias period " << 1.0 / g.dx() << "; increase |t| or refine the grid";
        throw std::domain_error(os.str());
    }
}

}  // namespace

void PropagatorSpec::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
}

double PropagatorSpec::phase_constant() const { return -std::pow(2.0 * pi, alpha); }

RealField laplacian_symbol(const SpectralGrid& g, double alpha) {
    PropagatorSpec{alpha}.validate();
    RealField m(g.size());
    const double c = std::pow(2.0 * pi, alpha);
    for (std::size_t n = 0; n < g.size(); ++n) m[n] = c * std::pow(g.xi_norm2(n), 0.5 * alpha);
    return m;
}

Field fractional_laplacian(const SpectralGrid& g, double alpha, std::span<const cplx> f) {
    return apply_multiplier(g, laplacian_symbol(g, alpha), f);
}

Field free_propagate(const SpectralGrid& g, double alpha, double t, std::span<const cplx> f) {
    RealField sym = laplacian_symbol(g, alpha);
    Field F = forward_ft(g, f);
    for (std::size_t n = 0; n < F.size(); ++n) F[n] *= std::polar(1.0, -sym[n] * t);
    return inverse_ft(g, F);
}

double small_time_threshold(const SpectralGrid& g) { return 10.0 * g.dx() * g.dx() / g.length(); }

Field unitary_factor(const SpectralGrid& g, Factor kind, double t, std::span<const cplx> f) {
    g.require_shape(f);
    switch (kind) {
        case Factor::R: {
            Field out(f.size());
            for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[g.reflect_index(n)];
            return out;
        }
        case Factor::M:
            require_time(g, t);
            return chirp(g, t, 1.0, f);
        case Factor::M_inv:
            require_time(g, t);
            return chirp(g, t, -1.0, f);
        case Factor::D: {
            require_time(g, t);
            Field out = guarded_dilation(g, f, 1.0 / (4.0 * pi * t));
            const cplx c = dilation_prefactor(g.dim(), t, -0.5);
            for (auto& v : out) v *= c;
            return out;
        }
        case Factor::D_inv: {
            require_time(g, t);
            Field out = guarded_dilation(g, f, 4.0 * pi * t);
            const cplx c = dilation_prefactor(g.dim(), t, 0.5);
            for (auto& v : out) v *= c;
            return out;
        }
    }
    throw std::invalid_argument("unknown factor");
}

double matched_box_length(double t, int M) { return std::sqrt(4.0 * pi * std::abs(t) * M); }

Field factorized_forward(const SpectralGrid& g, double t, std::span<const cplx> f) {
    require_time(g, t);
    Field w = chirp(g, t, 1.0, f);
    Field out = scaled_transform(g, w, 1.0 / (4.0 * pi * t));
    const cplx c = dilation_prefactor(g.dim(), t, -0.5);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= c * std::polar(1.0, g.x_norm2(n) / (4.0 * t));
    return out;
}

Field factorized_inverse(const SpectralGrid& g, double t, std::span<const cplx> f) {
    require_time(g, t);
    Field w = chirp(g, t, -1.0, f);
    Field out = scaled_transform(g, w, -1.0 / (4.0 * pi * t));
    const cplx c = dilation_prefactor(g.dim(), t, 0.5) * std::pow(4.0 * pi * std::abs(t), -g.dim());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= c * std::polar(1.0, -g.x_norm2(n) / (4.0 * t));
    return out;
}

double l2_norm(const SpectralGrid& g, std::span<const cplx> f) {
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return std::sqrt(s * g.cell_volume());
}

FactorizationResidual factorization_residual(const SpectralGrid& g, double t, std::span<const cplx> f) {
    require_time(g, t);
    require_resolved(g, f, "datum");
    const Field up = chirp(g, t, 1.0, f);
    const Field down = chirp(g, t, -1.0, f);
    require_resolved(g, up, "chirped datum");
    require_alias_free(g, t, up, "forward factorization");
    require_alias_free(g, t, down, "inverse factorization");
    const double nf = l2_norm(g, f);
    if (nf == 0.0) throw std::invalid_argument("factorization residual of the zero field");
    FactorizationResidual r;
    r.threshold = small_time_threshold(g);
    {
        Field a = free_propagate(g, 2.0, t, f);
        require_resolved(g, a, "evolved datum");
        Field b = factorized_forward(g, t, f);
        for (std::size_t n = 0; n < a.size(); ++n) a[n] -= b[n];
        r.forward = l2_norm(g, a) / nf;
    }
    {
        Field a = free_propagate(g, 2.0, -t, f);
        require_resolved(g, a, "backward evolved datum");
        Field b = factorized_inverse(g, t, f);
        for (std::size_t n = 0; n < a.size(); ++n) a[n] -= b[n];
        r.inverse = l2_norm(g, a) / nf;
    }
    return r;
}

double commutation_residual(const SpectralGrid& g, double alpha, double t, std::span<const cplx> f) {
    Field a = fractional_laplacian(g, alpha, free_propagate(g, alpha, t, f));
    Field b = free_propagate(g, alpha, t, fractional_laplacian(g, alpha, f));
    for (std::size_t n = 0; n < a.size(); ++n) a[n] -= b[n];
    return l2_norm(g, a);
}

}  // namespace hfsim
