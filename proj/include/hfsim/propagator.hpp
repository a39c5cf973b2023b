#pragma once

#include <span>

#include "hfsim/grid.hpp"

namespace hfsim {

struct PropagatorSpec {
    double alpha = 2.0;

    void validate() const;
    // c_alpha = -(2 pi)^alpha.
    double phase_constant() const;
};

// (2 pi)^alpha |xi|^alpha on the dual lattice.
RealField laplacian_symbol(const SpectralGrid& g, double alpha);

Field fractional_laplacian(const SpectralGrid& g, double alpha, std::span<const cplx> f);

// U_alpha(t) f: multiplier exp(-i (2 pi)^alpha |xi|^alpha t).
Field free_propagate(const SpectralGrid& g, double alpha, double t, std::span<const cplx> f);

enum class Factor { M, M_inv, D, D_inv, R };

// Smallest |t| accepted by M_t and D_t: 10 dx^2 / L.
double small_time_threshold(const SpectralGrid& g);

// Applies the named unitary factor. D_t and its inverse resample through the
// band-limited interpolant and reject dilations that leave the resolvable box.
Field unitary_factor(const SpectralGrid& g, Factor kind, double t, std::span<const cplx> f);

// Box side for which x_j / (4 pi t) lands exactly on the dual lattice.
double matched_box_length(double t, int M);

// M_t D_t F M_t f and M_t^{-1} F^{-1} D_t^{-1} M_t^{-1} f, evaluated with the
// continuum transform on the rescaled lattice.
Field factorized_forward(const SpectralGrid& g, double t, std::span<const cplx> f);
Field factorized_inverse(const SpectralGrid& g, double t, std::span<const cplx> f);

struct FactorizationResidual {
    double forward = 0.0;  // ||U(t)f - M_t D_t F M_t f|| / ||f||
    double inverse = 0.0;  // ||U(-t)f - M_t^{-1} F^{-1} D_t^{-1} M_t^{-1} f|| / ||f||
    double threshold = 0.0;
};

// alpha = 2 only. Throws domain_error when the datum, the chirped datum or
// U(+-t) f fails the decay check, or when the rescaled lattice aliases the
// chirped spectrum.
FactorizationResidual factorization_residual(const SpectralGrid& g, double t, std::span<const cplx> f);

double commutation_residual(const SpectralGrid& g, double alpha, double t, std::span<const cplx> f);

// Discrete L2 norm sqrt(sum |f|^2 dx^d).
double l2_norm(const SpectralGrid& g, std::span<const cplx> f);

}  // namespace hfsim
