#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "hfsim/grid.hpp"
#include "hfsim/kernels.hpp"
#include "hfsim/norms.hpp"
#include "hfsim/report.hpp"

namespace hfsim {

struct TrilinearConfig {
    InteractionKernel kernel;
    double t = 0.0;
    ProfilePart part = ProfilePart::full;
};

// K * (f conj(g)) computed with the kernel multiplier.
Field hartree_potential(const SpectralGrid& g, const InteractionKernel& k, std::span<const cplx> f,
                        std::span<const cplx> gg);

// [K * (f conj(g))] h.
Field hartree_trilinear(const SpectralGrid& g, const InteractionKernel& k, std::span<const cplx> f,
                        std::span<const cplx> gg, std::span<const cplx> h);

// [(S_{a,t} * k_part)(f * conj(g))] * h with periodic Riemann-sum convolutions.
Field hat_trilinear(const SpectralGrid& g, const TrilinearConfig& cfg, std::span<const cplx> f,
                    std::span<const cplx> gg, std::span<const cplx> h);

// (M_t U(-t) u1) * (R conj(M_t U(-t) u2)), alpha = 2.
Field omega(const SpectralGrid& g, double t, std::span<const cplx> u1, std::span<const cplx> u2);

struct TwistedIdentityRatio {
    cplx ratio;
    double residual = 0.0;  // ||LHS - ratio RHS|| / ||LHS||
};

// Projection of U(-t) H(u1,u2,u3) onto |t|^{-gamma} M_t^{-1} H-hat(M_t v1, R M_t v2, M_t v3)
// with v_j = U(-t) u_j. Exact at the discrete level on grids with L^2 = 4 pi |t| M.
TwistedIdentityRatio twisted_identity_ratio(const SpectralGrid& g, const InteractionKernel& k, double t, std::span<const cplx> u1,
                         std::span<const cplx> u2, std::span<const cplx> u3);

// Grid whose spacing maps x / (4 pi t) onto the dual lattice.
SpectralGrid matched_grid(int d, double t, int M);

// Sum of three Gaussian wave packets with seeded centres, widths, carriers and
// amplitudes; both the samples and the spectrum decay like Gaussians.
struct PacketSampler {
    double centre_spread = 0.125;   // fraction of L
    double min_width = 0.5;
    double max_width = 2.0;
    double carrier_spread = 0.125;  // fraction of the Nyquist frequency
    int packets = 3;
};
Field random_bandlimited(const SpectralGrid& g, std::mt19937_64& rng, const PacketSampler& s = {});

// Deterministic per-sample generator: sample i of seed s is independent of the sample count.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

enum class EstimateId { le1, le2, lhe1, lhe2, remark_le, omega_scaling };

std::string to_string(EstimateId id);
EstimateId parse_estimate_id(std::string_view name);

struct EstimateSpec {
    EstimateId id = EstimateId::le1;
    int d = 1;
    double p = 1.0;       // use INFINITY for p = inf
    double gamma = 0.4;
    double a = 0.0;
    double t = 0.5;       // time parameter of H-hat; Omega time for omega_scaling
    double rho = 1.5;     // omega_scaling only
    int samples = 100;
    std::uint64_t seed = 1;
    double box = 40.0;
    int points = 512;
    bool enforce_hypothesis = true;

    // Empty when the exponents satisfy the cited hypothesis.
    std::string hypothesis_violation() const;
};

// Ratio series per inequality ("ratio:<name>"), their running maxima, and
// max / median scalars. Violations throw unless enforce_hypothesis is false,
// in which case they are recorded as flags.
ScanReport estimate_constant(const EstimateSpec& spec);

}  // namespace hfsim
