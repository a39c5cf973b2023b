#pragma once

#include <span>
#include <variant>

#include "hfsim/grid.hpp"

namespace hfsim {

// K(x) = exp(-a|x|) |x|^{-gamma}; a = 0 is the Coulomb-type kernel.
struct InteractionKernel {
    int d = 1;
    double a = 0.0;
    double gamma = 0.5;

    void validate() const;
    bool screened() const { return a > 0.0; }
};

// C_{d,gamma} with F|x|^{-gamma} = C_{d,gamma} |xi|^{gamma-d}.
double riesz_constant(int d, double gamma);

// c_d = Gamma((d+1)/2) / pi^{(d+1)/2}.
double poisson_constant(int d);

// F[exp(-a|.|)](xi) = (2 pi)^d c_d a / (a^2 + 4 pi^2 |xi|^2)^{(d+1)/2}.
double exp_ft_profile(int d, double a, double xi);

struct DeltaMass {};
using SProfileValue = std::variant<DeltaMass, double>;

// S_{a,t}(xi): the unit point mass for a = 0, else a|t| / (4a^2t^2 + |xi|^2)^{(d+1)/2}.
SProfileValue s_profile(int d, double a, double t, double xi);

// ||S_{a,t}||_{L^1} by radial quadrature; the point mass has norm 1.
double s_profile_l1(int d, double a, double t);

struct KernelSplit {
    double inner = 0.0;  // k1: |x|^{gamma-d} on |x| <= 1
    double outer = 0.0;  // k2: |x|^{gamma-d} on |x| > 1
    bool origin_cell = false;
};

// For x = 0 the inner value is the average over the cube of side `cell`.
KernelSplit kernel_split(int d, double gamma, std::span<const double> x, double cell = 0.0);

// Mean of |x|^beta over the cube [-h/2, h/2]^d (beta > -d).
double origin_cell_average(int d, double beta, double h);

// V(r) = int_{lo <= |z| <= hi} |z|^{gamma-d} P_eps(x - z) dz at |x| = r with
// P_eps(y) = eps / (eps^2 + |y|^2)^{(d+1)/2}.
double poisson_riesz_convolution(int d, double gamma, double eps, double r, double lo, double hi);

// C_{d,gamma} |xi|^{gamma-d} on the dual lattice; the xi = 0 entry holds the
// average of the multiplier over the dual cell.
RealField coulomb_multiplier(const SpectralGrid& g, double gamma);

// F K(xi) = C_{d,gamma} (|.|^{gamma-d} * h_a)(xi), cached per (grid, a, gamma).
RealField yukawa_multiplier(const SpectralGrid& g, double a, double gamma);

// F K at |xi| = xi > 0 (a = 0: C |xi|^{gamma-d}; a > 0: radial quadrature).
double kernel_ft(const InteractionKernel& k, double xi);

// Dispatches on kernel.a.
RealField kernel_multiplier(const SpectralGrid& g, const InteractionKernel& k);

enum class ProfilePart { full, inner, outer };

// Physical-space profile (S_{a,t} * k)(x) for k = |.|^{gamma-d} or its inner
// and outer pieces. a = 0 samples k itself with the origin-cell average.
RealField hat_profile(const SpectralGrid& g, const InteractionKernel& k, double t, ProfilePart part);

// Clears the multiplier and profile caches.
void clear_kernel_caches();

}  // namespace hfsim
