#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "hfsim/grid.hpp"
#include "hfsim/report.hpp"
#include "hfsim/solver.hpp"

namespace hfsim {

// exp(1 - 1/(1 - (r/R)^2)) for r < R, else 0. Equals 1 at the origin.
double bump_profile(double r, double R);

struct BumpPair {
    Field lower;  // radius 2
    Field upper;  // radius 3; lower <= upper pointwise
};
BumpPair bump_pair(const SpectralGrid& g, double scale = 1.0, double amplitude = 1.0);

// -i (K * |psi_2|^2) psi_1 + i (K * (psi_1 conj(psi_2))) psi_2; for the reduced
// model only -i (K * |psi_1|^2) psi_1. Scaled by kappa.
Field g_zero(const ModelParams& params, const SpectralGrid& g, std::span<const cplx> psi1, std::span<const cplx> psi2);

struct SecondIterate {
    Ensemble value;           // D_k(psi_0)(t), computed with 2n nodes
    double node_change = 0.0; // max_k relative L2 change between n and 2n nodes
    int nodes = 0;
    bool resolved() const { return node_change <= 1e-4; }
};

// D_k(t) = -i int_0^t U(t - s) N_k(U(s) psi_0) ds, by Gauss-Legendre quadrature of
// the smooth interaction-picture integrand U(-s) N_k(U(s) psi_0).
SecondIterate second_iterate(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi0, double t,
                             int nodes = 32);

// ||D_1(psi_0)(t) - t g(0)||_{L^p-hat} / t^2 for each t (series "t", "remainder"),
// plus the successive ratios q(t/2)/q(t) ("halving_ratio") and max/min of q ("spread").
ScanReport taylor_remainder(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi0,
                            std::span<const double> times, Exponent p, int nodes = 32);

// Gauss-Legendre nodes and weights on [0, t].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double t);

struct ScalingFamily {
    std::function<cplx(const std::array<double, 3>&)> first;
    std::function<cplx(const std::array<double, 3>&)> second;
    double lambda = 0.0;
    std::vector<double> scales;

    // psi_0^h(x) = h^lambda psi_0(h x) for both particles.
    Ensemble sample_at(const SpectralGrid& g, double h) const;
};

// Bump pair of radii 2 and 3 with lambda = d/p.
ScalingFamily bump_family(int d, double p, std::vector<double> scales);

struct GrowthScanSpec {
    ModelParams model;        // a = 0 arm
    double p = INFINITY;
    double t = 0.05;
    double control_a = 1.0;   // Yukawa control arm
    double box = 1024.0;
    int points = 32768;
    int nodes = 32;
};

// ||D_1(psi_0^h)(t)||_{L^p-hat} for each scale, least-squares slope in log-log,
// repeated with a = control_a.
ScanReport growth_scan(const GrowthScanSpec& spec, const ScalingFamily& family);

// Max relative deviation of F K(h xi) from h^{gamma-d} F K(xi) over sample frequencies.
ScanReport homogeneity_check(double gamma, int d, double a, double h);

// G(b) = (2+2b)^{gamma+1} - 2(2+b)^{gamma+1} + 2^{gamma+1}.
double counterexample_g(double gamma, double b);
// Root of G(b) = a^{gamma+1} by bisection.
double counterexample_solve(double gamma, double a);
// Piecewise-linear even profile with H(0) = a and a valley of depth b at 2 + b.
double h_ab_profile(double a, double b, double x);

struct CounterexampleMoments {
    double full = 0.0;   // int_R |x|^{gamma-1} H(x) dx
    double inner = 0.0;  // int_{|x|<=1} |x|^{gamma-1} H(x) dx
};
CounterexampleMoments counterexample_moments(double gamma, double a, double b);

// Least-squares slope and RMS residual of log(y) against log(x).
std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace hfsim
