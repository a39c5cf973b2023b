#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "hfsim/grid.hpp"
#include "hfsim/kernels.hpp"
#include "hfsim/norms.hpp"
#include "hfsim/report.hpp"

namespace hfsim {

// One field per particle.
using Ensemble = std::vector<Field>;

enum class Variant { full, reduced };

struct ModelParams {
    int d = 1;
    double alpha = 2.0;
    double gamma = 0.5;
    double a = 0.0;
    double kappa = 1.0;
    int N = 2;
    Variant variant = Variant::full;

    void validate() const;
    InteractionKernel kernel() const { return {d, a, gamma}; }
};

struct SolveConfig {
    double T = 0.1;
    int n_t = 101;
    double tol = 1e-8;
    int max_iter = 100;
    NormSpec control{NormKind::lp_cap_l2, Exponent(2.0)};
    // When false a non-converged run returns its last iterate instead of throwing.
    bool require_convergence = true;

    void validate() const;
    std::vector<double> time_lattice() const;
};

// Per particle: kappa sum_l (K * |psi_l|^2) psi_k - kappa sum_l psi_l K * (conj(psi_l) psi_k).
// The l = k summands cancel in the full model and are skipped.
Ensemble nonlinearity(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi);

struct PicardResult {
    Trajectory traj;                       // psi(t) with nonlinearity snapshots
    std::vector<Ensemble> twisted;  // phi(t) = U(-t) psi(t)
    int iterations = 0;
    bool converged = false;
    std::vector<double> differences;      // relative successive-iterate change
    std::vector<double> contraction;      // ratio of consecutive differences
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double last) : std::runtime_error(what), last_difference(last) {}
    double last_difference;
};

// Iterates phi <- psi_0 + i int_0^t U(-s) N(U(s) phi(s)) ds from phi = psi_0. alpha = 2.
PicardResult picard_solve_twisted(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                                  std::span<const Field> psi0, const SolveConfig& cfg);

// Iterates psi <- U(t) psi_0 + i int_0^t U(t - s) N(psi(s)) ds from psi = U(t) psi_0.
PicardResult picard_solve_untwisted(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                                    std::span<const Field> psi0, const SolveConfig& cfg);

struct SplitStepConfig {
    double T = 1.0;
    double dt = 1e-3;
    int store_every = 1;
    double exchange_tol = 1e-14;
    int exchange_max_iter = 100;

    void validate() const;
};

// Strang splitting: half free step, half Hartree phase, exchange step by the
// implicit midpoint rule, half Hartree phase, half free step.
Trajectory splitstep_evolve(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                            std::span<const Field> psi0, const SplitStepConfig& cfg);

// sup_i max_k ||psi_k(t_i) - U(t_i) psi_k(0) - i int_0^{t_i} U(t_i - s) N_k(s) ds||_{L2}.
// Requires times starting at 0; computes missing nonlinearity snapshots.
double duhamel_residual(const ModelParams& params, const Trajectory& traj);

struct AdmissiblePair {
    Exponent q;
    Exponent r;
};

// Per-particle relative L2 drift series and requested space-time norms.
ScanReport conservation_report(const Trajectory& traj, std::span<const AdmissiblePair> pairs = {});

// I_i = int_{t_0}^{t_i} G(s) ds, piecewise cubic interpolation (exact for cubics).
std::vector<Ensemble> cumulative_integral(std::span<const double> t, std::span<const Ensemble> G);

// Weights w_j with int_0^{t_i} s^{-gamma} g(s) ds = sum_j w_j g(t_j) for g
// piecewise linear on the lattice (t_0 = 0, 0 <= gamma < 1).
std::vector<double> product_weights(std::span<const double> t, double gamma, std::size_t i);

}  // namespace hfsim
