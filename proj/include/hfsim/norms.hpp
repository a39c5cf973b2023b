#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hfsim/grid.hpp"

namespace hfsim {

// Lebesgue exponent in [1, inf] with an exact infinity.
class Exponent {
public:
    explicit Exponent(double p);
    static Exponent infinity();

    bool is_infinite() const { return inf_; }
    // Finite value; throws for infinity.
    double value() const;
    // 1/p, with 1/inf = 0.
    double reciprocal() const { return inf_ ? 0.0 : 1.0 / p_; }
    // Hoelder conjugate p' = p/(p-1), with 1 <-> inf mapped exactly.
    Exponent conjugate() const;

private:
    Exponent() = default;
    double p_ = 1.0;
    bool inf_ = false;
};

// Parses "inf" or a number >= 1.
Exponent parse_exponent(std::string_view text);

// (sum |f|^p dx^d)^{1/p}; max |f| for p = inf.
double lp_norm(const SpectralGrid& g, std::span<const cplx> f, Exponent p);
// Same functional on spectral samples (dual cell volume).
double spectral_lp_norm(const SpectralGrid& g, std::span<const cplx> F, Exponent p);
// ||F f||_{L^{p'}}.
double hat_lp_norm(const SpectralGrid& g, std::span<const cplx> f, Exponent p);

enum class NormKind { lp, hat_lp, lp_cap_l2, hat_lp_cap_l2 };

struct NormSpec {
    NormKind kind = NormKind::lp_cap_l2;
    Exponent p{2.0};
};

// Intersection norms take the max of the two pieces.
double norm(const SpectralGrid& g, std::span<const cplx> f, const NormSpec& spec);
// Product-space norm: max over components.
double product_norm(const SpectralGrid& g, std::span<const Field> psi, const NormSpec& spec);

// Time-sampled multi-particle solution. `states` hold psi(t) (physical
// variable); `nonlinearity` optionally holds (H psi - F psi)(t) per particle.
struct Trajectory {
    std::shared_ptr<const SpectralGrid> grid;
    double alpha = 2.0;
    std::vector<double> times;
    std::vector<std::vector<Field>> states;
    std::vector<std::vector<Field>> nonlinearity;

    std::size_t nodes() const { return times.size(); }
    std::size_t particles() const { return states.empty() ? 0 : states.front().size(); }
    bool has_nonlinearity() const { return !nonlinearity.empty(); }
    void validate() const;
    // phi(t_i) = U(-t_i) psi(t_i).
    std::vector<Field> twisted(std::size_t i) const;
};

enum class TimeTransform { identity, twist };

// (int ||u(t)||_{L^r}^q dt)^{1/q} by composite trapezoid, max over particles.
double spacetime_norm(const Trajectory& traj, Exponent q, Exponent r, TimeTransform transform);

struct ZhouNorm {
    double initial = 0.0;    // max_k ||phi_k(0)||
    double seminorm = 0.0;   // max_k || t^theta ||d_t phi_k(t)|| ||_{L^q_T}
};

// d_t phi_k = i U(-t) (H psi - F psi)_k. `hat` selects the L^p-hat spatial norm.
ZhouNorm zhou_seminorm(const Trajectory& traj, Exponent p, Exponent q, double theta, bool hat);

// alpha/q = d(1/2 - 1/r), q, r >= 2, (q, r, d) != (inf, 2, 2).
bool is_admissible(double alpha, int d, Exponent q, Exponent r);

// Space-time L^{3p} norm of U(t) psi_0 over the stored window (d = 1), max over particles.
double strichartz_1d_norm(const Trajectory& traj, double p);

}  // namespace hfsim
