#include "hfsim/norms.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hfsim/propagator.hpp"

namespace hfsim {

Exponent::Exponent(double p) : p_(p) {
    if (std::isinf(p) && p > 0) {
        inf_ = true;
        p_ = 1.0;
        return;
    }
    if (!(p >= 1.0)) {
        std::ostringstream os;
        os << "exponent " << p << " is outside [1, inf]";
        throw std::invalid_argument(os.str());
    }
}

Exponent Exponent::infinity() {
    Exponent e;
    e.inf_ = true;
    return e;
}

double Exponent::value() const {
    if (inf_) throw std::logic_error("infinite exponent has no finite value");
    return p_;
}

Exponent Exponent::conjugate() const {
    if (inf_) return Exponent(1.0);
    if (p_ == 1.0) return infinity();
    return Exponent(p_ / (p_ - 1.0));
}

Exponent parse_exponent(std::string_view text) {
    if (text == "inf" || text == "infinity") return Exponent::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse exponent '" + std::string(text) + "'");
    return Exponent(v);
}

namespace {

double weighted_lp(std::span<const cplx> f, double w, Exponent p) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (const auto& v : f) m = std::max(m, std::abs(v));
        return m;
    }
    const double q = p.value();
    double s = 0.0;
    if (q == 2.0) {
        for (const auto& v : f) s += std::norm(v);
    } else {
        for (const auto& v : f) s += std::pow(std::abs(v), q);
    }
    return std::pow(s * w, 1.0 / q);
}

double trapezoid_lq(std::span<const double> t, std::span<const double> vals, Exponent q) {
    if (vals.empty()) return 0.0;
    if (q.is_infinite()) {
        double m = 0.0;
        for (double v : vals) m = std::max(m, v);
        return m;
    }
    const double e = q.value();
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        s += 0.5 * (t[i] - t[i - 1]) * (std::pow(vals[i], e) + std::pow(vals[i - 1], e));
    return std::pow(s, 1.0 / e);
}

}  // namespace

double lp_norm(const SpectralGrid& g, std::span<const cplx> f, Exponent p) {
    g.require_shape(f);
    return weighted_lp(f, g.cell_volume(), p);
}

double spectral_lp_norm(const SpectralGrid& g, std::span<const cplx> F, Exponent p) {
    g.require_shape(F);
    return weighted_lp(F, g.dual_cell_volume(), p);
}

double hat_lp_norm(const SpectralGrid& g, std::span<const cplx> f, Exponent p) {
    return spectral_lp_norm(g, forward_ft(g, f), p.conjugate());
}

double norm(const SpectralGrid& g, std::span<const cplx> f, const NormSpec& spec) {
    const Exponent two(2.0);
    switch (spec.kind) {
        case NormKind::lp: return lp_norm(g, f, spec.p);
        case NormKind::hat_lp: return hat_lp_norm(g, f, spec.p);
        case NormKind::lp_cap_l2: return std::max(lp_norm(g, f, spec.p), lp_norm(g, f, two));
        case NormKind::hat_lp_cap_l2: return std::max(hat_lp_norm(g, f, spec.p), lp_norm(g, f, two));
    }
    throw std::invalid_argument("unknown norm kind");
}

double product_norm(const SpectralGrid& g, std::span<const Field> psi, const NormSpec& spec) {
    double m = 0.0;
    for (const auto& f : psi) m = std::max(m, norm(g, f, spec));
    return m;
}

void Trajectory::validate() const {
    if (!grid) throw std::invalid_argument("trajectory has no grid");
    if (states.size() != times.size()) throw std::invalid_argument("trajectory times and states differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("trajectory times are not increasing");
    for (const auto& s : states) {
        if (s.size() != particles()) throw std::invalid_argument("particle count changes along the trajectory");
        for (const auto& f : s) grid->require_shape(f);
    }
    if (has_nonlinearity() && nonlinearity.size() != times.size())
        throw std::invalid_argument("nonlinearity snapshots do not match the time lattice");
}

std::vector<Field> Trajectory::twisted(std::size_t i) const {
    std::vector<Field> out;
    out.reserve(states[i].size());
    for (const auto& f : states[i]) out.push_back(free_propagate(*grid, alpha, -times[i], f));
    return out;
}

double spacetime_norm(const Trajectory& traj, Exponent q, Exponent r, TimeTransform transform) {
    traj.validate();
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.particles(); ++k) {
        std::vector<double> vals(traj.nodes());
        for (std::size_t i = 0; i < traj.nodes(); ++i) {
            const Field& f = traj.states[i][k];
            vals[i] = transform == TimeTransform::twist
                          ? lp_norm(*traj.grid, free_propagate(*traj.grid, traj.alpha, -traj.times[i], f), r)
                          : lp_norm(*traj.grid, f, r);
        }
        worst = std::max(worst, trapezoid_lq(traj.times, vals, q));
    }
    return worst;
}

ZhouNorm zhou_seminorm(const Trajectory& traj, Exponent p, Exponent q, double theta, bool hat) {
    traj.validate();
    if (!traj.has_nonlinearity()) throw std::invalid_argument("Zhou seminorm needs nonlinearity snapshots");
    if (theta < 0.0) throw std::invalid_argument("Zhou weight exponent must be >= 0");
    const SpectralGrid& g = *traj.grid;
    ZhouNorm out;
    for (std::size_t k = 0; k < traj.particles(); ++k) {
        const Field phi0 = free_propagate(g, traj.alpha, -traj.times.front(), traj.states.front()[k]);
        out.initial = std::max(out.initial, hat ? hat_lp_norm(g, phi0, p) : lp_norm(g, phi0, p));
        std::vector<double> vals(traj.nodes());
        for (std::size_t i = 0; i < traj.nodes(); ++i) {
            const double t = traj.times[i];
            const double w = theta == 0.0 ? 1.0 : std::pow(t, theta);
            // U(-t) is an isometry of the hat spaces, so it is applied only for L^p.
            const Field& n = traj.nonlinearity[i][k];
            const double v = hat ? hat_lp_norm(g, n, p) : lp_norm(g, free_propagate(g, traj.alpha, -t, n), p);
            vals[i] = w * v;
        }
        out.seminorm = std::max(out.seminorm, trapezoid_lq(traj.times, vals, q));
    }
    return out;
}

bool is_admissible(double alpha, int d, Exponent q, Exponent r) {
    if (!q.is_infinite() && q.value() < 2.0) return false;
    if (!r.is_infinite() && r.value() < 2.0) return false;
    if (q.is_infinite() && !r.is_infinite() && r.value() == 2.0 && d == 2) return false;
    return std::abs(alpha * q.reciprocal() - d * (0.5 - r.reciprocal())) <= 1e-12;
}

double strichartz_1d_norm(const Trajectory& traj, double p) {
    traj.validate();
    if (traj.grid->dim() != 1) throw std::invalid_argument("strichartz_1d_norm requires d = 1");
    const Exponent e(3.0 * p);
    const SpectralGrid& g = *traj.grid;
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.particles(); ++k) {
        const Field& psi0 = traj.states.front()[k];
        std::vector<double> vals(traj.nodes());
        for (std::size_t i = 0; i < traj.nodes(); ++i)
            vals[i] = lp_norm(g, free_propagate(g, traj.alpha, traj.times[i] - traj.times.front(), psi0), e);
        worst = std::max(worst, trapezoid_lq(traj.times, vals, e));
    }
    return worst;
}

}  // namespace hfsim
