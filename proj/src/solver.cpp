#include "hfsim/solver.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "hfsim/propagator.hpp"

namespace hfsim {

namespace {

constexpr cplx I(0.0, 1.0);

void require_particles(const SpectralGrid& g, std::span<const Field> psi) {
    if (psi.empty()) throw std::invalid_argument("at least one particle is required");
    for (const auto& f : psi) g.require_shape(f);
}

Field times_conj(std::span<const cplx> a, std::span<const cplx> b) {
    Field out(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) out[n] = std::conj(a[n]) * b[n];
    return out;
}

// Real Hartree potential seen by particle k (self term excluded for the full model).
RealField hartree_potential_for(const ModelParams& p, const SpectralGrid& g, const RealField& mult,
                                std::span<const Field> psi, std::size_t k) {
    Field dens(g.size(), cplx(0.0));
    for (std::size_t l = 0; l < psi.size(); ++l) {
        if (p.variant == Variant::full && l == k) continue;
        for (std::size_t n = 0; n < g.size(); ++n) dens[n] += std::norm(psi[l][n]);
    }
    Field v = apply_multiplier(g, mult, dens);
    RealField out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) out[n] = p.kappa * v[n].real();
    return out;
}

// kappa sum_{l != k} psi_l K * (conj(psi_l) psi_k).
Ensemble exchange(const ModelParams& p, const SpectralGrid& g, const RealField& mult, std::span<const Field> psi) {
    const std::size_t N = psi.size();
    Ensemble out(N, Field(g.size(), cplx(0.0)));
    for (std::size_t k = 0; k < N; ++k) {
        for (std::size_t l = k + 1; l < N; ++l) {
            // K * (conj(psi_k) psi_l) is the conjugate of K * (conj(psi_l) psi_k).
            Field c = apply_multiplier(g, mult, times_conj(psi[l], psi[k]));
            for (std::size_t n = 0; n < g.size(); ++n) {
                out[k][n] += p.kappa * psi[l][n] * c[n];
                out[l][n] += p.kappa * psi[k][n] * std::conj(c[n]);
            }
        }
    }
    return out;
}

Ensemble propagate_all(const SpectralGrid& g, double alpha, double t, std::span<const Field> psi) {
    Ensemble out;
    out.reserve(psi.size());
    for (const auto& f : psi) out.push_back(free_propagate(g, alpha, t, f));
    return out;
}

// Local cubic Lagrange weights of nodes s[0..3] integrated over [lo, hi].
std::array<double, 4> interval_weights(const std::array<double, 4>& s, int count, double lo, double hi) {
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    std::array<double, 4> w{};
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int q = 0; q < 3; ++q) {
        const double x = mid + half * gx[q];
        for (int j = 0; j < count; ++j) {
            double b = 1.0;
            for (int m = 0; m < count; ++m)
                if (m != j) b *= (x - s[m]) / (s[j] - s[m]);
            w[j] += half * gw[q] * b;
        }
    }
    return w;
}

double relative_change(const SpectralGrid& g, const std::vector<Ensemble>& a, const std::vector<Ensemble>& b,
                       const NormSpec& spec) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < a[i].size(); ++k) {
            Field d(a[i][k].size());
            for (std::size_t n = 0; n < d.size(); ++n) d[n] = a[i][k][n] - b[i][k][n];
            diff = std::max(diff, norm(g, d, spec));
            scale = std::max(scale, norm(g, a[i][k], spec));
        }
    }
    return scale > 0.0 ? diff / scale : diff;
}

enum class PicardForm { twisted, untwisted };

PicardResult picard(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid, std::span<const Field> psi0,
                    const SolveConfig& cfg, PicardForm form) {
    params.validate();
    cfg.validate();
    if (!grid) throw std::invalid_argument("solver needs a grid");
    const SpectralGrid& g = *grid;
    require_particles(g, psi0);
    if (static_cast<int>(psi0.size()) != params.N) throw std::invalid_argument("datum particle count differs from N");
    if (form == PicardForm::twisted && params.alpha != 2.0)
        throw std::invalid_argument("the twisted map needs alpha = 2 (factorization of U(t))");

    const std::vector<double> t = cfg.time_lattice();
    const std::size_t nt = t.size();
    const Ensemble base(psi0.begin(), psi0.end());

    // The iterate is always held in the twisted variable; the untwisted map
    // differs only in the norm that controls convergence.
    std::vector<Ensemble> phi(nt, base);
    std::vector<Ensemble> psi(nt), nl(nt), integrand(nt);
    PicardResult res;
    auto physical = [&](const std::vector<Ensemble>& ph) {
        std::vector<Ensemble> out(nt);
        for (std::size_t i = 0; i < nt; ++i) out[i] = propagate_all(g, params.alpha, t[i], ph[i]);
        return out;
    };
    psi = physical(phi);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        for (std::size_t i = 0; i < nt; ++i) {
            nl[i] = nonlinearity(params, g, psi[i]);
            integrand[i] = propagate_all(g, params.alpha, -t[i], nl[i]);
        }
        const std::vector<Ensemble> acc = cumulative_integral(t, integrand);
        std::vector<Ensemble> next(nt, base);
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t k = 0; k < base.size(); ++k)
                for (std::size_t n = 0; n < g.size(); ++n) next[i][k][n] += I * acc[i][k][n];
        std::vector<Ensemble> next_psi = physical(next);
        const double change = form == PicardForm::twisted ? relative_change(g, next, phi, cfg.control)
                                                          : relative_change(g, next_psi, psi, cfg.control);
        if (!std::isfinite(change)) throw NonConvergence("Picard iterate became non-finite", change);
        if (!res.differences.empty()) res.contraction.push_back(change / res.differences.back());
        res.differences.push_back(change);
        phi = std::move(next);
        psi = std::move(next_psi);
        res.iterations = it;
        if (change < cfg.tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && cfg.require_convergence) {
        std::ostringstream os;
        os << "Picard iteration did not reach tol " << cfg.tol << " within " << cfg.max_iter
           << " iterations (last change " << res.differences.back() << "); T=" << cfg.T << " may be too large";
        throw NonConvergence(os.str(), res.differences.back());
    }
    res.traj.grid = grid;
    res.traj.alpha = params.alpha;
    res.traj.times = t;
    res.traj.states = psi;
    res.traj.nonlinearity.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) res.traj.nonlinearity[i] = nonlinearity(params, g, psi[i]);
    res.twisted = std::move(phi);
    return res;
}

}  // namespace

void ModelParams::validate() const {
    std::ostringstream os;
    if (d < 1 || d > 3) os << "d=" << d << " must be 1, 2 or 3; ";
    if (!(alpha > 0.0)) os << "alpha=" << alpha << " must be > 0; ";
    if (!(gamma > 0.0 && gamma < d)) os << "gamma=" << gamma << " violates 0<gamma<d for d=" << d << "; ";
    if (!(a >= 0.0)) os << "a=" << a << " must be >= 0; ";
    if (!std::isfinite(kappa)) os << "kappa must be finite; ";
    if (N < 1) os << "N=" << N << " must be >= 1; ";
    if (variant == Variant::full && N < 2) os << "the full Hartree-Fock model needs N >= 2; ";
    const std::string msg = os.str();
    if (!msg.empty()) throw std::invalid_argument(msg.substr(0, msg.size() - 2));
}

void SolveConfig::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be > 0");
    if (n_t < 2) throw std::invalid_argument("at least two time nodes are required");
    if (!(tol > 0.0)) throw std::invalid_argument("Picard tolerance must be > 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

std::vector<double> SolveConfig::time_lattice() const {
    std::vector<double> t(n_t);
    for (int i = 0; i < n_t; ++i) t[i] = T * i / (n_t - 1);
    return t;
}

void SplitStepConfig::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    const double steps = T / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps) throw std::invalid_argument("T must be a multiple of dt");
    if (store_every < 1) throw std::invalid_argument("store_every must be >= 1");
}

Ensemble nonlinearity(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi) {
    const InteractionKernel k = params.kernel();
    k.validate();
    require_particles(g, psi);
    const RealField mult = kernel_multiplier(g, k);
    Ensemble out(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const RealField v = hartree_potential_for(params, g, mult, psi, j);
        out[j].resize(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) out[j][n] = v[n] * psi[j][n];
    }
    if (params.variant == Variant::full) {
        const Ensemble ex = exchange(params, g, mult, psi);
        for (std::size_t j = 0; j < psi.size(); ++j)
            for (std::size_t n = 0; n < g.size(); ++n) out[j][n] -= ex[j][n];
    }
    return out;
}

PicardResult picard_solve_twisted(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                                  std::span<const Field> psi0, const SolveConfig& cfg) {
    return picard(params, std::move(grid), psi0, cfg, PicardForm::twisted);
}

PicardResult picard_solve_untwisted(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                                    std::span<const Field> psi0, const SolveConfig& cfg) {
    return picard(params, std::move(grid), psi0, cfg, PicardForm::untwisted);
}

Trajectory splitstep_evolve(const ModelParams& params, std::shared_ptr<const SpectralGrid> grid,
                            std::span<const Field> psi0, const SplitStepConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!grid) throw std::invalid_argument("solver needs a grid");
    const SpectralGrid& g = *grid;
    require_particles(g, psi0);
    if (static_cast<int>(psi0.size()) != params.N) throw std::invalid_argument("datum particle count differs from N");

    const std::size_t N = psi0.size();
    const long steps = std::lround(cfg.T / cfg.dt);
    const RealField mult = kernel_multiplier(g, params.kernel());
    const RealField sym = laplacian_symbol(g, params.alpha);
    Field half_free(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) half_free[n] = std::polar(1.0, -0.5 * cfg.dt * sym[n]);

    auto free_half = [&](Ensemble& psi) {
        for (auto& f : psi) f = apply_multiplier(g, half_free, f);
    };
    auto hartree = [&](Ensemble& psi, double tau) {
        std::vector<RealField> v(N);
        for (std::size_t k = 0; k < N; ++k) v[k] = hartree_potential_for(params, g, mult, psi, k);
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t n = 0; n < g.size(); ++n) psi[k][n] *= std::polar(1.0, v[k][n] * tau);
    };
    // i d_t psi_k = sum_{l != k} kappa psi_l K * (conj(psi_l) psi_k), implicit midpoint.
    auto exchange_step = [&](Ensemble& psi, double tau) {
        if (params.variant != Variant::full || N < 2) return;
        Ensemble next = psi;
        for (int it = 0; it < cfg.exchange_max_iter; ++it) {
            Ensemble mid(N, Field(g.size()));
            for (std::size_t k = 0; k < N; ++k)
                for (std::size_t n = 0; n < g.size(); ++n) mid[k][n] = 0.5 * (psi[k][n] + next[k][n]);
            const Ensemble ex = exchange(params, g, mult, mid);
            double change = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                for (std::size_t n = 0; n < g.size(); ++n) {
                    const cplx v = psi[k][n] - I * tau * ex[k][n];
                    change = std::max(change, std::abs(v - next[k][n]));
                    scale = std::max(scale, std::abs(v));
                    next[k][n] = v;
                }
            }
            if (change <= cfg.exchange_tol * scale) break;
            if (it + 1 == cfg.exchange_max_iter) throw std::runtime_error("exchange step did not converge; reduce dt");
        }
        psi = std::move(next);
    };

    Trajectory traj;
    traj.grid = grid;
    traj.alpha = params.alpha;
    Ensemble psi(psi0.begin(), psi0.end());
    auto store = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(psi);
        traj.nonlinearity.push_back(nonlinearity(params, g, psi));
    };
    store(0.0);
    for (long s = 1; s <= steps; ++s) {
        free_half(psi);
        hartree(psi, 0.5 * cfg.dt);
        exchange_step(psi, cfg.dt);
        hartree(psi, 0.5 * cfg.dt);
        free_half(psi);
        for (const auto& f : psi)
            for (const auto& v : f)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw std::overflow_error("split-step solution became non-finite");
        if (s % cfg.store_every == 0 || s == steps) store(s * cfg.dt);
    }
    return traj;
}

double duhamel_residual(const ModelParams& params, const Trajectory& traj) {
    traj.validate();
    if (traj.times.empty() || traj.times.front() != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
    const SpectralGrid& g = *traj.grid;
    const std::size_t nt = traj.nodes();
    std::vector<Ensemble> integrand(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        const Ensemble nl = traj.has_nonlinearity() ? traj.nonlinearity[i] : nonlinearity(params, g, traj.states[i]);
        integrand[i] = propagate_all(g, traj.alpha, -traj.times[i], nl);
    }
    const std::vector<Ensemble> acc = cumulative_integral(traj.times, integrand);
    double worst = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t k = 0; k < traj.particles(); ++k) {
            Field phi(traj.states[0][k]);
            for (std::size_t n = 0; n < g.size(); ++n) phi[n] += I * acc[i][k][n];
            Field r = free_propagate(g, traj.alpha, traj.times[i], phi);
            for (std::size_t n = 0; n < g.size(); ++n) r[n] = traj.states[i][k][n] - r[n];
            worst = std::max(worst, l2_norm(g, r));
        }
    }
    return worst;
}

ScanReport conservation_report(const Trajectory& traj, std::span<const AdmissiblePair> pairs) {
    traj.validate();
    const SpectralGrid& g = *traj.grid;
    ScanReport rep;
    rep.kind = "conservation";
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.particles(); ++k) {
        const double m0 = l2_norm(g, traj.states.front()[k]);
        std::vector<double> drift(traj.nodes());
        for (std::size_t i = 0; i < traj.nodes(); ++i) {
            const double m = l2_norm(g, traj.states[i][k]);
            drift[i] = m0 > 0.0 ? std::abs(m - m0) / m0 : m;
            worst = std::max(worst, drift[i]);
        }
        rep.series["drift:" + std::to_string(k + 1)] = std::move(drift);
    }
    rep.series["t"] = traj.times;
    rep.scalars["max_drift"] = worst;
    for (const auto& pr : pairs) {
        auto fmt = [](Exponent e) { return e.is_infinite() ? std::string("inf") : format_number(e.value()); };
        const std::string key = "spacetime:" + fmt(pr.q) + "," + fmt(pr.r);
        rep.scalars[key] = spacetime_norm(traj, pr.q, pr.r, TimeTransform::identity);
        if (!is_admissible(traj.alpha, g.dim(), pr.q, pr.r)) rep.flags.push_back(key + " is not an admissible pair");
    }
    return rep;
}

std::vector<Ensemble> cumulative_integral(std::span<const double> t, std::span<const Ensemble> G) {
    const std::size_t nt = t.size();
    if (G.size() != nt) throw std::invalid_argument("integrand and time lattice differ in length");
    std::vector<Ensemble> out(nt);
    if (nt == 0) return out;
    out[0] = G[0];
    for (auto& f : out[0]) std::fill(f.begin(), f.end(), cplx(0.0));
    const int count = static_cast<int>(std::min<std::size_t>(4, nt));
    for (std::size_t j = 0; j + 1 < nt; ++j) {
        std::size_t first = j >= 1 ? j - 1 : 0;
        if (first + count > nt) first = nt - count;
        std::array<double, 4> s{};
        for (int m = 0; m < count; ++m) s[m] = t[first + m];
        const auto w = interval_weights(s, count, t[j], t[j + 1]);
        out[j + 1] = out[j];
        for (std::size_t k = 0; k < out[j + 1].size(); ++k)
            for (int m = 0; m < count; ++m)
                for (std::size_t n = 0; n < out[j + 1][k].size(); ++n) out[j + 1][k][n] += w[m] * G[first + m][k][n];
    }
    return out;
}

std::vector<double> product_weights(std::span<const double> t, double gamma, std::size_t i) {
    if (t.empty() || t.front() != 0.0) throw std::invalid_argument("product weights need t_0 = 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("product weights need 0 <= gamma < 1");
    if (i >= t.size()) throw std::out_of_range("product weight index past the lattice");
    std::vector<double> w(t.size(), 0.0);
    auto moment = [&](double e, double a, double b) { return (std::pow(b, e) - std::pow(a, e)) / e; };
    for (std::size_t j = 0; j < i; ++j) {
        const double a = t[j], b = t[j + 1], h = b - a;
        const double m0 = moment(1.0 - gamma, a, b);
        const double m1 = moment(2.0 - gamma, a, b);
        w[j] += (b * m0 - m1) / h;
        w[j + 1] += (m1 - a * m0) / h;
    }
    return w;
}

}  // namespace hfsim
