#include "hfsim/illposedness.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hfsim/kernels.hpp"
#include "hfsim/norms.hpp"
#include "hfsim/propagator.hpp"
#include "hfsim/trilinear.hpp"

namespace hfsim {

namespace {

constexpr cplx I(0.0, 1.0);

double radius(const std::array<double, 3>& x, int d) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return std::sqrt(r2);
}

Ensemble propagate_all(const SpectralGrid& g, double alpha, double t, std::span<const Field> psi) {
    Ensemble out;
    for (const auto& f : psi) out.push_back(free_propagate(g, alpha, t, f));
    return out;
}

Ensemble interaction_integral(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi0, double t,
                              int n) {
    auto [s, w] = gauss_legendre(n, t);
    Ensemble acc(psi0.size(), Field(g.size(), cplx(0.0)));
    for (int q = 0; q < n; ++q) {
        const Ensemble u = propagate_all(g, params.alpha, s[q], psi0);
        const Ensemble nl = nonlinearity(params, g, u);
        for (std::size_t k = 0; k < psi0.size(); ++k) {
            const Field back = free_propagate(g, params.alpha, -s[q], nl[k]);
            for (std::size_t m = 0; m < g.size(); ++m) acc[k][m] += w[q] * back[m];
        }
    }
    Ensemble out = propagate_all(g, params.alpha, t, acc);
    for (auto& f : out)
        for (auto& v : f) v *= -I;
    return out;
}

}  // namespace

double bump_profile(double r, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("bump radius must be positive");
    const double u = r / R;
    if (u >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

BumpPair bump_pair(const SpectralGrid& g, double scale, double amplitude) {
    const int d = g.dim();
    BumpPair out;
    out.lower = sample(g, [&](const auto& x) { return cplx(amplitude * bump_profile(scale * radius(x, d), 2.0)); });
    out.upper = sample(g, [&](const auto& x) { return cplx(amplitude * bump_profile(scale * radius(x, d), 3.0)); });
    return out;
}

Field g_zero(const ModelParams& params, const SpectralGrid& g, std::span<const cplx> psi1, std::span<const cplx> psi2) {
    g.require_shape(psi1);
    g.require_shape(psi2);
    const InteractionKernel k = params.kernel();
    const RealField mult = kernel_multiplier(g, k);
    auto pot = [&](std::span<const cplx> f, std::span<const cplx> h) {
        Field rho(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) rho[n] = f[n] * std::conj(h[n]);
        return apply_multiplier(g, mult, rho);
    };
    Field out(g.size());
    if (params.variant == Variant::reduced) {
        const Field v = pot(psi1, psi1);
        for (std::size_t n = 0; n < g.size(); ++n) out[n] = -I * params.kappa * v[n] * psi1[n];
        return out;
    }
    const Field v22 = pot(psi2, psi2);
    const Field v12 = pot(psi1, psi2);
    for (std::size_t n = 0; n < g.size(); ++n)
        out[n] = params.kappa * (-I * v22[n] * psi1[n] + I * v12[n] * psi2[n]);
    return out;
}

ScanReport taylor_remainder(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi0,
                            std::span<const double> times, Exponent p, int nodes) {
    if (psi0.size() < 2) throw std::invalid_argument("Taylor remainder needs two particles");
    const Field g0 = g_zero(params, g, psi0[0], psi0[1]);
    ScanReport r;
    r.kind = "taylor-remainder";
    std::vector<double> ts, q, changes;
    for (double t : times) {
        const SecondIterate it = second_iterate(params, g, psi0, t, nodes);
        Field diff = it.value[0];
        for (std::size_t n = 0; n < diff.size(); ++n) diff[n] -= t * g0[n];
        ts.push_back(t);
        q.push_back(hat_lp_norm(g, diff, p) / (t * t));
        changes.push_back(it.node_change);
    }
    std::vector<double> ratios;
    for (std::size_t i = 1; i < q.size(); ++i) ratios.push_back(q[i] / q[i - 1]);
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    r.series["t"] = ts;
    r.series["remainder"] = q;
    r.series["node_change"] = changes;
    r.series["halving_ratio"] = ratios;
    r.scalars["spread"] = q.empty() ? 0.0 : *hi / *lo;
    r.scalars["max_halving_ratio"] = ratios.empty() ? 1.0 : *std::max_element(ratios.begin(), ratios.end());
    return r;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double t) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
    const std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x, w;
    for (double z : pos) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double wz = 2.0 / ((1.0 - z * z) * dp * dp);
        if (z == 0.0) {
            x.push_back(0.0);
            w.push_back(wz);
        } else {
            x.push_back(z);
            w.push_back(wz);
            x.push_back(-z);
            w.push_back(wz);
        }
    }
    for (auto& v : x) v = 0.5 * t * (v + 1.0);
    for (auto& v : w) v *= 0.5 * t;
    return {x, w};
}

SecondIterate second_iterate(const ModelParams& params, const SpectralGrid& g, std::span<const Field> psi0, double t,
                             int nodes) {
    if (!(t > 0.0)) throw std::invalid_argument("second iterate needs t > 0");
    if (nodes < 32) throw std::invalid_argument("second iterate needs at least 32 quadrature nodes");
    for (const auto& f : psi0) g.require_shape(f);
    const Ensemble coarse = interaction_integral(params, g, psi0, t, nodes);
    SecondIterate out;
    out.value = interaction_integral(params, g, psi0, t, 2 * nodes);
    out.nodes = 2 * nodes;
    for (std::size_t k = 0; k < psi0.size(); ++k) {
        Field d(g.size());
        for (std::size_t m = 0; m < g.size(); ++m) d[m] = out.value[k][m] - coarse[k][m];
        const double base = l2_norm(g, out.value[k]);
        const double ch = l2_norm(g, d);
        out.node_change = std::max(out.node_change, base > 0.0 ? ch / base : ch);
    }
    return out;
}

Ensemble ScalingFamily::sample_at(const SpectralGrid& g, double h) const {
    const int d = g.dim();
    const double amp = std::pow(h, lambda);
    auto scaled = [&](const std::function<cplx(const std::array<double, 3>&)>& fn) {
        return sample(g, [&](const std::array<double, 3>& x) {
            std::array<double, 3> y{};
            for (int a = 0; a < d; ++a) y[a] = h * x[a];
            return amp * fn(y);
        });
    };
    return {scaled(first), scaled(second)};
}

ScalingFamily bump_family(int d, double p, std::vector<double> scales) {
    ScalingFamily f;
    f.first = [d](const std::array<double, 3>& x) { return cplx(bump_profile(radius(x, d), 2.0)); };
    f.second = [d](const std::array<double, 3>& x) { return cplx(bump_profile(radius(x, d), 3.0)); };
    f.lambda = std::isinf(p) ? 0.0 : d / p;
    f.scales = std::move(scales);
    return f;
}

std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log-log fit needs two or more points");
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::domain_error("log-log fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(y[i]) - (icpt + slope * std::log(x[i]));
        rss += r * r;
    }
    return {slope, std::sqrt(rss / n)};
}

ScanReport growth_scan(const GrowthScanSpec& spec, const ScalingFamily& family) {
    ScanReport rep;
    rep.kind = "illposedness-scan";
    const ModelParams& m = spec.model;
    m.validate();
    if (m.a != 0.0) throw std::invalid_argument("growth scan: the inflation arm needs a = 0");
    if (!(spec.p > 2.0)) throw std::invalid_argument("growth scan needs p > 2");
    const double inv_p = std::isinf(spec.p) ? 0.0 : 1.0 / spec.p;
    const double bound = 2.0 * m.d * (0.5 - inv_p);
    if (!(m.gamma < bound)) {
        std::ostringstream os;
        os << "gamma=" << m.gamma << " violates 0<gamma<2d(1/2-1/p)=" << bound << " for p=" << spec.p << ", d=" << m.d;
        throw std::invalid_argument(os.str());
    }
    if (std::abs(family.lambda - m.d * inv_p) > 1e-12) throw std::invalid_argument("scaling family needs lambda = d/p");
    if (family.scales.size() < 2) throw std::invalid_argument("growth scan needs at least two scales");
    const SpectralGrid g(m.d, spec.box, spec.points);
    const Exponent p = std::isinf(spec.p) ? Exponent::infinity() : Exponent(spec.p);

    for (double h : family.scales) {
        const Ensemble psi0 = family.sample_at(g, h);
        for (const auto& f : psi0) {
            const DecayReport dr = decay_check(g, f);
            if (!dr.ok(1e-6)) {
                std::ostringstream os;
                os << "scaled datum at h=" << h << " is not resolved (edge " << dr.edge_ratio << ", spectral "
                   << dr.spectral_ratio << "); enlarge the box or refine the grid";
                throw std::domain_error(os.str());
            }
        }
    }

    rep.series["h"] = family.scales;
    for (int arm = 0; arm < 2; ++arm) {
        ModelParams params = m;
        params.a = arm == 0 ? 0.0 : spec.control_a;
        const std::string tag = arm == 0 ? "coulomb" : "yukawa";
        std::vector<double> norms, changes, datum;
        for (double h : family.scales) {
            const Ensemble psi0 = family.sample_at(g, h);
            const SecondIterate it = second_iterate(params, g, psi0, spec.t, spec.nodes);
            norms.push_back(hat_lp_norm(g, it.value[0], p));
            changes.push_back(it.node_change);
            datum.push_back(hat_lp_norm(g, psi0[0], p));
            if (!it.resolved()) rep.flags.push_back(tag + ": node doubling changed D_1 by more than 1e-4");
        }
        const auto [slope, resid] = loglog_fit(family.scales, norms);
        rep.series["norm:" + tag] = norms;
        rep.series["node_change:" + tag] = changes;
        if (arm == 0) rep.series["datum_hat_norm"] = datum;
        rep.scalars["slope:" + tag] = slope;
        rep.scalars["fit_residual:" + tag] = resid;
    }
    rep.scalars["expected_slope"] = 2.0 * m.d * inv_p - m.d + m.gamma;
    rep.scalars["t"] = spec.t;
    rep.scalars["gamma"] = m.gamma;
    rep.scalars["p"] = spec.p;
    rep.scalars["control_a"] = spec.control_a;
    return rep;
}

ScanReport homogeneity_check(double gamma, int d, double a, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("homogeneity check needs h > 0");
    const InteractionKernel k{d, a, gamma};
    k.validate();
    ScanReport rep;
    rep.kind = "homogeneity";
    const std::vector<double> xi{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    std::vector<double> dev;
    double worst = 0.0;
    for (double x : xi) {
        const double lhs = kernel_ft(k, h * x);
        const double rhs = std::pow(h, gamma - d) * kernel_ft(k, x);
        dev.push_back(std::abs(lhs - rhs) / std::abs(rhs));
        worst = std::max(worst, dev.back());
    }
    rep.series["xi"] = xi;
    rep.series["deviation"] = dev;
    rep.scalars["max_deviation"] = worst;
    rep.scalars["h"] = h;
    rep.scalars["a"] = a;
    return rep;
}

double counterexample_g(double gamma, double b) {
    const double e = gamma + 1.0;
    return std::pow(2.0 + 2.0 * b, e) - 2.0 * std::pow(2.0 + b, e) + std::pow(2.0, e);
}

double counterexample_solve(double gamma, double a) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("counterexample needs 0 < gamma < 1");
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("counterexample needs 0 < a < 1");
    const double target = std::pow(a, gamma + 1.0);
    double lo = 0.0, hi = 1.0;
    while (counterexample_g(gamma, hi) < target) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (counterexample_g(gamma, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double h_ab_profile(double a, double b, double x) {
    x = std::abs(x);
    if (x < a) return a - x;
    if (x < 2.0) return 0.0;
    if (x < 2.0 + b) return 2.0 - x;
    if (x < 2.0 + 2.0 * b) return x - 2.0 - 2.0 * b;
    return 0.0;
}

CounterexampleMoments counterexample_moments(double gamma, double a, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("counterexample moments need b > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("counterexample needs 0 < gamma < 1");
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("counterexample needs 0 < a < 1");
    // Affine pieces c0 + c1 x on [u, v] for x >= 0.
    struct Piece {
        double u, v, c0, c1;
    };
    const Piece pieces[] = {{0.0, a, a, -1.0}, {2.0, 2.0 + b, 2.0, -1.0}, {2.0 + b, 2.0 + 2.0 * b, -2.0 - 2.0 * b, 1.0}};
    auto moment = [&](const Piece& pc, double u, double v) {
        if (!(v > u)) return 0.0;
        return pc.c0 * (std::pow(v, gamma) - std::pow(u, gamma)) / gamma +
               pc.c1 * (std::pow(v, gamma + 1.0) - std::pow(u, gamma + 1.0)) / (gamma + 1.0);
    };
    CounterexampleMoments m;
    for (const auto& pc : pieces) {
        m.full += 2.0 * moment(pc, pc.u, pc.v);
        m.inner += 2.0 * moment(pc, pc.u, std::min(pc.v, 1.0));
    }
    return m;
}

}  // namespace hfsim
