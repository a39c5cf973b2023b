#include "hfsim/trilinear.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hfsim/propagator.hpp"

namespace hfsim {

namespace {

constexpr double pi = std::numbers::pi;

void require_same(const SpectralGrid& g, std::span<const cplx> a, std::span<const cplx> b, std::span<const cplx> c) {
    g.require_shape(a);
    g.require_shape(b);
    g.require_shape(c);
}

Field conj_field(std::span<const cplx> f) {
    Field out(f.size());
    std::transform(f.begin(), f.end(), out.begin(), [](cplx v) { return std::conj(v); });
    return out;
}

Field reflect(const SpectralGrid& g, std::span<const cplx> f) {
    return unitary_factor(g, Factor::R, 0.0, f);
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += std::conj(a[n]) * b[n];
    return s;
}

double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

Field hartree_potential(const SpectralGrid& g, const InteractionKernel& k, std::span<const cplx> f,
                        std::span<const cplx> gg) {
    g.require_shape(f);
    g.require_shape(gg);
    Field rho(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) rho[n] = f[n] * std::conj(gg[n]);
    return apply_multiplier(g, kernel_multiplier(g, k), rho);
}

Field hartree_trilinear(const SpectralGrid& g, const InteractionKernel& k, std::span<const cplx> f,
                        std::span<const cplx> gg, std::span<const cplx> h) {
    require_same(g, f, gg, h);
    Field v = hartree_potential(g, k, f, gg);
    for (std::size_t n = 0; n < v.size(); ++n) v[n] *= h[n];
    return v;
}

Field hat_trilinear(const SpectralGrid& g, const TrilinearConfig& cfg, std::span<const cplx> f,
                    std::span<const cplx> gg, std::span<const cplx> h) {
    require_same(g, f, gg, h);
    if (cfg.kernel.screened() && cfg.t == 0.0) throw std::invalid_argument("screened H-hat requires t != 0");
    const RealField profile = hat_profile(g, cfg.kernel, cfg.t, cfg.part);
    Field w = convolve(g, f, conj_field(gg));
    for (std::size_t n = 0; n < w.size(); ++n) w[n] *= profile[n];
    return convolve(g, w, h);
}

Field omega(const SpectralGrid& g, double t, std::span<const cplx> u1, std::span<const cplx> u2) {
    Field w1 = unitary_factor(g, Factor::M, t, free_propagate(g, 2.0, -t, u1));
    Field w2 = unitary_factor(g, Factor::M, t, free_propagate(g, 2.0, -t, u2));
    return convolve(g, w1, reflect(g, conj_field(w2)));
}

TwistedIdentityRatio twisted_identity_ratio(const SpectralGrid& g, const InteractionKernel& k, double t, std::span<const cplx> u1,
                         std::span<const cplx> u2, std::span<const cplx> u3) {
    require_same(g, u1, u2, u3);
    const Field lhs = free_propagate(g, 2.0, -t, hartree_trilinear(g, k, u1, u2, u3));
    auto twisted = [&](std::span<const cplx> u) {
        return unitary_factor(g, Factor::M, t, free_propagate(g, 2.0, -t, u));
    };
    const Field w1 = twisted(u1);
    const Field w2 = reflect(g, twisted(u2));
    const Field w3 = twisted(u3);
    Field rhs = unitary_factor(g, Factor::M_inv, t, hat_trilinear(g, {k, t, ProfilePart::full}, w1, w2, w3));
    const double scale = std::pow(std::abs(t), -k.gamma);
    for (auto& v : rhs) v *= scale;

    const double den = std::real(inner(rhs, rhs));
    const double lhs2 = std::real(inner(lhs, lhs));
    if (!(den > 1e-300) || !(lhs2 > 1e-300)) throw std::domain_error("degenerate twisted identity projection");
    TwistedIdentityRatio out;
    out.ratio = inner(rhs, lhs) / den;
    double r = 0.0;
    for (std::size_t n = 0; n < lhs.size(); ++n) r += std::norm(lhs[n] - out.ratio * rhs[n]);
    out.residual = std::sqrt(r / lhs2);
    return out;
}

SpectralGrid matched_grid(int d, double t, int M) { return SpectralGrid(d, matched_box_length(t, M), M); }

Field random_bandlimited(const SpectralGrid& g, std::mt19937_64& rng, const PacketSampler& s) {
    const int d = g.dim();
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> width(s.min_width, s.max_width);
    std::normal_distribution<double> amp(0.0, 1.0);
    Field out(g.size(), cplx(0.0));
    for (int m = 0; m < s.packets; ++m) {
        std::array<double, 3> c{}, k{};
        for (int a = 0; a < d; ++a) c[a] = s.centre_spread * g.length() * unit(rng);
        for (int a = 0; a < d; ++a) k[a] = s.carrier_spread * g.nyquist() * unit(rng);
        const double w = width(rng);
        const cplx A(amp(rng), amp(rng));
        Field packet = sample(g, [&](const std::array<double, 3>& x) {
            double r2 = 0.0, ph = 0.0;
            for (int a = 0; a < d; ++a) {
                r2 += (x[a] - c[a]) * (x[a] - c[a]);
                ph += 2.0 * pi * k[a] * x[a];
            }
            return A * std::exp(-pi * r2 / (w * w)) * std::polar(1.0, ph);
        });
        for (std::size_t n = 0; n < out.size(); ++n) out[n] += packet[n];
    }
    return out;
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

std::string to_string(EstimateId id) {
    switch (id) {
        case EstimateId::le1: return "le1";
        case EstimateId::le2: return "le2";
        case EstimateId::lhe1: return "lhe1";
        case EstimateId::lhe2: return "lhe2";
        case EstimateId::remark_le: return "remark_le";
        case EstimateId::omega_scaling: return "omega_scaling";
    }
    return "unknown";
}

EstimateId parse_estimate_id(std::string_view name) {
    for (auto id : {EstimateId::le1, EstimateId::le2, EstimateId::lhe1, EstimateId::lhe2, EstimateId::remark_le,
                    EstimateId::omega_scaling})
        if (name == to_string(id)) return id;
    throw std::invalid_argument("unknown estimate '" + std::string(name) + "'");
}

std::string EstimateSpec::hypothesis_violation() const {
    std::ostringstream os;
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    auto cone = [&](double lo_p, bool lo_open, double hi_p, bool hi_open, double bound, const char* text) {
        const bool p_ok = (lo_open ? p > lo_p : p >= lo_p) && (hi_open ? p < hi_p : p <= hi_p);
        if (!p_ok) {
            os << "p=" << p << " is outside the exponent range of " << to_string(id);
            return;
        }
        if (!(gamma > 0.0 && gamma < bound)) os << "gamma=" << gamma << " violates 0<gamma<" << text << "=" << bound
                                                << " for p=" << p << ", d=" << d;
    };
    if (d < 1 || d > 3) return "d must be 1, 2 or 3";
    if (samples < 1) return "sample count must be positive";
    switch (id) {
        case EstimateId::le1: cone(1.0, false, 2.0, true, 2.0 * d * (inv_p - 0.5), "2d(1/p-1/2)"); break;
        case EstimateId::le2: cone(2.0, true, INFINITY, false, d * (0.5 - inv_p), "d(1/2-1/p)"); break;
        case EstimateId::lhe1: cone(1.0, false, 2.0, true, d * (inv_p - 0.5), "d(1/p-1/2)"); break;
        case EstimateId::lhe2: cone(2.0, true, INFINITY, false, 2.0 * d * (0.5 - inv_p), "2d(1/2-1/p)"); break;
        case EstimateId::remark_le: cone(1.0, false, INFINITY, false, d, "d"); break;
        case EstimateId::omega_scaling:
            if (!(rho >= 1.0) || std::isinf(rho)) os << "rho=" << rho << " must lie in [1, inf)";
            if (t == 0.0) os << "omega_scaling needs t != 0";
            break;
    }
    if (a < 0.0) os << "a=" << a << " must be >= 0";
    return os.str();
}

ScanReport estimate_constant(const EstimateSpec& spec) {
    ScanReport rep;
    rep.kind = "estimate:" + to_string(spec.id);
    rep.seed = spec.seed;
    const std::string violation = spec.hypothesis_violation();
    if (!violation.empty()) {
        if (spec.enforce_hypothesis) throw std::invalid_argument(violation);
        rep.flags.push_back("hypothesis violated: " + violation);
    }
    const int d = spec.d;
    const SpectralGrid g = spec.id == EstimateId::omega_scaling ? matched_grid(d, spec.t, spec.points)
                                                          : SpectralGrid(d, spec.box, spec.points);
    const InteractionKernel k{d, spec.a, spec.gamma};
    const Exponent p = std::isinf(spec.p) ? Exponent::infinity() : Exponent(spec.p);
    const Exponent two(2.0);
    auto L = [&](const Field& f, Exponent e) { return lp_norm(g, f, e); };
    auto Lcap = [&](const Field& f) { return std::max(L(f, p), L(f, two)); };
    auto H = [&](const Field& f) { return hat_lp_norm(g, f, p); };
    auto Hcap = [&](const Field& f) { return std::max(H(f), L(f, two)); };

    std::map<std::string, std::vector<double>> ratios;
    for (int i = 0; i < spec.samples; ++i) {
        auto rng = sample_rng(spec.seed, static_cast<std::uint64_t>(i));
        const Field f1 = random_bandlimited(g, rng);
        const Field f2 = random_bandlimited(g, rng);
        const Field f3 = random_bandlimited(g, rng);
        auto hat = [&](ProfilePart part) { return hat_trilinear(g, {k, spec.t, part}, f1, f2, f3); };
        switch (spec.id) {
            case EstimateId::le1: {
                const Field h1 = hat(ProfilePart::inner), h2 = hat(ProfilePart::outer), h = hat(ProfilePart::full);
                ratios["h1_l2"].push_back(L(h1, two) / (L(f1, two) * L(f2, two) * L(f3, two)));
                ratios["h2_l2"].push_back(L(h2, two) / (L(f1, p) * L(f2, p) * L(f3, two)));
                ratios["h1_lp"].push_back(L(h1, p) / (L(f1, two) * L(f2, two) * L(f3, p)));
                ratios["h2_lp"].push_back(L(h2, p) / (L(f1, p) * L(f2, p) * L(f3, p)));
                ratios["full_cap"].push_back(Lcap(h) / (Lcap(f1) * Lcap(f2) * Lcap(f3)));
                break;
            }
            case EstimateId::le2: {
                const Field h = hat(ProfilePart::full);
                ratios["full_lp"].push_back(L(h, p) / (L(f1, two) * L(f2, two) * Lcap(f3)));
                break;
            }
            case EstimateId::remark_le: {
                const Field h1 = hat(ProfilePart::inner);
                ratios["h1_lp"].push_back(L(h1, p) / (L(f1, two) * L(f2, two) * L(f3, p)));
                break;
            }
            case EstimateId::lhe1: {
                const Field h = hartree_trilinear(g, k, f1, f2, f3);
                ratios["hartree_hat"].push_back(H(h) / (L(f1, two) * L(f2, two) * Hcap(f3)));
                break;
            }
            case EstimateId::lhe2: {
                const Field h = hartree_trilinear(g, k, f1, f2, f3);
                if (k.screened())
                    ratios["hartree_hat"].push_back(H(h) / (H(f1) * H(f2) * H(f3)));
                else
                    ratios["hartree_hat_cap"].push_back(Hcap(h) / (Hcap(f1) * Hcap(f2) * Hcap(f3)));
                break;
            }
            case EstimateId::omega_scaling: {
                const Exponent r(spec.rho), r2(2.0 * spec.rho);
                const Field w = omega(g, spec.t, f1, f2);
                const double lhs = spectral_lp_norm(g, forward_ft(g, w), r);
                const double rhs = std::pow(std::abs(spec.t), d * (1.0 - 1.0 / spec.rho)) * L(f1, r2) * L(f2, r2);
                ratios["omega"].push_back(lhs / rhs);
                break;
            }
        }
    }
    for (auto& [name, v] : ratios) {
        std::vector<double> running(v.size());
        double m = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) running[i] = m = std::max(m, v[i]);
        rep.scalars["max:" + name] = m;
        rep.scalars["median:" + name] = median(v);
        rep.series["running_max:" + name] = std::move(running);
        rep.series["ratio:" + name] = std::move(v);
    }
    rep.scalars["p"] = spec.p;
    rep.scalars["gamma"] = spec.gamma;
    rep.scalars["a"] = spec.a;
    rep.scalars["samples"] = spec.samples;
    rep.notes["estimate"] = to_string(spec.id);
    return rep;
}

}  // namespace hfsim
