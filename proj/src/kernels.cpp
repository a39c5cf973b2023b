#include "hfsim/kernels.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace hfsim {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double quad_tol = 1e-14;
constexpr double accept_tol = 1e-10;

void require_gamma(int d, double gamma) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (!(gamma > 0.0 && gamma < d)) {
        std::ostringstream os;
        os << "gamma=" << gamma << " violates 0<gamma<d for d=" << d;
        throw std::invalid_argument(os.str());
    }
}

void check_quadrature(double value, double err, double l1, const char* what) {
    const double scale = std::max(std::abs(value), l1);
    if (!std::isfinite(value) || err > accept_tol * scale + 1e-300) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (estimate " << value << ", error " << err << ")";
        throw std::runtime_error(os.str());
    }
}

// Spherical integral of P_eps(|x + s w|) over the unit sphere, |x| = r.
double sphere_average(int d, double eps, double r, double s) {
    const double e2 = eps * eps;
    auto poisson = [&](double q2) { return eps / std::pow(e2 + q2, 0.5 * (d + 1)); };
    if (d == 1) {
        const double dm = r - s, dp = r + s;
        return poisson(dm * dm) + poisson(dp * dp);
    }
    if (d == 3) {
        const double dm = r - s, dp = r + s;
        return 4.0 * pi * eps / ((e2 + dm * dm) * (e2 + dp * dp));
    }
    if (r == 0.0 || s == 0.0) return 2.0 * pi * poisson(r * r + s * s);
    const double dm = r - s;
    auto f = [&](double theta) {
        const double c = std::cos(0.5 * theta);
        return poisson(dm * dm + 4.0 * r * s * c * c);
    };
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, pi, 20, quad_tol, &err, &l1);
    check_quadrature(v, err, l1, "angular average");
    return 2.0 * v;
}

double radial_piece(int d, double gamma, double eps, double r, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    auto f = [&](double s) {
        if (s <= 0.0) return 0.0;
        return std::pow(s, gamma - 1.0) * sphere_average(d, eps, r, s);
    };
    // Two-argument form: boost passes the endpoint distance and tolerates
    // abscissae that round onto the endpoint.
    auto f2 = [&](double s, double) { return f(s); };
    double err = 0.0, l1 = 0.0, v = 0.0;
    if (std::isinf(hi)) {
        boost::math::quadrature::exp_sinh<double> q;
        if (lo == 0.0) {
            // Split off the endpoint singularity for the half-line.
            boost::math::quadrature::tanh_sinh<double> ts;
            double e1 = 0.0, m1 = 0.0;
            const double cut = std::max(1.0, eps);
            const double a = ts.integrate(f2, 0.0, cut, quad_tol, &e1, &m1);
            const double b = q.integrate([&](double s) { return f(s + cut); }, quad_tol, &err, &l1);
            check_quadrature(a, e1, m1, "radial convolution");
            check_quadrature(b, err, l1, "radial convolution");
            return a + b;
        }
        v = q.integrate([&](double s) { return f(s + lo); }, quad_tol, &err, &l1);
    } else {
        boost::math::quadrature::tanh_sinh<double> ts;
        v = ts.integrate(f2, lo, hi, quad_tol, &err, &l1);
    }
    check_quadrature(v, err, l1, "radial convolution");
    return v;
}

struct ProfileKey {
    int d;
    double L;
    int M;
    double eps;
    double gamma;
    auto tie() const { return std::tie(d, L, M, eps, gamma); }
    bool operator<(const ProfileKey& o) const { return tie() < o.tie(); }
};

struct ProfileSet {
    RealField full, inner, outer;
};

struct KernelCache {
    std::mutex mu;
    std::map<ProfileKey, std::shared_ptr<const RealField>> yukawa;
    std::map<ProfileKey, std::shared_ptr<const ProfileSet>> hat;
};

KernelCache& cache() {
    static KernelCache c;
    return c;
}

}  // namespace

void InteractionKernel::validate() const {
    require_gamma(d, gamma);
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("screening a must be >= 0");
}

double riesz_constant(int d, double gamma) {
    require_gamma(d, gamma);
    return std::pow(pi, gamma - 0.5 * d) * std::tgamma(0.5 * (d - gamma)) / std::tgamma(0.5 * gamma);
}

double poisson_constant(int d) { return std::tgamma(0.5 * (d + 1)) / std::pow(pi, 0.5 * (d + 1)); }

double exp_ft_profile(int d, double a, double xi) {
    if (!(a > 0.0)) throw std::invalid_argument("exp_ft_profile requires a > 0");
    return std::pow(2.0 * pi, d) * poisson_constant(d) * a / std::pow(a * a + 4.0 * pi * pi * xi * xi, 0.5 * (d + 1));
}

SProfileValue s_profile(int d, double a, double t, double xi) {
    if (a < 0.0) throw std::invalid_argument("s_profile requires a >= 0");
    if (a == 0.0) return DeltaMass{};
    const double at = a * std::abs(t);
    return at / std::pow(4.0 * at * at + xi * xi, 0.5 * (d + 1));
}

double s_profile_l1(int d, double a, double t) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (a < 0.0) throw std::invalid_argument("s_profile requires a >= 0");
    if (a == 0.0) return 1.0;
    if (t == 0.0) throw std::invalid_argument("s_profile_l1 needs t != 0");
    const double sphere = 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
    auto f = [&](double r) { return sphere * std::pow(r, d - 1) * std::get<double>(s_profile(d, a, t, r)); };
    double err = 0.0, l1 = 0.0;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double v = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), quad_tol, &err, &l1);
    check_quadrature(v, err, l1, "S profile L1 norm");
    return v;
}

double origin_cell_average(int d, double beta, double h) {
    if (!(beta > -d)) throw std::invalid_argument("cell average needs beta > -d");
    const double scale = std::pow(0.5 * h, beta);
    if (d == 1) return scale / (beta + 1.0);
    using boost::math::quadrature::gauss_kronrod;
    if (d == 2) {
        auto f = [&](double u) { return std::pow(1.0 + u * u, 0.5 * beta); };
        const double I = gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 10, quad_tol);
        return scale * 2.0 / (beta + 2.0) * I;
    }
    auto outer = [&](double u) {
        auto inner = [&](double w) { return std::pow(1.0 + u * u + w * w, 0.5 * beta); };
        return gauss_kronrod<double, 31>::integrate(inner, 0.0, u, 10, quad_tol);
    };
    const double I = gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, 10, quad_tol);
    return scale * 6.0 / (beta + 3.0) * I;
}

KernelSplit kernel_split(int d, double gamma, std::span<const double> x, double cell) {
    require_gamma(d, gamma);
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("point dimension mismatch");
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    KernelSplit out;
    if (r2 == 0.0) {
        if (!(cell > 0.0)) throw std::invalid_argument("kernel_split at the origin needs a cell size");
        out.inner = origin_cell_average(d, gamma - d, cell);
        out.origin_cell = true;
        return out;
    }
    const double r = std::sqrt(r2);
    const double v = std::pow(r, gamma - d);
    if (r <= 1.0) out.inner = v; else out.outer = v;
    return out;
}

double poisson_riesz_convolution(int d, double gamma, double eps, double r, double lo, double hi) {
    require_gamma(d, gamma);
    if (!(eps > 0.0)) throw std::invalid_argument("Poisson width must be positive");
    if (lo < 0.0 || hi < lo) throw std::invalid_argument("invalid radial range");
    double total = 0.0;
    if (r > lo && r < hi) {
        total += radial_piece(d, gamma, eps, r, lo, r);
        total += radial_piece(d, gamma, eps, r, r, hi);
    } else {
        total += radial_piece(d, gamma, eps, r, lo, hi);
    }
    return total;
}

RealField coulomb_multiplier(const SpectralGrid& g, double gamma) {
    const int d = g.dim();
    const double C = riesz_constant(d, gamma);
    RealField m(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double r2 = g.xi_norm2(n);
        m[n] = r2 == 0.0 ? C * origin_cell_average(d, gamma - d, g.dxi()) : C * std::pow(r2, 0.5 * (gamma - d));
    }
    return m;
}

RealField yukawa_multiplier(const SpectralGrid& g, double a, double gamma) {
    const int d = g.dim();
    require_gamma(d, gamma);
    if (!(a > 0.0)) throw std::invalid_argument("yukawa_multiplier requires a > 0");
    ProfileKey key{d, g.length(), g.points_per_axis(), a, gamma};
    {
        std::lock_guard lock(cache().mu);
        auto it = cache().yukawa.find(key);
        if (it != cache().yukawa.end()) return *it->second;
    }
    // h_a = c_d P_eps with eps = a / (2 pi).
    const double eps = a / (2.0 * pi);
    const double pref = riesz_constant(d, gamma) * poisson_constant(d);
    std::map<double, double> by_radius;
    RealField m(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double r2 = g.xi_norm2(n);
        auto it = by_radius.find(r2);
        if (it == by_radius.end()) {
            const double v = pref * poisson_riesz_convolution(d, gamma, eps, std::sqrt(r2), 0.0, INFINITY);
            it = by_radius.emplace(r2, v).first;
        }
        m[n] = it->second;
    }
    auto shared = std::make_shared<const RealField>(m);
    std::lock_guard lock(cache().mu);
    cache().yukawa.emplace(key, shared);
    return m;
}

double kernel_ft(const InteractionKernel& k, double xi) {
    k.validate();
    if (!(xi > 0.0)) throw std::invalid_argument("kernel_ft needs |xi| > 0");
    const double C = riesz_constant(k.d, k.gamma);
    if (!k.screened()) return C * std::pow(xi, k.gamma - k.d);
    return C * poisson_constant(k.d) * poisson_riesz_convolution(k.d, k.gamma, k.a / (2.0 * pi), xi, 0.0, INFINITY);
}

RealField kernel_multiplier(const SpectralGrid& g, const InteractionKernel& k) {
    k.validate();
    if (k.d != g.dim()) throw std::invalid_argument("kernel dimension differs from grid dimension");
    return k.screened() ? yukawa_multiplier(g, k.a, k.gamma) : coulomb_multiplier(g, k.gamma);
}

RealField hat_profile(const SpectralGrid& g, const InteractionKernel& k, double t, ProfilePart part) {
    k.validate();
    const int d = g.dim();
    if (k.d != d) throw std::invalid_argument("kernel dimension differs from grid dimension");
    RealField out(g.size(), 0.0);
    if (!k.screened()) {
        const double beta = k.gamma - d;
        const double origin = origin_cell_average(d, beta, g.dx());
        for (std::size_t n = 0; n < g.size(); ++n) {
            const double r2 = g.x_norm2(n);
            const double v = r2 == 0.0 ? origin : std::pow(r2, 0.5 * beta);
            const bool inner = r2 <= 1.0;
            if (part == ProfilePart::full || (part == ProfilePart::inner) == inner) out[n] = v;
        }
        return out;
    }
    if (t == 0.0) throw std::invalid_argument("screened hat profile requires t != 0");
    const double eps = 2.0 * k.a * std::abs(t);
    ProfileKey key{d, g.length(), g.points_per_axis(), eps, k.gamma};
    std::shared_ptr<const ProfileSet> set;
    {
        std::lock_guard lock(cache().mu);
        auto it = cache().hat.find(key);
        if (it != cache().hat.end()) set = it->second;
    }
    if (!set) {
        auto fresh = std::make_shared<ProfileSet>();
        fresh->full.resize(g.size());
        fresh->inner.resize(g.size());
        fresh->outer.resize(g.size());
        std::map<double, std::pair<double, double>> by_radius;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const double r2 = g.x_norm2(n);
            auto it = by_radius.find(r2);
            if (it == by_radius.end()) {
                const double r = std::sqrt(r2);
                // S_{a,t} = P_eps / 2.
                const double in = 0.5 * poisson_riesz_convolution(d, k.gamma, eps, r, 0.0, 1.0);
                const double ou = 0.5 * poisson_riesz_convolution(d, k.gamma, eps, r, 1.0, INFINITY);
                it = by_radius.emplace(r2, std::make_pair(in, ou)).first;
            }
            fresh->inner[n] = it->second.first;
            fresh->outer[n] = it->second.second;
            fresh->full[n] = it->second.first + it->second.second;
        }
        std::lock_guard lock(cache().mu);
        set = cache().hat.emplace(key, fresh).first->second;
    }
    switch (part) {
        case ProfilePart::full: return set->full;
        case ProfilePart::inner: return set->inner;
        case ProfilePart::outer: return set->outer;
    }
    return out;
}

void clear_kernel_caches() {
    std::lock_guard lock(cache().mu);
    cache().yukawa.clear();
    cache().hat.clear();
}

}  // namespace hfsim
