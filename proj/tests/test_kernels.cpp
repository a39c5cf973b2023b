#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "hfsim/kernels.hpp"

using namespace hfsim;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// F|x|^{-gamma} at |xi| = 1 through |x|^{-gamma} = Gamma(gamma/2)^{-1} int s^{gamma/2-1} exp(-s|x|^2) ds
// and F exp(-s|x|^2)(xi) = (pi/s)^{d/2} exp(-pi^2 |xi|^2 / s), integrated in u = 1/s.
double subordinated_riesz(int d, double gamma) {
    auto f = [&](double u) { return std::pow(pi, 0.5 * d) * std::pow(u, 0.5 * (d - gamma) - 1.0) * std::exp(-pi * pi * u); };
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    return (head.integrate(f, 0.0, 1.0) + tail.integrate(f, 1.0, inf)) / std::tgamma(0.5 * gamma);
}

// F[exp(-a|x|)|x|^{-gamma}](xi) in d = 1: 2 Gamma(1-gamma) Re (a + 2 pi i xi)^{gamma-1}.
double yukawa_1d(double a, double gamma, double xi) {
    return 2.0 * std::tgamma(1.0 - gamma) * std::pow(std::complex<double>(a, 2.0 * pi * xi), gamma - 1.0).real();
}

}  // namespace

TEST_CASE("Riesz constant agrees with Gaussian subordination") {
    for (int d : {1, 2, 3})
        for (double gamma : {0.2, 0.5, 0.9}) {
            if (gamma >= d) continue;
            CHECK(riesz_constant(d, gamma) == doctest::Approx(subordinated_riesz(d, gamma)).epsilon(1e-10));
        }
    CHECK(riesz_constant(3, 2.5) == doctest::Approx(subordinated_riesz(3, 2.5)).epsilon(1e-10));
}

TEST_CASE("Riesz constant rejects exponents outside (0, d)") {
    CHECK_THROWS_AS(riesz_constant(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(riesz_constant(2, 0.0), std::invalid_argument);
}

TEST_CASE("Poisson constants") {
    CHECK(poisson_constant(1) == doctest::Approx(1.0 / pi));
    CHECK(poisson_constant(2) == doctest::Approx(0.5 / pi));
    CHECK(poisson_constant(3) == doctest::Approx(1.0 / (pi * pi)));
}

TEST_CASE("transform of exp(-a|x|) in one and three dimensions") {
    for (double a : {0.5, 2.0})
        for (double xi : {0.0, 0.3, 1.7}) {
            CHECK(exp_ft_profile(1, a, xi) == doctest::Approx(2.0 * a / (a * a + 4.0 * pi * pi * xi * xi)));
            const double den = a * a + 4.0 * pi * pi * xi * xi;
            CHECK(exp_ft_profile(3, a, xi) == doctest::Approx(8.0 * pi * a / (den * den)));
        }
}

TEST_CASE("screened kernel transform matches the one-dimensional closed form") {
    for (double gamma : {0.3, 0.5, 0.8})
        for (double xi : {0.05, 0.4, 2.0}) {
            const InteractionKernel k{1, 1.0, gamma};
            CHECK(kernel_ft(k, xi) == doctest::Approx(yukawa_1d(1.0, gamma, xi)).epsilon(1e-8));
        }
}

TEST_CASE("Coulomb transform is homogeneous") {
    const InteractionKernel k{2, 0.0, 0.7};
    CHECK(kernel_ft(k, 3.0) == doctest::Approx(std::pow(3.0, 0.7 - 2.0) * kernel_ft(k, 1.0)));
}

TEST_CASE("S profile is a point mass at a = 0") {
    CHECK(std::holds_alternative<DeltaMass>(s_profile(1, 0.0, 1.0, 0.2)));
    CHECK(std::get<double>(s_profile(1, 1.0, 0.5, 0.0)) == doctest::Approx(0.5));
}

TEST_CASE("S profile L1 norm against the arctangent antiderivative") {
    // d = 1: int a t / (4 a^2 t^2 + xi^2) = pi / 2; d = 2: 2 pi a t / (2 a t) = pi.
    for (double a : {0.5, 1.0, 2.0})
        for (double t : {0.1, 1.0, 10.0}) {
            CHECK(s_profile_l1(1, a, t) == doctest::Approx(pi / 2).epsilon(1e-12));
            CHECK(s_profile_l1(2, a, t) == doctest::Approx(pi).epsilon(1e-12));
        }
    CHECK(s_profile_l1(1, 0.0, 1.0) == 1.0);
}

TEST_CASE("origin cell average of |x|^beta") {
    CHECK(origin_cell_average(1, -0.5, 0.2) == doctest::Approx(std::pow(0.1, -0.5) / 0.5));
    // 2D: polar integration over the eight triangles 0 <= theta <= pi/4 of the square.
    const double beta = -0.6, h = 0.4;
    boost::math::quadrature::tanh_sinh<double> q;
    auto radial = [&](double theta) { return std::pow(0.5 * h / std::cos(theta), beta + 2.0) / (beta + 2.0); };
    const double oracle = 8.0 * q.integrate(radial, 0.0, pi / 4) / (h * h);
    CHECK(origin_cell_average(2, beta, h) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("kernel split partitions the homogeneous profile") {
    const double x1[] = {0.6};
    const double x2[] = {1.4};
    const KernelSplit a = kernel_split(1, 0.4, x1);
    const KernelSplit b = kernel_split(1, 0.4, x2);
    CHECK(a.inner == doctest::Approx(std::pow(0.6, -0.6)));
    CHECK(a.outer == 0.0);
    CHECK(b.inner == 0.0);
    CHECK(b.outer == doctest::Approx(std::pow(1.4, -0.6)));
    const double origin[] = {0.0};
    const KernelSplit o = kernel_split(1, 0.4, origin, 0.1);
    CHECK(o.origin_cell);
    CHECK(o.inner == doctest::Approx(origin_cell_average(1, -0.6, 0.1)));
}

TEST_CASE("Coulomb multiplier samples C |xi|^{gamma - d}") {
    SpectralGrid g(1, 16.0, 64);
    const RealField m = coulomb_multiplier(g, 0.5);
    const double C = riesz_constant(1, 0.5);
    CHECK(m[3] == doctest::Approx(C * std::pow(3.0 / 16.0, -0.5)));
    CHECK(m[0] == doctest::Approx(C * origin_cell_average(1, -0.5, 1.0 / 16.0)));
}

TEST_CASE("Yukawa multiplier matches the closed form on the lattice") {
    SpectralGrid g(1, 8.0, 32);
    const RealField m = yukawa_multiplier(g, 1.0, 0.5);
    for (int k : {1, 2, 5, 16, 31}) CHECK(m[k] == doctest::Approx(yukawa_1d(1.0, 0.5, std::abs(g.freq(k)))).epsilon(1e-8));
    CHECK(m[0] == doctest::Approx(yukawa_1d(1.0, 0.5, 0.0)).epsilon(1e-8));
}

TEST_CASE("hat profile pieces add up") {
    SpectralGrid g(1, 16.0, 128);
    for (double a : {0.0, 1.0}) {
        const InteractionKernel k{1, a, 0.4};
        const RealField full = hat_profile(g, k, 0.5, ProfilePart::full);
        const RealField in = hat_profile(g, k, 0.5, ProfilePart::inner);
        const RealField out = hat_profile(g, k, 0.5, ProfilePart::outer);
        double err = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, std::abs(full[n] - in[n] - out[n]) / std::abs(full[n]));
        CHECK(err < 1e-8);
    }
}

TEST_CASE("Poisson-Riesz convolution reduces to the kernel as eps -> 0") {
    // For small eps the Poisson kernel integrates to c_d^{-1} times a point mass.
    const double v = poisson_riesz_convolution(1, 0.5, 1e-4, 2.0, 0.0, inf) * poisson_constant(1);
    CHECK(v == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-3));
}
