#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

#include "hfsim/illposedness.hpp"
#include "hfsim/norms.hpp"
#include "hfsim/propagator.hpp"

using namespace hfsim;

TEST_CASE("bump profile") {
    CHECK(bump_profile(0.0, 2.0) == 1.0);
    CHECK(bump_profile(2.0, 2.0) == 0.0);
    CHECK(bump_profile(2.5, 2.0) == 0.0);
    CHECK(bump_profile(1.0, 2.0) == doctest::Approx(std::exp(1.0 - 1.0 / 0.75)));
    double prev = 1.0;
    for (int i = 1; i < 100; ++i) {
        const double v = bump_profile(0.02 * i, 2.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("bump pair is ordered and touches at the origin") {
    SpectralGrid g(1, 16.0, 256);
    const BumpPair bp = bump_pair(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        CHECK(bp.lower[n].real() <= bp.upper[n].real());
        CHECK(bp.lower[n].imag() == 0.0);
    }
    CHECK(bp.lower[g.size() / 2].real() == bp.upper[g.size() / 2].real());
}

TEST_CASE("Gauss-Legendre rule is exact to degree 2n - 1") {
    const auto [x, w] = gauss_legendre(5, 2.0);
    double s9 = 0.0, s10 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s9 += w[i] * std::pow(x[i], 9);
        s10 += w[i] * std::pow(x[i], 10);
    }
    CHECK(s9 == doctest::Approx(std::pow(2.0, 10) / 10.0).epsilon(1e-14));
    CHECK(std::abs(s10 - std::pow(2.0, 11) / 11.0) > 1e-6);
}

TEST_CASE("second iterate vanishes without coupling") {
    SpectralGrid g(1, 32.0, 512);
    const BumpPair bp = bump_pair(g);
    ModelParams p;
    p.kappa = 0.0;
    const SecondIterate it = second_iterate(p, g, std::vector<Field>{bp.lower, bp.upper}, 0.05);
    for (const auto& v : it.value[0]) CHECK(v == cplx(0.0));
    CHECK_THROWS(second_iterate(p, g, std::vector<Field>{bp.lower, bp.upper}, 0.05, 8));
}

TEST_CASE("second iterate leaves along g(0)") {
    SpectralGrid g(1, 64.0, 2048);
    const BumpPair bp = bump_pair(g);
    ModelParams p;
    const std::vector<Field> psi0{bp.lower, bp.upper};
    const Field g0 = g_zero(p, g, bp.lower, bp.upper);
    const double t = 1e-3;
    const SecondIterate it = second_iterate(p, g, psi0, t);
    CHECK(it.resolved());
    Field d = it.value[0];
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = d[n] / t - g0[n];
    CHECK(l2_norm(g, d) < 0.05 * l2_norm(g, g0));
}

TEST_CASE("g(0) equals -i times the first particle's nonlinearity") {
    SpectralGrid g(1, 32.0, 512);
    const BumpPair bp = bump_pair(g);
    ModelParams p;
    p.kappa = -1.5;
    const Field g0 = g_zero(p, g, bp.lower, bp.upper);
    const Ensemble n = nonlinearity(p, g, std::vector<Field>{bp.lower, bp.upper});
    double err = 0.0;
    for (std::size_t i = 0; i < g0.size(); ++i) err = std::max(err, std::abs(g0[i] + cplx(0.0, 1.0) * n[0][i]));
    CHECK(err < 1e-14);
}

TEST_CASE("Taylor remainder over t^2 settles") {
    SpectralGrid g(1, 64.0, 2048);
    const BumpPair bp = bump_pair(g);
    ModelParams p;
    const double ts[] = {0.02, 0.01, 0.005, 0.0025};
    const ScanReport r = taylor_remainder(p, g, std::vector<Field>{bp.lower, bp.upper}, ts, Exponent::infinity());
    const auto& q = r.series.at("halving_ratio");
    REQUIRE(q.size() == 3);
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] < q[i - 1]);
    CHECK(r.scalars.at("max_halving_ratio") < 2.0);
}

TEST_CASE("scaling family preserves the L^p-hat norm for finite p") {
    // Gaussian members: the transform has no zeros, so the Riemann sum of |F|^{p'} converges fast.
    SpectralGrid g(1, 128.0, 4096);
    CHECK(bump_family(1, 4.0, {1.0}).lambda == doctest::Approx(0.25));
    ScalingFamily fam;
    fam.first = [](const std::array<double, 3>& x) { return cplx(std::exp(-x[0] * x[0])); };
    fam.second = [](const std::array<double, 3>& x) { return cplx(std::exp(-(x[0] - 1) * (x[0] - 1))); };
    fam.lambda = 0.25;
    fam.scales = {1.0, 0.5, 0.25};
    const double base = hat_lp_norm(g, fam.sample_at(g, 1.0)[0], Exponent(4.0));
    for (double h : {0.5, 0.25}) CHECK(hat_lp_norm(g, fam.sample_at(g, h)[0], Exponent(4.0)) == doctest::Approx(base).epsilon(1e-8));
}

TEST_CASE("kernel transform homogeneity separates Coulomb from Yukawa") {
    CHECK(homogeneity_check(0.5, 1, 0.0, 0.25).scalars.at("max_deviation") < 1e-12);
    CHECK(homogeneity_check(0.5, 1, 1.0, 0.25).scalars.at("max_deviation") > 0.1);
}

TEST_CASE("log-log fit recovers a power law") {
    const std::vector<double> x{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.7));
    const auto [slope, resid] = loglog_fit(x, y);
    CHECK(slope == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(resid < 1e-12);
}

TEST_CASE("growth scan on a reduced ladder") {
    GrowthScanSpec spec;
    spec.box = 256.0;
    spec.points = 8192;
    const ScanReport r = growth_scan(spec, bump_family(1, INFINITY, {0.5, 0.25, 0.125}));
    CHECK(r.scalars.at("slope:coulomb") == doctest::Approx(-0.5).epsilon(0.2));
    CHECK(r.scalars.at("slope:yukawa") >= -0.1);
    CHECK(r.scalars.at("expected_slope") == doctest::Approx(-0.5));
    CHECK(r.flags.empty());
}

TEST_CASE("growth scan rejects exponents outside the cone") {
    GrowthScanSpec spec;
    spec.box = 64.0;
    spec.points = 1024;
    spec.model.gamma = 0.5;
    spec.p = 3.0;  // 2d(1/2 - 1/p) = 1/3 < gamma
    CHECK_THROWS(growth_scan(spec, bump_family(1, 3.0, {0.5, 0.25})));
}

TEST_CASE("counterexample root and moments") {
    const double gamma = 0.5, a = 0.1;
    // G by direct evaluation.
    CHECK(counterexample_g(gamma, 1.0) == doctest::Approx(std::pow(4.0, 1.5) - 2.0 * std::pow(3.0, 1.5) + std::pow(2.0, 1.5)));
    const double b = counterexample_solve(gamma, a);
    CHECK(std::abs(counterexample_g(gamma, b) - std::pow(a, 1.5)) < 1e-12);
    const CounterexampleMoments m = counterexample_moments(gamma, a, b);
    CHECK(std::abs(m.full) < 1e-10);
    CHECK(std::abs(m.inner - 2.0 * std::pow(a, 1.5) / 0.75) < 1e-10);
    CHECK(m.inner > 0.0);
}

TEST_CASE("counterexample moments against adaptive quadrature") {
    const double gamma = 0.5, a = 0.1;
    const double b = counterexample_solve(gamma, a);
    auto f = [&](double x) { return x <= 0.0 ? 0.0 : std::pow(x, gamma - 1.0) * h_ab_profile(a, b, x); };
    boost::math::quadrature::tanh_sinh<double> singular;
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double near = singular.integrate(f, 0.0, a);
    const double valley = gk::integrate(f, 2.0, 2.0 + b, 15, 1e-14) + gk::integrate(f, 2.0 + b, 2.0 + 2.0 * b, 15, 1e-14);
    const CounterexampleMoments m = counterexample_moments(gamma, a, b);
    CHECK(m.inner == doctest::Approx(2.0 * near).epsilon(1e-12));
    CHECK(std::abs(m.full - 2.0 * (near + valley)) < 1e-10);
}

TEST_CASE("counterexample moment changes sign across the root") {
    const double gamma = 0.5, a = 0.1;
    const double b = counterexample_solve(gamma, a);
    CHECK(counterexample_moments(gamma, a, 0.9 * b).full * counterexample_moments(gamma, a, 1.1 * b).full < 0.0);
}

TEST_CASE("counterexample profile") {
    const double a = 0.1, b = 0.25;
    CHECK(h_ab_profile(a, b, 0.0) == a);
    CHECK(h_ab_profile(a, b, -0.05) == doctest::Approx(0.05));
    CHECK(h_ab_profile(a, b, 1.0) == 0.0);
    CHECK(h_ab_profile(a, b, 2.0 + b) == doctest::Approx(-b));
    CHECK(h_ab_profile(a, b, 3.0) == 0.0);
}
