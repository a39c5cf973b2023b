#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hfsim/grid.hpp"

using namespace hfsim;

namespace {

constexpr double pi = std::numbers::pi;

double r2(const std::array<double, 3>& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

}  // namespace

TEST_CASE("lattice coordinates and FFT ordering") {
    SpectralGrid g(1, 8.0, 8);
    CHECK(g.dx() == doctest::Approx(1.0));
    CHECK(g.coord(0) == doctest::Approx(-4.0));
    CHECK(g.coord(7) == doctest::Approx(3.0));
    CHECK(g.freq(1) == doctest::Approx(0.125));
    CHECK(g.freq(7) == doctest::Approx(-0.125));
    CHECK(g.signed_index(4) == -4);
    CHECK(g.storage_index(-1) == 7);
    CHECK(g.nyquist() == doctest::Approx(0.5));
    CHECK(g.reflect_index(0) == 0);
    CHECK(g.reflect_index(1) == 7);
    CHECK(g.reflect_index(4) == 4);
    CHECK(g.reflect_freq_index(3) == 5);
}

TEST_CASE("ravel and unravel are inverse in 2D") {
    SpectralGrid g(2, 4.0, 8);
    for (std::size_t n = 0; n < g.size(); ++n) CHECK(g.ravel(g.unravel(n)) == n);
}

TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS(SpectralGrid(0, 1.0, 8));
    CHECK_THROWS(SpectralGrid(1, -1.0, 8));
    CHECK_THROWS(SpectralGrid(1, 1.0, 7));
}

TEST_CASE("the Gaussian exp(-pi x^2) is its own transform") {
    for (int d : {1, 2}) {
        SpectralGrid g(d, 12.0, 128);
        const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-pi * r2(x))); });
        const Field F = forward_ft(g, f);
        double err = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n)
            err = std::max(err, std::abs(F[n] - std::exp(-pi * g.xi_norm2(n))));
        CHECK(err < 1e-12);
    }
}

TEST_CASE("shifted Gaussian picks up the modulation phase") {
    SpectralGrid g(1, 32.0, 512);
    const double c = 1.5;
    const Field f = sample(g, [&](const auto& x) { return cplx(std::exp(-pi * (x[0] - c) * (x[0] - c))); });
    const Field F = forward_ft(g, f);
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double xi = g.freq(static_cast<int>(n));
        err = std::max(err, std::abs(F[n] - std::exp(-pi * xi * xi) * std::polar(1.0, -2.0 * pi * c * xi)));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("inverse transform undoes the forward transform") {
    SpectralGrid g(1, 20.0, 128);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-x[0] * x[0]), x[0] * std::exp(-x[0] * x[0])); });
    CHECK(max_abs_diff(inverse_ft(g, forward_ft(g, f)), f) < 1e-14);
}

TEST_CASE("convolution of Gaussians matches the closed form") {
    SpectralGrid g(1, 32.0, 512);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-pi * x[0] * x[0])); });
    const Field c = convolve(g, f, f);
    const Field expect = sample(g, [](const auto& x) { return cplx(std::exp(-0.5 * pi * x[0] * x[0]) / std::sqrt(2.0)); });
    CHECK(max_abs_diff(c, expect) < 1e-12);
}

TEST_CASE("real multiplier of one is the identity") {
    SpectralGrid g(1, 10.0, 64);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-x[0] * x[0])); });
    const RealField one(g.size(), 1.0);
    CHECK(max_abs_diff(apply_multiplier(g, one, f), f) < 1e-14);
}

TEST_CASE("scaled transform samples the continuum transform") {
    SpectralGrid g(1, 16.0, 128);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-pi * x[0] * x[0])); });
    const double sigma = 0.37;
    const Field F = scaled_transform(g, f, sigma);
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double xi = sigma * g.coord(static_cast<int>(n));
        err = std::max(err, std::abs(F[n] - std::exp(-pi * xi * xi)));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("band-limited dilation of a Gaussian") {
    SpectralGrid g(1, 32.0, 256);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-x[0] * x[0])); });
    const double s = 0.7;
    const Field d = dilate_bandlimited(g, f, s);
    const Field expect = sample(g, [&](const auto& x) { return cplx(std::exp(-s * s * x[0] * x[0])); });
    CHECK(max_abs_diff(d, expect) < 1e-10);
}

TEST_CASE("decay check separates resolved and unresolved data") {
    SpectralGrid g(1, 32.0, 256);
    const Field gauss = sample(g, [](const auto& x) { return cplx(std::exp(-x[0] * x[0])); });
    CHECK(decay_check(g, gauss).ok(1e-9));
    const Field wide = sample(g, [](const auto& x) { return cplx(std::exp(-0.001 * x[0] * x[0])); });
    CHECK_FALSE(decay_check(g, wide).ok(1e-9));
    const Field sharp = sample(g, [](const auto& x) { return cplx(std::abs(x[0]) < 1.0 ? 1.0 : 0.0); });
    CHECK_FALSE(decay_check(g, sharp).ok(1e-9));
}

TEST_CASE("support radius of a Gaussian") {
    SpectralGrid g(1, 40.0, 512);
    const Field f = sample(g, [](const auto& x) { return cplx(std::exp(-x[0] * x[0])); });
    // exp(-r^2) = 1e-6 at r = sqrt(6 ln 10)
    CHECK(support_radius(g, f, 1e-6) == doctest::Approx(std::sqrt(6.0 * std::log(10.0))).epsilon(0.03));
}

TEST_CASE("shape mismatch is reported") {
    SpectralGrid g(1, 8.0, 16);
    Field f(8);
    CHECK_THROWS_AS(forward_ft(g, f), std::invalid_argument);
}
