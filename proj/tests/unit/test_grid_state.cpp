#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "qcl/error.hpp"
#include "qcl/grid_state.hpp"

using namespace qcl;

namespace {

GridSpec grid(std::size_t n, double dx, double hbar) {
    GridSpec g;
    g.n = n;
    g.dx = dx;
    g.hbar = hbar;
    return g;
}

// Moments by direct O(n^2) DFT, independent of the FFT library.
struct DirectMoments {
    double x, p, v_x, v_p, c_xp, k_xxx, k_xxp, k_xpp, k_ppp;
};

DirectMoments direct_moments(const GridState& s) {
    const auto& g = s.grid();
    const std::size_t n = g.n;
    auto a = s.amplitudes();
    std::vector<cplx> f(n), qf(n), qqf(n);
    std::vector<double> q(n);
    for (std::size_t k = 0; k < n; ++k) {
        long kk = long(k) < long(n / 2) ? long(k) : long(k) - long(n);
        q[k] = 2.0 * std::numbers::pi * g.hbar * double(kk) / (double(n) * g.dx);
        cplx sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += a[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j) / double(n));
        f[k] = sum;
    }
    // Q phi and Q^2 phi back in position space
    std::vector<cplx> q1(n), q2(n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx s1 = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            cplx e = std::polar(1.0, 2.0 * std::numbers::pi * double(k * j) / double(n));
            s1 += q[k] * f[k] * e;
            s2 += q[k] * q[k] * f[k] * e;
        }
        q1[j] = s1 / double(n);
        q2[j] = s2 / double(n);
    }
    double w = 0, mx = 0, mxx = 0, mxxx = 0, mp = 0, mpp = 0, mppp = 0, mxp = 0, mxxp = 0, mxpp = 0, wq = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double xi = g.coordinate(j);
        const double r = std::norm(a[j]);
        w += r;
        mx += xi * r;
        mxx += xi * xi * r;
        mxxx += xi * xi * xi * r;
        mxp += xi * std::real(std::conj(a[j]) * q1[j]);
        mxxp += xi * xi * std::real(std::conj(a[j]) * q1[j]);
        mxpp += xi * std::real(std::conj(a[j]) * q2[j]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::norm(f[k]);
        wq += r;
        mp += q[k] * r;
        mpp += q[k] * q[k] * r;
        mppp += q[k] * q[k] * q[k] * r;
    }
    mx /= w; mxx /= w; mxxx /= w; mxp /= w; mxxp /= w; mxpp /= w;
    mp /= wq; mpp /= wq; mppp /= wq;
    DirectMoments d;
    d.x = s.frame().x + mx;
    d.p = s.frame().p + mp;
    d.v_x = mxx - mx * mx;
    d.v_p = mpp - mp * mp;
    d.c_xp = mxp - mx * mp;
    d.k_xxx = mxxx - 3 * mx * mxx + 2 * mx * mx * mx;
    d.k_ppp = mppp - 3 * mp * mpp + 2 * mp * mp * mp;
    d.k_xxp = mxxp - 2 * mx * mxp - mp * mxx + 2 * mx * mx * mp;
    d.k_xpp = mxpp - 2 * mp * mxp - mx * mpp + 2 * mp * mp * mx;
    return d;
}

GridState skewed_state(const GridSpec& g) {
    ComplexVector a(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
        const double xi = g.coordinate(j);
        a[j] = (1.0 + 0.6 * xi + 0.2 * xi * xi) * std::exp(cplx(-0.5 * (xi - 0.3) * (xi - 0.3), 0.15 * xi * xi * xi + 0.4 * xi));
    }
    return normalized(GridState(g, Frame{1.5, -0.7}, std::move(a)));
}

}  // namespace

TEST_CASE("gaussian state has the requested cumulants") {
    const auto g = grid(256, 0.05, 0.7);
    const double v_x = 0.3, c = 0.12;
    auto s = make_gaussian_state(g, 1.0, 2.0, v_x, c);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.momentum_norm() == doctest::Approx(1.0).epsilon(1e-13));
    auto m = compute_moments(s);
    CHECK(m.x == doctest::Approx(1.0));
    CHECK(m.p == doctest::Approx(2.0));
    CHECK(m.v_x == doctest::Approx(v_x).epsilon(1e-10));
    CHECK(m.c_xp == doctest::Approx(c).epsilon(1e-10));
    CHECK(m.v_p == doctest::Approx((0.25 * 0.49 + c * c) / v_x).epsilon(1e-10));
    CHECK(m.uncertainty_product() == doctest::Approx(0.25 * 0.49).epsilon(1e-10));
    CHECK(std::abs(m.k_xxx) < 1e-10);
    CHECK(std::abs(m.k_xxp) < 1e-10);
    CHECK(std::abs(m.k_xpp) < 1e-10);
    CHECK(std::abs(m.k_ppp) < 1e-10);
}

TEST_CASE("moments of a non-gaussian state match a direct transform") {
    const auto g = grid(128, 0.12, 1.0);
    auto s = skewed_state(g);
    auto d = direct_moments(s);
    auto m = compute_moments(s);
    CHECK(m.x == doctest::Approx(d.x).epsilon(1e-10));
    CHECK(m.p == doctest::Approx(d.p).epsilon(1e-10));
    CHECK(m.v_x == doctest::Approx(d.v_x).epsilon(1e-10));
    CHECK(m.v_p == doctest::Approx(d.v_p).epsilon(1e-10));
    CHECK(m.c_xp == doctest::Approx(d.c_xp).epsilon(1e-9));
    CHECK(m.k_xxx == doctest::Approx(d.k_xxx).epsilon(1e-9));
    CHECK(m.k_ppp == doctest::Approx(d.k_ppp).epsilon(1e-9));
    CHECK(m.k_xxp == doctest::Approx(d.k_xxp).epsilon(1e-9));
    CHECK(m.k_xpp == doctest::Approx(d.k_xpp).epsilon(1e-9));
    CHECK(std::abs(d.k_xxx) > 1e-3);

    // the density matrix route agrees with the pure-state route
    auto rho = density_from_pure(s);
    auto md = compute_moments(rho);
    CHECK(md.v_x == doctest::Approx(m.v_x).epsilon(1e-10));
    CHECK(md.v_p == doctest::Approx(m.v_p).epsilon(1e-10));
    CHECK(md.c_xp == doctest::Approx(m.c_xp).epsilon(1e-9));
    CHECK(md.k_xxp == doctest::Approx(m.k_xxp).epsilon(1e-9));
    CHECK(md.k_xpp == doctest::Approx(m.k_xpp).epsilon(1e-9));
    CHECK(md.k_ppp == doctest::Approx(m.k_ppp).epsilon(1e-9));
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.hermiticity_error() < 1e-14);
}

TEST_CASE("mixed gaussian density") {
    const auto g = grid(128, 0.08, 0.5);
    const double v_x = 0.2, v_p = 0.9, c = -0.1;
    auto rho = make_gaussian_density(g, -3.0, 4.0, v_x, v_p, c);
    auto m = compute_moments(rho);
    CHECK(m.x == doctest::Approx(-3.0));
    CHECK(m.p == doctest::Approx(4.0));
    CHECK(m.v_x == doctest::Approx(v_x).epsilon(1e-10));
    CHECK(m.v_p == doctest::Approx(v_p).epsilon(1e-10));
    CHECK(m.c_xp == doctest::Approx(c).epsilon(1e-10));
    // purity of a gaussian is hbar / (2 sqrt(det))
    CHECK(rho.purity() == doctest::Approx(0.5 / (2.0 * std::sqrt(v_x * v_p - c * c))).epsilon(1e-10));
    CHECK(rho.min_eigenvalue() > -1e-12);
    CHECK_THROWS_AS(make_gaussian_density(g, 0, 0, 0.1, 0.1, 0.0), ConfigError);
}

TEST_CASE("frame shifts and recentering preserve the state") {
    const auto g = grid(256, 0.08, 1.0);
    auto s = make_gaussian_state(g, 0.0, 0.0, 0.25, 0.05);
    // displace the packet inside the frame, then recenter
    ComplexVector a(s.amplitudes().begin(), s.amplitudes().end());
    for (std::size_t j = 0; j < g.n; ++j) {
        const double xi = g.coordinate(j);
        a[j] = std::exp(cplx(-(xi - 0.8) * (xi - 0.8), 0.5 * xi));
    }
    GridState off(g, Frame{2.0, 1.0}, std::move(a));
    auto before = compute_moments(off);
    auto centred = recenter(off);
    auto after = compute_moments(centred);
    CHECK(after.x == doctest::Approx(before.x).epsilon(1e-10));
    CHECK(after.p == doctest::Approx(before.p).epsilon(1e-10));
    CHECK(after.v_x == doctest::Approx(before.v_x).epsilon(1e-9));
    CHECK(after.v_p == doctest::Approx(before.v_p).epsilon(1e-9));
    CHECK(std::abs(centred.frame().x - before.x) < 1e-12);
    CHECK(std::abs(centred.frame().p - before.p) < 1e-12);

    auto shifted = shift_frame(off, Frame{2.3, 1.4});
    auto m = compute_moments(shifted);
    CHECK(m.x == doctest::Approx(before.x).epsilon(1e-10));
    CHECK(m.p == doctest::Approx(before.p).epsilon(1e-10));
    CHECK(m.c_xp == doctest::Approx(before.c_xp).epsilon(1e-9));

    auto rho = recenter(density_from_pure(off));
    auto mr = compute_moments(rho);
    CHECK(mr.x == doctest::Approx(before.x).epsilon(1e-10));
    CHECK(mr.v_p == doctest::Approx(before.v_p).epsilon(1e-9));
}

TEST_CASE("leaking states are rejected") {
    const auto g = grid(64, 0.1, 1.0);
    auto wide = make_gaussian_state(g, 0.0, 0.0, 1.0);
    CHECK(spill(wide).position > 1e-8);
    CHECK_THROWS_AS(compute_moments(wide), SimulationError);
    auto narrow = make_gaussian_state(g, 0.0, 0.0, 0.0025);
    CHECK(spill(narrow).momentum > 1e-8);
    CHECK_THROWS_AS(compute_moments(density_from_pure(narrow)), SimulationError);
}

TEST_CASE("grid validation and sizing") {
    CHECK_THROWS_AS(grid(100, 0.1, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(grid(64, -0.1, 1.0).validate(), ConfigError);
    auto g = size_grid(1e-3, 0.5, 1e-5, 20.0);
    // position span n dx covers 20 sigma_x, momentum span covers 20 sigma_p
    CHECK(double(g.n) * g.dx >= 20.0 * 1e-3 * (1 - 1e-12));
    CHECK(double(g.n) * g.dq() >= 20.0 * 0.5 * (1 - 1e-12));
    CHECK(std::has_single_bit(g.n));
    CHECK_THROWS_AS(size_grid(1.0, 1.0, 1e-5, 20.0, 64, 4096), ConfigError);
}
