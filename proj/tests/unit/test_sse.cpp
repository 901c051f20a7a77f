#include <doctest.h>

#include <cmath>
#include <string>

#include "oracles.hpp"
#include "qcl/error.hpp"
#include "qcl/sse.hpp"
#include "qcl/stats.hpp"

using namespace qcl;

namespace {

GridSpec grid(std::size_t n, double dx, double hbar) {
    GridSpec g;
    g.n = n;
    g.dx = dx;
    g.hbar = hbar;
    return g;
}

}  // namespace

TEST_CASE("free gaussian spreads exactly") {
    const double m = 2.0, v_x = 0.1, c = -0.05, hbar = 1.0;
    const double v_p = (0.25 * hbar * hbar + c * c) / v_x;
    auto psi = make_gaussian_state(grid(512, 0.03, hbar), 0.0, 3.0, v_x, c);
    SseOptions opt;
    opt.sample_stride = 100;
    auto r = run_sse(psi, free_particle(m), ObserverSet{0.0, {}}, 1.0, 1e-3, 1, opt);
    REQUIRE(r.trajectory.size() == 11);
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        const double t = r.trajectory.t[i];
        const auto& s = r.trajectory.c[i];
        CHECK(s.x == doctest::Approx(3.0 * t / m).epsilon(1e-10));
        CHECK(s.p == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(s.v_x == doctest::Approx(v_x + 2 * c * t / m + v_p * t * t / (m * m)).epsilon(1e-9));
        CHECK(s.c_xp == doctest::Approx(c + v_p * t / m).epsilon(1e-9).scale(1.0));
        CHECK(s.v_p == doctest::Approx(v_p).epsilon(1e-9));
    }
    CHECK(r.invariants.max_norm_error < 1e-12);
}

TEST_CASE("harmonic moments follow the linear moment equations") {
    const double m = 1.0, w = 2.0, hbar = 0.5;
    auto psi = make_gaussian_state(grid(256, 0.04, hbar), 1.0, 0.0, 0.05, 0.02);
    auto c0 = compute_moments(psi);
    SseOptions opt;
    opt.sample_stride = 1000;
    const double t = 2.0;
    auto r = run_sse(psi, harmonic(m, w), ObserverSet{0.0, {}}, t, 1e-3, 1, opt);
    auto y = rk4<5>({c0.x, c0.p, c0.v_x, c0.c_xp, c0.v_p}, 0.0, t, 20000,
                    [&](double, const std::array<double, 5>& s) {
                        return std::array<double, 5>{s[1] / m, -m * w * w * s[0], 2 * s[3] / m,
                                                     s[4] / m - m * w * w * s[2], -2 * m * w * w * s[3]};
                    });
    const auto& e = r.trajectory.c.back();
    CHECK(e.x == doctest::Approx(y[0]).epsilon(1e-5));
    CHECK(e.p == doctest::Approx(y[1]).epsilon(1e-5));
    CHECK(e.v_x == doctest::Approx(y[2]).epsilon(1e-5));
    CHECK(e.c_xp == doctest::Approx(y[3]).epsilon(1e-5).scale(0.05));
    CHECK(e.v_p == doctest::Approx(y[4]).epsilon(1e-5));
}

TEST_CASE("cosine kick on a gaussian") {
    const double kappa = 3.0, x0 = 0.7, v = 0.04, hbar = 0.1;
    auto psi = make_gaussian_state(grid(1024, 0.01, hbar), x0, 0.2, v);
    const double v_p0 = 0.25 * hbar * hbar / v;
    auto r = run_sse(psi, kicked_rotor({1.0, kappa, 1.0}), ObserverSet{0.0, {}}, 1e-3, 1e-3, 1);
    const auto& e = r.trajectory.c.back();
    const double sin_mean = std::exp(-v / 2) * std::sin(x0);
    const double sin_var = 0.5 * (1 - std::exp(-2 * v) * std::cos(2 * x0)) - sin_mean * sin_mean;
    CHECK(e.p == doctest::Approx(0.2 + kappa * sin_mean).epsilon(1e-10));
    CHECK(e.v_p == doctest::Approx(v_p0 + kappa * kappa * sin_var).epsilon(1e-7));
}

TEST_CASE("conditioned covariance obeys the Riccati equation") {
    const double m = 1.0, k = 2.0, hbar = 1.0, dt = 1e-4, t = 1.0;
    auto psi = make_gaussian_state(grid(256, 0.05, hbar), 0.0, 0.0, 0.5, 0.0);
    SseOptions opt;
    opt.sample_stride = 1000;
    auto r = run_sse(psi, free_particle(m), ObserverSet{k, {1.0}}, t, dt, 11, opt);
    auto ref = riccati(t, 0.5, 0.0, 0.125 * hbar * hbar / 0.25, m, 0.0, 8 * k, hbar * hbar * k);
    const auto& e = r.trajectory.c.back();
    CHECK(e.v_x == doctest::Approx(ref[0]).epsilon(2e-3));
    CHECK(e.c_xp == doctest::Approx(ref[1]).epsilon(2e-3));
    CHECK(e.v_p == doctest::Approx(ref[2]).epsilon(2e-3));
    // pure states stay at minimum uncertainty
    CHECK(r.invariants.min_uncertainty_ratio == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("record increments carry the mean and independent noise") {
    const double k = 50.0, dt = 1e-4;
    auto psi = make_gaussian_state(grid(256, 0.02, 1.0), 0.3, 0.0, 0.01);
    SseOptions opt;
    opt.sample_stride = 1000;
    ObserverSet obs{k, {0.5, 0.3}};
    auto r = run_sse(psi, harmonic(1.0, 1.0), obs, 2.0, dt, 3, opt);
    REQUIRE(r.records.size() == 2);
    const std::size_t n = r.mean_x.size();
    REQUIRE(r.records[0].size() == n);
    std::vector<double> w0(n), w1(n);
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w0[i] = (r.records[0].increments[i] - r.mean_x[i] * dt) * std::sqrt(8 * 0.5 * k / dt);
        w1[i] = (r.records[1].increments[i] - r.mean_x[i] * dt) * std::sqrt(8 * 0.3 * k / dt);
        cross += w0[i] * w1[i];
    }
    CHECK(std::abs(mean(w0)) < 4.0 / std::sqrt(double(n)));
    CHECK(variance(w0) == doctest::Approx(1.0).epsilon(4 * std::sqrt(2.0 / double(n))));
    CHECK(variance(w1) == doctest::Approx(1.0).epsilon(4 * std::sqrt(2.0 / double(n))));
    CHECK(std::abs(cross / double(n)) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("run and single steps agree and are deterministic") {
    auto psi = make_gaussian_state(grid(256, 0.02, 1.0), -0.2, 1.0, 0.01, 0.001);
    auto model = duffing({});
    ObserverSet obs{20.0, {0.6, 0.2}};
    const double dt = 1e-4;
    SseOptions opt;
    opt.sample_stride = 1;
    auto a = run_sse(psi, model, obs, 20 * dt, dt, 9, opt);
    auto b = run_sse(psi, model, obs, 20 * dt, dt, 9, opt);
    CHECK(a.trajectory.c.back().x == b.trajectory.c.back().x);
    CHECK(a.records[1].increments == b.records[1].increments);

    NoiseStream noise(9, 0);
    GridState s = psi;
    for (std::size_t i = 0; i < 20; ++i) {
        auto st = step_sse(s, model, obs, double(i) * dt, dt, noise, i);
        CHECK(st.increments[0] == doctest::Approx(a.records[0].increments[i]).epsilon(1e-9));
        s = std::move(st.state);
        auto c = compute_moments(s);
        CHECK(c.x == doctest::Approx(a.trajectory.c[i + 1].x).epsilon(1e-10));
        CHECK(c.v_x == doctest::Approx(a.trajectory.c[i + 1].v_x).epsilon(1e-8));
    }
}

TEST_CASE("oversized steps are refused") {
    auto psi = make_gaussian_state(grid(256, 0.02, 1.0), 0.0, 0.0, 0.01);
    CHECK_THROWS_AS(ObserverSet({1.0, {0.7, 0.5}}).validate(), ConfigError);
    try {
        run_sse(psi, free_particle(1.0), ObserverSet{1e9, {1.0}}, 1.0, 0.1, 1);
        FAIL("expected a failure");
    } catch (const SimulationError& e) {
        CHECK(std::string(e.what()).find("time step too large") != std::string::npos);
        CHECK(e.time().has_value());
    }
}

TEST_CASE("coarsened records sum increments") {
    MeasurementRecord r{0.1, {1, 2, 3, 4, 5, 6}, 0};
    auto c = r.coarsened(3);
    CHECK(c.dt == doctest::Approx(0.3));
    CHECK(c.increments == std::vector<double>{6, 15});
    CHECK_THROWS_AS(r.coarsened(4), ConfigError);
}
