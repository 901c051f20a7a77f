#include "qcl/gaussian.hpp"

#include <cmath>

#include "qcl/error.hpp"

namespace qcl {

Cumulants GaussianState::cumulants() const {
    Cumulants c;
    c.x = x;
    c.p = p;
    c.v_x = v_x;
    c.v_p = v_p;
    c.c_xp = c_xp;
    return c;
}

NoiseParams NoiseParams::quantum(double k, double eta, double hbar) {
    return {8.0 * eta * k, hbar * hbar * k};
}

void NoiseParams::validate() const {
    if (!(g_m >= 0.0) || !(g_p >= 0.0)) throw ConfigError("noise rates must be non-negative");
}

CovarianceRates covariance_drift(double v_x, double v_p, double c_xp, double d_force, double m,
                                 const NoiseParams& noise) {
    CovarianceRates r;
    r.v_x = 2.0 * c_xp / m - noise.g_m * v_x * v_x;
    r.v_p = 2.0 * noise.g_p - noise.g_m * c_xp * c_xp + 2.0 * d_force * c_xp;
    r.c_xp = v_p / m - noise.g_m * v_x * c_xp + d_force * v_x;
    return r;
}

namespace {

void free_flight(GaussianState& s, double m, double tau) {
    const double u = tau / m;
    s.x += s.p * u;
    s.v_x += 2.0 * s.c_xp * u + s.v_p * u * u;
    s.c_xp += s.v_p * u;
}

// Momentum impulse F(X) tau with F expanded to second order about the mean.
void impulse(GaussianState& s, double f, double df, double d2f, double tau) {
    s.p += (f + 0.5 * d2f * s.v_x) * tau;
    s.v_p += 2.0 * df * s.c_xp * tau + (df * df * s.v_x + 0.5 * d2f * d2f * s.v_x * s.v_x) * tau * tau;
    s.c_xp += df * s.v_x * tau;
}

}  // namespace

GaussianState step_gaussian(const GaussianState& state, const SystemModel& model,
                            const NoiseParams& noise, double dy, double t, double dt) {
    GaussianState s = state;
    const double m = model.mass();
    if (model.kick_at(t, dt)) {
        const double kappa = model.kick()->kappa;
        const double sn = std::sin(s.x), cs = std::cos(s.x);
        impulse(s, kappa * sn, kappa * cs, -kappa * sn, 1.0);
    }
    free_flight(s, m, 0.5 * dt);
    if (!model.force_free()) {
        const double tm = t + 0.5 * dt;
        impulse(s, model.force(s.x, tm), model.d_force(s.x, tm), model.d2_force(s.x, tm), dt);
    }
    s.v_p += 2.0 * noise.g_p * dt;
    if (noise.g_m > 0.0) {
        const double g = noise.g_m * dt;
        const double den = 1.0 + g * s.v_x;
        const double innovation = noise.g_m * dy - g * s.x;
        s.x += s.v_x * innovation / den;
        s.p += s.c_xp * innovation / den;
        s.v_p -= g * s.c_xp * s.c_xp / den;
        s.c_xp /= den;
        s.v_x /= den;
    }
    free_flight(s, m, 0.5 * dt);
    if (!s.positive_definite() || !std::isfinite(s.x) || !std::isfinite(s.p))
        throw SimulationError("estimator diverged", t + dt);
    return s;
}

CumulantSeries GaussianTrajectory::cumulants() const {
    CumulantSeries out;
    for (std::size_t i = 0; i < t.size(); ++i) out.push(t[i], states[i].cumulants());
    return out;
}

GaussianTrajectory run_gaussian(const GaussianState& initial, const SystemModel& model,
                                const NoiseParams& noise, const MeasurementRecord& record,
                                std::size_t sample_stride) {
    noise.validate();
    if (!initial.positive_definite()) throw ConfigError("initial covariance must be positive definite");
    if (sample_stride == 0) sample_stride = 1;
    GaussianTrajectory out;
    GaussianState s = initial;
    out.t.push_back(0.0);
    out.states.push_back(s);
    const std::size_t steps = record.size();
    for (std::size_t i = 0; i < steps; ++i) {
        s = step_gaussian(s, model, noise, record.increments[i], double(i) * record.dt, record.dt);
        if ((i + 1) % sample_stride == 0 || i + 1 == steps) {
            out.t.push_back(double(i + 1) * record.dt);
            out.states.push_back(s);
        }
    }
    return out;
}

std::vector<DecompositionResidual> ensemble_decomposition_check(
    const std::vector<CumulantSeries>& trajectories, const CumulantSeries& reference) {
    if (trajectories.size() < 2) throw ConfigError("ensemble check needs at least two trajectories");
    const std::size_t samples = reference.size();
    for (const auto& tr : trajectories) {
        if (tr.size() != samples) throw ConfigError("mismatched sampling grids");
        for (std::size_t i = 0; i < samples; ++i)
            if (std::abs(tr.t[i] - reference.t[i]) > 1e-9 * (1.0 + std::abs(reference.t[i])))
                throw ConfigError("mismatched sampling grids");
    }
    const double n = double(trajectories.size());
    std::vector<DecompositionResidual> out(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        double mx = 0.0, mp = 0.0;
        for (const auto& tr : trajectories) {
            mx += tr.c[i].x;
            mp += tr.c[i].p;
        }
        mx /= n;
        mp /= n;
        // per-trajectory contributions V + (x - mean)(x - mean) with the n/(n-1) correction
        const double bessel = n / (n - 1.0);
        double sxx = 0.0, sxp = 0.0, spp = 0.0, qxx = 0.0, qxp = 0.0, qpp = 0.0;
        for (const auto& tr : trajectories) {
            const auto& c = tr.c[i];
            const double dx = c.x - mx, dp = c.p - mp;
            const double a = c.v_x + bessel * dx * dx;
            const double b = c.c_xp + bessel * dx * dp;
            const double d = c.v_p + bessel * dp * dp;
            sxx += a;
            sxp += b;
            spp += d;
            qxx += a * a;
            qxp += b * b;
            qpp += d * d;
        }
        auto se = [n](double s, double q) {
            const double mean = s / n;
            return std::sqrt(std::max(0.0, (q / n - mean * mean) / (n - 1.0)));
        };
        const auto& ref = reference.c[i];
        out[i] = {reference.t[i],
                  ref.v_x - sxx / n,
                  ref.c_xp - sxp / n,
                  ref.v_p - spp / n,
                  se(sxx, qxx),
                  se(sxp, qxp),
                  se(spp, qpp)};
    }
    return out;
}

}  // namespace qcl
