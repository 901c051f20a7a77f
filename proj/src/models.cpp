#include "qcl/models.hpp"

#include <algorithm>
#include <cmath>

#include "qcl/error.hpp"

namespace qcl {

SystemModel::SystemModel(double mass, Coefficients potential, double drive_amplitude,
                         double drive_frequency, std::optional<CosineKick> kick)
    : mass_(mass), coeffs_(potential), lambda_(drive_amplitude), omega_(drive_frequency),
      kick_(kick) {
    if (!(mass_ > 0.0)) throw ConfigError("mass must be positive");
    if (kick_ && !(kick_->period > 0.0)) throw ConfigError("kick period must be positive");
}

double SystemModel::potential(double x, double t) const {
    double v = 0.0;
    for (std::size_t n = kMaxDegree + 1; n-- > 0;) v = v * x + coeffs_[n];
    return v + lambda_ * x * std::cos(omega_ * t);
}

double SystemModel::force(double x, double t) const {
    double dv = 0.0;
    for (std::size_t n = kMaxDegree; n >= 1; --n) dv = dv * x + double(n) * coeffs_[n];
    return -dv - lambda_ * std::cos(omega_ * t);
}

double SystemModel::d_force(double x, double) const {
    double d2v = 0.0;
    for (std::size_t n = kMaxDegree; n >= 2; --n) d2v = d2v * x + double(n * (n - 1)) * coeffs_[n];
    return -d2v;
}

double SystemModel::d2_force(double x, double) const {
    double d3v = 0.0;
    for (std::size_t n = kMaxDegree; n >= 3; --n)
        d3v = d3v * x + double(n * (n - 1) * (n - 2)) * coeffs_[n];
    return -d3v;
}

SystemModel::Coefficients SystemModel::taylor(double x, double t) const {
    // Repeated synthetic division gives the shifted polynomial's coefficients.
    Coefficients c = coeffs_;
    for (std::size_t k = 0; k <= kMaxDegree; ++k)
        for (std::size_t n = kMaxDegree; n > k; --n) c[n - 1] += x * c[n];
    const double drive = lambda_ * std::cos(omega_ * t);
    c[0] += drive * x;
    c[1] += drive;
    return c;
}

bool SystemModel::force_free() const {
    if (lambda_ != 0.0) return false;
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double c) { return c == 0.0; });
}

std::optional<long> SystemModel::kick_at(double t, double dt) const {
    if (!kick_) return std::nullopt;
    const double T = kick_->period;
    const double n = std::ceil((t - 0.5 * dt) / T);
    if (n * T < t + 0.5 * dt) return static_cast<long>(n);
    return std::nullopt;
}

double SystemModel::kick_impulse(double x) const { return kick_ ? kick_->kappa * std::sin(x) : 0.0; }

SystemModel duffing(const DuffingParams& params) {
    if (!(params.b > 0.0)) throw ConfigError("Duffing quartic coefficient must be positive");
    SystemModel::Coefficients c{};
    c[2] = -params.a;
    c[4] = params.b;
    return SystemModel(params.m, c, params.lambda, params.omega);
}

SystemModel kicked_rotor(const KickedRotorParams& params) {
    if (!(params.kick_period > 0.0)) throw ConfigError("kick period must be positive");
    return SystemModel(params.m, {}, 0.0, 0.0, CosineKick{params.kappa, params.kick_period});
}

SystemModel harmonic(double m, double omega) {
    SystemModel::Coefficients c{};
    c[2] = 0.5 * m * omega * omega;
    return SystemModel(m, c);
}

SystemModel free_particle(double m) { return SystemModel(m, {}); }

SystemModel polynomial(double m, const std::vector<double>& coefficients) {
    if (coefficients.size() > SystemModel::kMaxDegree + 1)
        throw ConfigError("polynomial degree too high");
    SystemModel::Coefficients c{};
    std::copy(coefficients.begin(), coefficients.end(), c.begin());
    return SystemModel(m, c);
}

PhasePoint classical_step(const SystemModel& model, PhasePoint s, double dt) {
    if (model.kick_at(s.t, dt)) s.p += model.kick_impulse(s.x);
    const double m = model.mass();
    if (model.force_free()) {
        s.x += s.p * dt / m;
    } else {
        s.p += 0.5 * dt * model.force(s.x, s.t);
        s.x += s.p * dt / m;
        s.p += 0.5 * dt * model.force(s.x, s.t + dt);
    }
    s.t += dt;
    return s;
}

std::vector<PhasePoint> classical_trajectory(const SystemModel& model, double x0, double p0,
                                             double t_final, double dt, std::size_t stride) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (stride == 0) stride = 1;
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    std::vector<PhasePoint> out;
    out.reserve(steps / stride + 2);
    PhasePoint s{0.0, x0, p0};
    out.push_back(s);
    for (std::size_t i = 1; i <= steps; ++i) {
        s = classical_step(model, s, dt);
        s.t = double(i) * dt;
        if (!std::isfinite(s.x) || !std::isfinite(s.p)) throw SimulationError("trajectory diverged", s.t);
        if (i % stride == 0 || i == steps) out.push_back(s);
    }
    return out;
}

TypicalPoint typical_point(const SystemModel& model, const std::vector<PhasePoint>& trajectory,
                           double relative_floor) {
    struct Sample {
        double f, df, d2f, p;
    };
    std::vector<Sample> samples;
    if (model.kick()) {
        const auto& k = *model.kick();
        const double dt = trajectory.size() > 1 ? trajectory[1].t - trajectory[0].t : k.period;
        // the final sample is never followed by its kick
        for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
            const auto& s = trajectory[i];
            if (!model.kick_at(s.t, dt)) continue;
            double sn = std::sin(s.x), cs = std::cos(s.x);
            samples.push_back({std::abs(k.kappa * sn) / k.period, std::abs(k.kappa * cs) / k.period,
                               std::abs(k.kappa * sn) / k.period, std::abs(s.p)});
        }
    } else {
        for (const auto& s : trajectory)
            samples.push_back({std::abs(model.force(s.x, s.t)), std::abs(model.d_force(s.x, s.t)),
                               std::abs(model.d2_force(s.x, s.t)), std::abs(s.p)});
    }
    double fmax = 0.0;
    for (const auto& s : samples) fmax = std::max(fmax, s.f);
    TypicalPoint tp;
    for (const auto& s : samples) {
        if (fmax > 0.0 && s.f < relative_floor * fmax) continue;
        tp.force += s.f;
        tp.d_force += s.df;
        tp.d2_force += s.d2f;
        tp.momentum += s.p;
        ++tp.samples;
    }
    if (tp.samples > 0) {
        const double inv = 1.0 / double(tp.samples);
        tp.force *= inv;
        tp.d_force *= inv;
        tp.d2_force *= inv;
        tp.momentum *= inv;
    }
    return tp;
}

}  // namespace qcl
