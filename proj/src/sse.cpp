#include "qcl/sse.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "qcl/error.hpp"

namespace qcl {

double ObserverSet::total_eta() const { return std::accumulate(etas.begin(), etas.end(), 0.0); }

void ObserverSet::validate() const {
    if (!(k >= 0.0)) throw ConfigError("measurement strength must be non-negative");
    for (double e : etas)
        if (!(e > 0.0)) throw ConfigError("observer efficiencies must be positive");
    if (total_eta() > 1.0 + 1e-12) throw ConfigError("observer efficiencies must sum to at most 1");
}

MeasurementRecord MeasurementRecord::coarsened(std::size_t factor) const {
    if (factor == 0 || increments.size() % factor != 0)
        throw ConfigError("record length is not a multiple of the coarsening factor");
    MeasurementRecord out{dt * double(factor), {}, observer_index};
    out.increments.reserve(increments.size() / factor);
    for (std::size_t i = 0; i < increments.size(); i += factor) {
        double s = 0.0;
        for (std::size_t j = 0; j < factor; ++j) s += increments[i + j];
        out.increments.push_back(s);
    }
    return out;
}

std::size_t step_count(double t_final, double dt) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (t_final < 0.0) throw ConfigError("final time must be non-negative");
    return static_cast<std::size_t>(std::llround(t_final / dt));
}

namespace {

// Pure-state split-operator stepper with lazily applied kinetic evolution.
class PureStepper {
public:
    PureStepper(const GridState& s, const SystemModel& model, const ObserverSet& observers,
                double recenter_bins)
        : grid_(s.grid()), frame_(s.frame()), amps_(s.amplitudes().begin(), s.amplitudes().end()),
          model_(model), k_(observers.k), recenter_bins_(recenter_bins) {
        for (double e : observers.etas) etas_.push_back(e);
        const double rest = 1.0 - observers.total_eta();
        if (k_ > 0.0 && rest > 1e-12) etas_.push_back(rest);
        xi_.resize(grid_.n);
        q_.resize(grid_.n);
        for (std::size_t j = 0; j < grid_.n; ++j) {
            xi_[j] = grid_.coordinate(j);
            q_[j] = grid_.momentum(j);
        }
        mean_xi_ = position_mean();
    }

    std::size_t channels() const { return etas_.size(); }

    void kinetic(double tau) { pending_ += tau; }

    // Apply any pending free flight, recentering the frame if the means drifted.
    void flush() {
        if (pending_ == 0.0) return;
        const double tau = pending_;
        pending_ = 0.0;
        fft_forward(amps_);
        double w = 0.0, wq = 0.0;
        for (std::size_t k = 0; k < grid_.n; ++k) {
            double a = std::norm(amps_[k]);
            w += a;
            wq += a * q_[k];
        }
        const double mean_q = wq / w;
        const auto& phase = kinetic_phase(tau);
        for (std::size_t k = 0; k < grid_.n; ++k) amps_[k] *= phase[k];
        frame_.x += frame_.p * tau / model_.mass();
        mean_xi_ += mean_q * tau / model_.mass();

        const bool drift = std::abs(mean_xi_) > recenter_bins_ * grid_.dx ||
                           std::abs(mean_q) > recenter_bins_ * grid_.dq();
        if (drift) {
            const double a = mean_xi_;
            for (std::size_t k = 0; k < grid_.n; ++k) amps_[k] *= std::polar(1.0, q_[k] * a / grid_.hbar);
            fft_inverse(amps_);
            for (std::size_t j = 0; j < grid_.n; ++j)
                amps_[j] *= std::polar(1.0, -mean_q * xi_[j] / grid_.hbar);
            frame_.x += a;
            frame_.p += mean_q;
            mean_xi_ = 0.0;
            ++recenters_;
        } else {
            fft_inverse(amps_);
        }
    }

    void kick() {
        flush();
        const auto& kick = *model_.kick();
        const double xc = frame_.x;
        const double c = std::cos(xc), s = std::sin(xc);
        const double scale = kick.kappa / grid_.hbar;
        frame_.p += kick.kappa * s;
        for (std::size_t j = 0; j < grid_.n; ++j) {
            const double xi = xi_[j];
            const double h = std::sin(0.5 * xi);
            const double rem = -2.0 * c * h * h - s * (std::sin(xi) - xi);
            amps_[j] *= std::polar(1.0, -scale * rem);
        }
    }

    // Potential over tau evaluated at t_mid followed by the measurement. Returns the
    // record increments of all channels (including any unrecorded remainder).
    std::vector<double> potential_and_measure(double t_mid, double tau, const double* dw, double t_now) {
        flush();
        const bool has_force = !model_.force_free();
        SystemModel::Coefficients c{};
        if (has_force) {
            c = model_.taylor(frame_.x, t_mid);
            frame_.p -= c[1] * tau;
        }

        std::vector<double> dr(etas_.size());
        double lin = 0.0, quad = 0.0;
        const double xbar_rel = position_mean();
        const double xbar = frame_.x + xbar_rel;
        last_mean_x_ = xbar;
        if (k_ > 0.0) {
            double total = 0.0;
            for (std::size_t i = 0; i < etas_.size(); ++i) {
                dr[i] = xbar * tau + dw[i] / std::sqrt(8.0 * etas_[i] * k_);
                lin += 4.0 * etas_[i] * k_ * dr[i];
                total += etas_[i];
            }
            // exponent relative to its value at the mean: u = xi - xbar_rel
            const double a2 = (1.0 + total) * k_ * tau;
            // one step must not squeeze the state below the grid spacing
            if (4.0 * a2 * grid_.dx * grid_.dx > 1.0)
                throw SimulationError("time step too large for measurement strength", t_now);
            quad = -a2;
            lin += -2.0 * a2 * xbar;
        }

        if (!has_force && k_ == 0.0) return dr;
        const double phase_scale = tau / grid_.hbar;
        double norm = 0.0, first = 0.0;
        for (std::size_t j = 0; j < grid_.n; ++j) {
            const double xi = xi_[j];
            double rem = 0.0;
            if (has_force) {
                for (std::size_t m = SystemModel::kMaxDegree; m >= 2; --m) rem = (rem + c[m]) * xi;
                rem *= xi;
            }
            double mag = 1.0;
            if (k_ > 0.0) {
                const double u = xi - xbar_rel;
                mag = std::exp(u * (lin + quad * u));
            }
            amps_[j] *= std::polar(mag, -phase_scale * rem);
            const double a = std::norm(amps_[j]);
            norm += a;
            first += a * xi;
        }
        norm *= grid_.dx;
        if (!(norm > 1e-12) || !std::isfinite(norm))
            throw SimulationError("time step too large for measurement strength", t_now);
        const double scale = 1.0 / std::sqrt(norm);
        for (auto& a : amps_) a *= scale;
        mean_xi_ = first * grid_.dx / norm;
        return dr;
    }

    double position_mean() const {
        double w = 0.0, wx = 0.0;
        for (std::size_t j = 0; j < grid_.n; ++j) {
            double a = std::norm(amps_[j]);
            w += a;
            wx += a * xi_[j];
        }
        return wx / w;
    }

    double norm_error() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::abs(s * grid_.dx - 1.0);
    }

    GridState state() const { return GridState(grid_, frame_, amps_); }
    double last_mean_x() const { return last_mean_x_; }
    std::size_t recenters() const { return recenters_; }

private:
    // Rewritten per distinct tau; a run uses at most three distinct values.
    const std::vector<cplx>& kinetic_phase(double tau) {
        auto it = phase_cache_.find(tau);
        if (it != phase_cache_.end()) return it->second;
        std::vector<cplx> ph(grid_.n);
        const double f = tau / (2.0 * model_.mass() * grid_.hbar);
        for (std::size_t k = 0; k < grid_.n; ++k) ph[k] = std::polar(1.0, -f * q_[k] * q_[k]);
        if (phase_cache_.size() > 8) phase_cache_.clear();
        return phase_cache_.emplace(tau, std::move(ph)).first->second;
    }

    GridSpec grid_;
    Frame frame_;
    ComplexVector amps_;
    const SystemModel& model_;
    double k_;
    double recenter_bins_;
    std::vector<double> etas_;
    std::vector<double> xi_, q_;
    std::map<double, std::vector<cplx>> phase_cache_;
    double pending_ = 0.0;
    double mean_xi_ = 0.0;
    double last_mean_x_ = 0.0;
    std::size_t recenters_ = 0;
};

std::vector<double> draw(const NoiseStream& noise, std::uint64_t step, std::size_t channels,
                         double dt) {
    std::vector<double> dw(channels);
    const double s = std::sqrt(dt);
    for (std::size_t i = 0; i < channels; ++i) dw[i] = s * noise.normal(step, std::uint32_t(i));
    return dw;
}

}  // namespace

SseStep step_sse(const GridState& state, const SystemModel& model, const ObserverSet& observers,
                 double t, double dt, const NoiseStream& noise, std::uint64_t step_index) {
    observers.validate();
    PureStepper stepper(state, model, observers, 4.0);
    if (model.kick_at(t, dt)) stepper.kick();
    stepper.kinetic(0.5 * dt);
    auto dw = draw(noise, step_index, stepper.channels(), dt);
    auto dr = stepper.potential_and_measure(t + 0.5 * dt, dt, dw.data(), t);
    stepper.kinetic(0.5 * dt);
    stepper.flush();
    dr.resize(observers.etas.size());
    return {stepper.state(), std::move(dr)};
}

SseResult run_sse(GridState initial, const SystemModel& model, const ObserverSet& observers,
                  double t_final, double dt, std::uint64_t seed, const SseOptions& options) {
    observers.validate();
    const std::size_t steps = step_count(t_final, dt);
    const std::size_t stride = options.sample_stride == 0 ? 1 : options.sample_stride;
    const double hbar = initial.hbar();
    NoiseStream noise(seed, options.trajectory);
    PureStepper stepper(initial, model, observers, options.recenter_bins);

    SseResult result{{}, {}, {}, {}, initial};
    const std::size_t n_obs = observers.etas.size();
    for (std::size_t i = 0; i < n_obs; ++i) {
        result.records.push_back({dt, {}, i});
        result.records.back().increments.reserve(steps);
    }
    result.mean_x.reserve(steps);

    auto sample = [&](double t) {
        GridState s = stepper.state();
        Cumulants c = compute_moments(s, options.spill_threshold);
        auto& inv = result.invariants;
        ++inv.checks;
        inv.max_spill = std::max(inv.max_spill, spill(s).worst());
        inv.max_norm_error = std::max(inv.max_norm_error, stepper.norm_error());
        inv.note_uncertainty(c, hbar);
        result.trajectory.push(t, c);
    };

    sample(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = double(i) * dt;
        try {
            if (model.kick_at(t, dt)) stepper.kick();
            stepper.kinetic(0.5 * dt);
            auto dw = draw(noise, i, stepper.channels(), dt);
            auto dr = stepper.potential_and_measure(t + 0.5 * dt, dt, dw.data(), t);
            result.mean_x.push_back(stepper.last_mean_x());
            for (std::size_t o = 0; o < n_obs; ++o) result.records[o].increments.push_back(dr[o]);
            stepper.kinetic(0.5 * dt);
            if ((i + 1) % stride == 0 || i + 1 == steps) {
                stepper.flush();
                sample(double(i + 1) * dt);
            }
        } catch (const SimulationError& e) {
            throw SimulationError(e.what(), e.time().value_or(t));
        }
    }
    stepper.flush();
    result.invariants.recenters = stepper.recenters();
    result.final_state = stepper.state();
    return result;
}

}  // namespace qcl
