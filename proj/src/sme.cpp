#include "qcl/sme.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Core>

#include "qcl/error.hpp"

namespace qcl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class DensityStepper {
public:
    DensityStepper(const DensityState& s, const SystemModel& model, double k, double eta,
                   double recenter_bins)
        : grid_(s.grid()), frame_(s.frame()), rho_(s.matrix().begin(), s.matrix().end()),
          model_(model), k_(k), eta_(eta), recenter_bins_(recenter_bins) {
        if (!(k_ >= 0.0)) throw ConfigError("measurement strength must be non-negative");
        if (eta_ < 0.0 || eta_ > 1.0) throw ConfigError("efficiency must lie in [0, 1]");
        const std::size_t n = grid_.n;
        xi_.resize(n);
        q_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            xi_[j] = grid_.coordinate(j);
            q_[j] = grid_.momentum(j);
        }
        double tr = 0.0, first = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            tr += rho_[j * n + j].real();
            first += xi_[j] * rho_[j * n + j].real();
        }
        mean_xi_ = first / tr;
    }

    void kinetic(double tau) { pending_ += tau; }

    void flush() {
        if (pending_ == 0.0) return;
        const double tau = pending_;
        pending_ = 0.0;
        const std::size_t n = grid_.n;
        fft2_forward(rho_, n);
        // momentum distribution sits on the anti-diagonal of the transformed matrix
        double w = 0.0, wq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double p = rho_[k * n + (n - k) % n].real();
            w += p;
            wq += p * q_[k];
        }
        const double mean_q = wq / w;
        const auto& ph = kinetic_phase(tau);
        frame_.x += frame_.p * tau / model_.mass();
        mean_xi_ += mean_q * tau / model_.mass();
        const bool drift = std::abs(mean_xi_) > recenter_bins_ * grid_.dx ||
                           std::abs(mean_q) > recenter_bins_ * grid_.dq();
        if (drift) {
            const double a = mean_xi_;
            std::vector<cplx> shift(n);
            for (std::size_t k = 0; k < n; ++k) shift[k] = ph[k] * std::polar(1.0, q_[k] * a / grid_.hbar);
            for (std::size_t k = 0; k < n; ++k) {
                cplx* row = rho_.data() + k * n;
                // conj(ph) for the second index: exp(-i tau (q_k^2 - q_l^2) / 2m hbar)
                for (std::size_t l = 0; l < n; ++l)
                    row[l] *= shift[k] * std::conj(ph[l]) * std::polar(1.0, q_[l] * a / grid_.hbar);
            }
            fft2_inverse(rho_, n);
            std::vector<cplx> boost(n);
            for (std::size_t j = 0; j < n; ++j) boost[j] = std::polar(1.0, -mean_q * xi_[j] / grid_.hbar);
            apply_outer(boost);
            frame_.x += a;
            frame_.p += mean_q;
            mean_xi_ = 0.0;
            ++recenters_;
        } else {
            for (std::size_t k = 0; k < n; ++k) {
                cplx* row = rho_.data() + k * n;
                const cplx pk = ph[k];
                for (std::size_t l = 0; l < n; ++l) row[l] *= pk * std::conj(ph[l]);
            }
            fft2_inverse(rho_, n);
        }
    }

    void kick() {
        flush();
        const auto& kick = *model_.kick();
        const double c = std::cos(frame_.x), s = std::sin(frame_.x);
        const double scale = kick.kappa / grid_.hbar;
        frame_.p += kick.kappa * s;
        std::vector<cplx> v(grid_.n);
        for (std::size_t j = 0; j < grid_.n; ++j) {
            const double xi = xi_[j];
            const double h = std::sin(0.5 * xi);
            v[j] = std::polar(1.0, -scale * (-2.0 * c * h * h - s * (std::sin(xi) - xi)));
        }
        apply_outer(v);
    }

    void potential_and_measure(double t_mid, double tau, double dr, double t_now) {
        flush();
        const std::size_t n = grid_.n;
        const bool has_force = !model_.force_free();
        SystemModel::Coefficients c{};
        if (has_force) {
            c = model_.taylor(frame_.x, t_mid);
            frame_.p -= c[1] * tau;
        }
        if (!has_force && k_ == 0.0) return;

        double lin = 0.0, quad = 0.0, xbar_rel = 0.0;
        if (k_ > 0.0 && eta_ > 0.0) {
            double tr = 0.0, first = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                tr += rho_[j * n + j].real();
                first += xi_[j] * rho_[j * n + j].real();
            }
            xbar_rel = first / tr;
            const double xbar = frame_.x + xbar_rel;
            const double a2 = 2.0 * eta_ * k_ * tau;
            if (4.0 * a2 * grid_.dx * grid_.dx > 1.0) throw SimulationError("step too large", t_now);
            quad = -a2;
            lin = 4.0 * eta_ * k_ * dr - 2.0 * a2 * xbar;
        }
        std::vector<cplx> a(n);
        const double phase_scale = tau / grid_.hbar;
        for (std::size_t j = 0; j < n; ++j) {
            const double xi = xi_[j];
            double rem = 0.0;
            if (has_force) {
                for (std::size_t m = SystemModel::kMaxDegree; m >= 2; --m) rem = (rem + c[m]) * xi;
                rem *= xi;
            }
            const double u = xi - xbar_rel;
            a[j] = std::polar(std::exp(u * (lin + quad * u)), -phase_scale * rem);
        }
        const double kd = k_ * (1.0 - eta_);
        if (kd > 0.0) {
            const auto& g = decoherence(kd * tau);
            for (std::size_t j = 0; j < n; ++j) {
                cplx* row = rho_.data() + j * n;
                const cplx aj = a[j];
                const double* gj = g.data() + (n - 1) - j;  // gj[l] = g(l - j)
                for (std::size_t l = 0; l < n; ++l) row[l] *= aj * std::conj(a[l]) * gj[l];
            }
        } else {
            apply_outer(a);
        }
        double tr = 0.0, first = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            tr += rho_[j * n + j].real();
            first += xi_[j] * rho_[j * n + j].real();
        }
        tr *= grid_.dx;
        if (!(tr > 1e-12) || !std::isfinite(tr)) throw SimulationError("step too large", t_now);
        const double inv = 1.0 / tr;
        for (auto& v : rho_) v *= inv;
        mean_xi_ = first * grid_.dx / tr;
    }

    // Restore exact Hermiticity, returning the asymmetry that was removed.
    double hermitize() {
        const std::size_t n = grid_.n;
        double worst = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            scale = std::max(scale, std::norm(rho_[j * n + j]));
            rho_[j * n + j] = rho_[j * n + j].real();
        }
        // tiles keep the transposed accesses in cache
        constexpr std::size_t B = 32;
        for (std::size_t jb = 0; jb < n; jb += B)
            for (std::size_t lb = jb; lb < n; lb += B)
                for (std::size_t j = jb; j < std::min(jb + B, n); ++j)
                    for (std::size_t l = std::max(lb, j + 1); l < std::min(lb + B, n); ++l) {
                        cplx& a = rho_[j * n + l];
                        cplx& b = rho_[l * n + j];
                        worst = std::max(worst, std::norm(a - std::conj(b)));
                        const cplx m = 0.5 * (a + std::conj(b));
                        a = m;
                        b = std::conj(m);
                    }
        // squared magnitudes above
        return scale > 0.0 ? std::sqrt(worst / scale) : std::sqrt(worst);
    }

    double trace_error() const {
        double tr = 0.0;
        for (std::size_t j = 0; j < grid_.n; ++j) tr += rho_[j * grid_.n + j].real();
        return std::abs(tr * grid_.dx - 1.0);
    }

    // Band-limited interpolation onto a grid with the same size and centre but spacing dx.
    void regrid(double dx) {
        flush();
        const std::size_t n = grid_.n;
        const auto ni = static_cast<Eigen::Index>(n);
        const double old_dx = grid_.dx;
        const double nd = double(n);
        Eigen::MatrixXcd t(ni, ni);
        for (std::size_t a = 0; a < n; ++a) {
            const double y = (double(a) - double(n / 2)) * dx;
            for (std::size_t j = 0; j < n; ++j) {
                // periodic sinc with the Nyquist term split evenly between +q and -q
                const double th = kTwoPi * (y - xi_[j]) / (nd * old_dx);
                const double sh = std::sin(0.5 * th);
                const double d = std::abs(sh) < 1e-12 ? 1.0 : std::sin(0.5 * nd * th) * std::cos(0.5 * th) / (nd * sh);
                t(Eigen::Index(a), Eigen::Index(j)) = d;
            }
        }
        using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<RowMajor> m(rho_.data(), ni, ni);
        RowMajor tmp = t * m;
        m.noalias() = tmp * t.transpose();
        grid_.dx = dx;
        for (std::size_t j = 0; j < n; ++j) {
            xi_[j] = grid_.coordinate(j);
            q_[j] = grid_.momentum(j);
        }
        phase_cache_.clear();
        decoherence_rate_ = -1.0;
        double tr = 0.0, first = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            tr += rho_[j * n + j].real();
            first += xi_[j] * rho_[j * n + j].real();
        }
        const double inv = 1.0 / (tr * dx);
        for (auto& v : rho_) v *= inv;
        mean_xi_ = first / tr;
        ++regrids_;
    }

    double dx() const { return grid_.dx; }
    std::size_t size() const { return grid_.n; }
    DensityAnalysis analyze(double spill_threshold) const {
        return qcl::analyze(grid_, frame_, rho_, spill_threshold);
    }
    std::size_t regrids() const { return regrids_; }
    DensityState state() const { return DensityState(grid_, frame_, rho_); }
    std::size_t recenters() const { return recenters_; }

private:
    void apply_outer(const std::vector<cplx>& v) {
        const std::size_t n = grid_.n;
        for (std::size_t j = 0; j < n; ++j) {
            cplx* row = rho_.data() + j * n;
            const cplx vj = v[j];
            for (std::size_t l = 0; l < n; ++l) row[l] *= vj * std::conj(v[l]);
        }
    }

    const std::vector<cplx>& kinetic_phase(double tau) {
        auto it = phase_cache_.find(tau);
        if (it != phase_cache_.end()) return it->second;
        std::vector<cplx> ph(grid_.n);
        const double f = tau / (2.0 * model_.mass() * grid_.hbar);
        for (std::size_t k = 0; k < grid_.n; ++k) ph[k] = std::polar(1.0, -f * q_[k] * q_[k]);
        if (phase_cache_.size() > 8) phase_cache_.clear();
        return phase_cache_.emplace(tau, std::move(ph)).first->second;
    }

    // g[d + n - 1] = exp(-rate (d dx)^2) for d in [-(n-1), n-1]
    const std::vector<double>& decoherence(double rate) {
        if (rate == decoherence_rate_) return decoherence_;
        const std::size_t n = grid_.n;
        decoherence_.resize(2 * n - 1);
        for (std::size_t i = 0; i < 2 * n - 1; ++i) {
            const double s = (double(i) - double(n - 1)) * grid_.dx;
            decoherence_[i] = std::exp(-rate * s * s);
        }
        decoherence_rate_ = rate;
        return decoherence_;
    }

    GridSpec grid_;
    Frame frame_;
    ComplexVector rho_;
    const SystemModel& model_;
    double k_, eta_, recenter_bins_;
    std::vector<double> xi_, q_;
    std::map<double, std::vector<cplx>> phase_cache_;
    std::vector<double> decoherence_;
    double decoherence_rate_ = -1.0;
    double pending_ = 0.0;
    double mean_xi_ = 0.0;
    std::size_t recenters_ = 0;
    std::size_t regrids_ = 0;
};

}  // namespace

DensityState step_sme(const DensityState& state, const SystemModel& model, double k, double eta,
                      double dr, double t, double dt) {
    DensityStepper stepper(state, model, k, eta, 4.0);
    if (model.kick_at(t, dt)) stepper.kick();
    stepper.kinetic(0.5 * dt);
    stepper.potential_and_measure(t + 0.5 * dt, dt, dr, t);
    stepper.kinetic(0.5 * dt);
    stepper.flush();
    return stepper.state();
}

SmeResult run_sme(DensityState initial, const SystemModel& model, double k, double eta,
                  const MeasurementRecord& record, const SmeOptions& options) {
    const double dt = record.dt;
    const std::size_t steps = record.size();
    if (steps > 0 && !(dt > 0.0)) throw ConfigError("record time step must be positive");
    const std::size_t stride = options.sample_stride == 0 ? 1 : options.sample_stride;
    const double hbar = initial.hbar();
    DensityStepper stepper(initial, model, k, eta, options.recenter_bins);
    SmeResult result{{}, {}, initial};
    std::size_t n_samples = 0;

    auto sample = [&](double t) {
        auto& inv = result.invariants;
        inv.max_hermiticity_error = std::max(inv.max_hermiticity_error, stepper.hermitize());
        const DensityAnalysis a = stepper.analyze(options.spill_threshold);
        const Cumulants& c = a.cumulants;
        ++inv.checks;
        inv.max_spill = std::max(inv.max_spill, a.spill.worst());
        inv.max_norm_error = std::max(inv.max_norm_error, stepper.trace_error());
        inv.note_uncertainty(c, hbar);
        if (options.regrid_tolerance > 1.0 && c.v_x > 0.0 && c.v_p > 0.0) {
            const double n = double(stepper.size());
            const double target = std::sqrt(kTwoPi * hbar * std::sqrt(c.v_x / c.v_p) / n);
            const double r = stepper.dx() / target;
            if (r > options.regrid_tolerance || r * options.regrid_tolerance < 1.0) stepper.regrid(target);
        }
        if (options.positivity_stride > 0 && n_samples % options.positivity_stride == 0) {
            const double e = stepper.state().min_eigenvalue();
            inv.min_eigenvalue = std::min(inv.min_eigenvalue, e);
            if (e < options.positivity_floor) throw SimulationError("positivity lost", t);
        }
        ++n_samples;
        result.trajectory.push(t, c);
    };

    sample(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = double(i) * dt;
        try {
            if (model.kick_at(t, dt)) stepper.kick();
            stepper.kinetic(0.5 * dt);
            stepper.potential_and_measure(t + 0.5 * dt, dt, record.increments[i], t);
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
    result.invariants.regrids = stepper.regrids();
    result.final_state = stepper.state();
    return result;
}

double error_std(const Cumulants& observer, const Cumulants& truth) {
    return std::sqrt(std::max(0.0, observer.v_x - truth.v_x));
}

}  // namespace qcl
