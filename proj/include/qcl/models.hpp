#pragma once

#include <array>
#include <optional>
#include <vector>

namespace qcl {

/// Impulsive potential kappa cos(x) sum_n delta(t - n period).
struct CosineKick {
    double kappa = 0.0;
    double period = 1.0;
};

/// One-dimensional Hamiltonian P^2/2m + V(X, t) with
/// V = sum_n c_n x^n + lambda x cos(omega t) (+ optional cosine kicks).
class SystemModel {
public:
    static constexpr std::size_t kMaxDegree = 6;
    using Coefficients = std::array<double, kMaxDegree + 1>;

    SystemModel(double mass, Coefficients potential, double drive_amplitude = 0.0,
                double drive_frequency = 0.0, std::optional<CosineKick> kick = std::nullopt);

    double mass() const { return mass_; }
    const Coefficients& coefficients() const { return coeffs_; }
    double drive_amplitude() const { return lambda_; }
    double drive_frequency() const { return omega_; }
    const std::optional<CosineKick>& kick() const { return kick_; }

    /// Smooth part of the potential and its derivatives (kicks excluded).
    double potential(double x, double t) const;
    double force(double x, double t) const;
    double d_force(double x, double t) const;
    double d2_force(double x, double t) const;

    /// Taylor coefficients of the smooth potential about x: V(x + xi) = sum_m out[m] xi^m.
    Coefficients taylor(double x, double t) const;

    /// True if the smooth force vanishes identically (only kicks act).
    bool force_free() const;

    /// Index of the kick falling in [t - dt/2, t + dt/2), if any.
    std::optional<long> kick_at(double t, double dt) const;
    /// Momentum impulse kappa sin(x) delivered by one kick.
    double kick_impulse(double x) const;

private:
    double mass_;
    Coefficients coeffs_{};
    double lambda_;
    double omega_;
    std::optional<CosineKick> kick_;
};

struct DuffingParams {
    double m = 1.0;
    double a = 10.0;
    double b = 0.5;
    double lambda = 10.0;
    double omega = 6.07;
};

struct KickedRotorParams {
    double m = 1.0;
    double kappa = 10.0;
    double kick_period = 1.0;
};

/// V = b x^4 - a x^2 + lambda x cos(omega t).
SystemModel duffing(const DuffingParams& params);
SystemModel kicked_rotor(const KickedRotorParams& params);
SystemModel harmonic(double m, double omega);
SystemModel free_particle(double m);
SystemModel polynomial(double m, const std::vector<double>& coefficients);

struct PhasePoint {
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
};

/// Noise-free Hamiltonian trajectory: Stoermer-Verlet for smooth forces, with exact
/// impulses at kick times. Samples are returned every `stride` steps (and at t=0).
std::vector<PhasePoint> classical_trajectory(const SystemModel& model, double x0, double p0,
                                             double t_final, double dt, std::size_t stride = 1);

/// Advance a single phase point by one step of the same integrator.
PhasePoint classical_step(const SystemModel& model, PhasePoint s, double dt);

/// Trajectory-averaged magnitudes used as the "typical" point of a model.
struct TypicalPoint {
    double force = 0.0;
    double d_force = 0.0;
    double d2_force = 0.0;
    double momentum = 0.0;
    std::size_t samples = 0;
};

/// Time averages of |F|, |dF|, |d2F| and |p| along the trajectory, excluding samples
/// with |F| below relative_floor * max|F|. Kicked systems are sampled at the kicks,
/// with F the impulse per kick period.
TypicalPoint typical_point(const SystemModel& model, const std::vector<PhasePoint>& trajectory,
                           double relative_floor = 1e-6);

}  // namespace qcl
