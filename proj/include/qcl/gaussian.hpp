#pragma once

#include <vector>

#include "qcl/diagnostics.hpp"
#include "qcl/models.hpp"
#include "qcl/sse.hpp"

namespace qcl {

struct GaussianState {
    double x = 0.0;
    double p = 0.0;
    double v_x = 0.0;
    double v_p = 0.0;
    double c_xp = 0.0;

    double determinant() const { return v_x * v_p - c_xp * c_xp; }
    bool positive_definite() const { return v_x > 0.0 && v_p > 0.0 && determinant() > 0.0; }
    Cumulants cumulants() const;
};

/// Information rate g_m of the record and additive momentum diffusion g_p.
struct NoiseParams {
    double g_m = 0.0;
    double g_p = 0.0;

    /// g_m = 8 eta k, g_p = hbar^2 k.
    static NoiseParams quantum(double k, double eta, double hbar);
    /// hbar^2 g_m <= 8 g_p
    bool realizable(double hbar) const { return hbar * hbar * g_m <= 8.0 * g_p * (1.0 + 1e-12); }
    void validate() const;
};

/// Deterministic right-hand side of the covariance equations for a given dF/dx.
struct CovarianceRates {
    double v_x = 0.0;
    double v_p = 0.0;
    double c_xp = 0.0;
};
CovarianceRates covariance_drift(double v_x, double v_p, double c_xp, double d_force, double m,
                                 const NoiseParams& noise);

/// One estimator step driven by the record increment dy over [t, t + dt).
/// The step is split like the master-equation integrator: kick (if due), free flight
/// dt/2, force impulse at t + dt/2 (second-order Taylor closure), momentum diffusion,
/// exact Gaussian conditioning on dy, free flight dt/2. To first order in dt this is
/// the Ito-Euler update of the moment equations with third cumulants set to zero.
/// Throws SimulationError("estimator diverged") if the covariance stops being
/// positive definite.
GaussianState step_gaussian(const GaussianState& state, const SystemModel& model,
                            const NoiseParams& noise, double dy, double t, double dt);

struct GaussianTrajectory {
    std::vector<double> t;
    std::vector<GaussianState> states;

    std::size_t size() const { return t.size(); }
    CumulantSeries cumulants() const;
};

/// Samples every sample_stride record steps and after the last one.
GaussianTrajectory run_gaussian(const GaussianState& initial, const SystemModel& model,
                                const NoiseParams& noise, const MeasurementRecord& record,
                                std::size_t sample_stride = 1);

/// Residuals sigma^2 - <V>_W - var_W(mean) of the ensemble decomposition at each sample,
/// with standard errors of the Monte Carlo estimate.
struct DecompositionResidual {
    double t = 0.0;
    double xx = 0.0, xp = 0.0, pp = 0.0;
    double se_xx = 0.0, se_xp = 0.0, se_pp = 0.0;
};

/// `reference` holds the cumulants of the unconditioned evolution at the same times as
/// every trajectory. Throws ConfigError on mismatched sampling grids.
std::vector<DecompositionResidual> ensemble_decomposition_check(
    const std::vector<CumulantSeries>& trajectories, const CumulantSeries& reference);

}  // namespace qcl
