#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcl/config.hpp"
#include "qcl/diagnostics.hpp"
#include "qcl/gaussian.hpp"
#include "qcl/records.hpp"
#include "qcl/regime.hpp"
#include "qcl/sse.hpp"

namespace qcl {

/// rms, mean and max of a sampled quantity.
struct SeriesStats {
    double rms = 0.0;
    double mean = 0.0;
    double max = 0.0;
};
SeriesStats series_stats(const std::vector<double>& v);
std::vector<double> sqrt_vx(const CumulantSeries& s);

struct EstimatorSummary {
    SeriesStats sqrt_vx;
    SeriesStats error_std;
    /// rms of x(estimate) - x(true state)
    double rms_mean_error = 0.0;
    std::size_t grid_points = 0;
};

struct ObserverResult {
    double eta = 0.0;
    CumulantSeries gaussian;
    CumulantSeries sme;  // empty when the SME is skipped
    EstimatorSummary gaussian_summary;
    std::optional<EstimatorSummary> sme_summary;
    double averaged_record_rms = 0.0;
    InvariantReport sme_invariants;
};

/// Average kinetic energy after each kick n = 1..N for the three ensembles.
struct EnergyStudy {
    std::vector<double> kick;
    std::vector<double> classical, classical_se;
    std::vector<double> observed, observed_se;
    std::vector<double> closed;
    double classical_slope = 0.0;        // kicks 5..N
    double classical_slope_late = 0.0;   // last 10 kicks
    double observed_slope = 0.0;         // kicks 5..N
    double closed_slope_late = 0.0;      // last 10 kicks
    std::size_t observed_points = 0;
    InvariantReport observed_invariants;

    nlohmann::json to_json() const;
};

struct ExperimentResult {
    ExperimentConfig config;
    CumulantSeries truth;
    SeriesStats truth_sqrt_vx;
    std::size_t truth_points = 0;
    InvariantReport truth_invariants;
    std::vector<MeasurementRecord> records;
    std::vector<double> mean_x;
    std::vector<BandLimited> band;
    std::vector<ObserverResult> observers;
    AgreementStats agreement_gaussian;
    std::optional<AgreementStats> agreement_sme;
    CumulantSeries classical;
    std::optional<EnergyStudy> energy;
    std::optional<RegimeReport> regime;

    nlohmann::json summary() const;
};

/// Initial covariance used for an observer with efficiency eta: the steady state at the
/// starting point (dF = 0 for kicked systems).
SteadyState initial_covariance(const ExperimentConfig& config, double eta);

ExperimentResult run_duffing_experiment(const ExperimentConfig& config);
ExperimentResult run_rotor_experiment(const ExperimentConfig& config);
/// Dispatches on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Estimators only, driven by previously stored records (at the SSE time step).
ExperimentResult replay_records(const ExperimentConfig& config,
                                const std::vector<MeasurementRecord>& records);

/// Typical point from a noise-free trajectory, then all regime checks with the smallest
/// observer efficiency.
RegimeReport analyze_regime(const ExperimentConfig& config);

EnergyStudy run_energy_study(const ExperimentConfig& config);

/// Kinetic energy after each of `kicks` kicks for a closed quantum rotor on a ring of
/// `periods` copies of [0, 2 pi) sampled with `points` points.
std::vector<double> closed_rotor_energy(const KickedRotorParams& rotor, double hbar, double x0,
                                        double p0, double v_x, double c_xp, std::size_t kicks,
                                        std::size_t periods, std::size_t points);

/// Write every CSV and summary.json of the bundle into `dir` (created if needed).
void write_bundle(const ExperimentResult& result, const std::string& dir);

}  // namespace qcl
