#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcl/models.hpp"

namespace qcl {

enum class ExperimentKind { Duffing, Rotor };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Energy growth study (kicked rotor only).
struct EnsembleConfig {
    bool enabled = true;
    double hbar = 0.1;
    double k = 10.0;
    double dt = 1e-3;
    std::size_t observed_trajectories = 1000;
    std::size_t classical_trajectories = 10000;
    /// closed system: the grid is a ring of closed_periods copies of [0, 2 pi)
    std::size_t closed_periods = 8;
    std::size_t closed_points = 32768;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Duffing;
    DuffingParams duffing;
    KickedRotorParams rotor;

    double hbar = 1e-5;
    double k = 1e5;
    std::vector<double> etas{0.5, 0.3, 0.2};

    /// Duffing run length; kicked runs use `kicks` periods instead.
    double t_final = 5.0;
    std::size_t kicks = 30;

    double x0 = -2.0;
    double p0 = 3.0;

    /// SSE time step; estimators step at estimator_stride * dt.
    double dt = 1e-5;
    std::size_t estimator_stride = 100;
    /// time between stored samples; must be a multiple of dt * estimator_stride
    double sample_interval = 1e-3;
    double filter_window = 2.5e-2;

    /// 0 selects the size automatically from a Gaussian pre-run.
    std::size_t sse_points = 0;
    std::size_t sme_points = 0;
    std::size_t max_points = 2048;
    double sse_span_sigmas = 20.0;
    double sme_span_sigmas = 16.0;
    /// SME spacing follows the state's shape once off by this factor (0 keeps it fixed)
    double sme_regrid = 1.1;
    bool run_sme = true;
    /// eigenvalue check every this many SME samples (0 disables)
    std::size_t positivity_stride = 50;

    std::uint64_t seed = 20240611;
    std::size_t threads = 1;
    double margin_factor = 10.0;
    /// optional spatial resolution for the tracking check (0 = not evaluated)
    double tracking_dx = 0.0;

    EnsembleConfig ensemble;
    std::string output_dir;

    static ExperimentConfig duffing_defaults();
    static ExperimentConfig rotor_defaults();

    SystemModel model() const;
    double duration() const;
    std::size_t steps() const;
    /// SSE steps between stored samples
    std::size_t sample_stride() const;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Output directory from the QCL_OUTPUT_DIR environment variable, or "qcl-output".
std::string default_output_dir();

ExperimentConfig load_config(const std::string& path);

/// Integer ratio a / b, or ConfigError if b does not divide a (relative tolerance 1e-9).
std::size_t exact_ratio(double a, double b, const char* what);

}  // namespace qcl
