#pragma once

#include <cstdint>
#include <vector>

#include "qcl/diagnostics.hpp"
#include "qcl/grid_state.hpp"
#include "qcl/models.hpp"
#include "qcl/rng.hpp"

namespace qcl {

/// Position measurement of strength k shared between observers with efficiencies eta_i.
struct ObserverSet {
    double k = 0.0;
    std::vector<double> etas;

    double total_eta() const;
    /// Throws ConfigError unless every eta_i > 0 and their sum is <= 1.
    void validate() const;
};

/// Record increments dr for one observer at a fixed time step.
struct MeasurementRecord {
    double dt = 0.0;
    std::vector<double> increments;
    std::size_t observer_index = 0;

    std::size_t size() const { return increments.size(); }
    /// Sum groups of `factor` consecutive increments; factor must divide the length.
    MeasurementRecord coarsened(std::size_t factor) const;
};

struct SseOptions {
    /// Cumulants are sampled every sample_stride steps and after the last step.
    std::size_t sample_stride = 100;
    double spill_threshold = kDefaultSpillThreshold;
    /// Recenter when the means drift by more than this many grid points / momentum bins.
    double recenter_bins = 4.0;
    std::uint32_t trajectory = 0;
};

struct SseStep {
    GridState state;
    std::vector<double> increments;
};

/// One step: kick (if due at t), half kinetic, potential, measurement, half kinetic,
/// renormalize. The measurement factor is applied in Ito-exponential form; if the
/// observers do not exhaust the measurement an extra unrecorded channel carries the
/// remainder. Noise for the step is drawn from `noise` at `step_index`.
SseStep step_sse(const GridState& state, const SystemModel& model, const ObserverSet& observers,
                 double t, double dt, const NoiseStream& noise, std::uint64_t step_index);

struct SseResult {
    CumulantSeries trajectory;
    std::vector<MeasurementRecord> records;
    /// <X> at each step, as used in the record increments
    std::vector<double> mean_x;
    InvariantReport invariants;
    GridState final_state;
};

/// Integrate from t = 0 to t_final. Consecutive half kinetic steps are fused; the
/// result is identical (to rounding) to repeated step_sse calls.
SseResult run_sse(GridState initial, const SystemModel& model, const ObserverSet& observers,
                  double t_final, double dt, std::uint64_t seed, const SseOptions& options = {});

std::size_t step_count(double t_final, double dt);

}  // namespace qcl
