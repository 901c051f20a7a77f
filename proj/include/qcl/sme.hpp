#pragma once

#include "qcl/diagnostics.hpp"
#include "qcl/grid_state.hpp"
#include "qcl/models.hpp"
#include "qcl/sse.hpp"

namespace qcl {

struct SmeOptions {
    /// Samples every sample_stride record steps and after the last one.
    std::size_t sample_stride = 1;
    double spill_threshold = kDefaultSpillThreshold;
    double recenter_bins = 4.0;
    /// Eigenvalue check every this many samples (0 disables). Costs O(n^3).
    std::size_t positivity_stride = 0;
    double positivity_floor = -1e-4;
    /// At samples, move dx back to the value balancing the position and momentum
    /// spreads once it is off by more than this factor (values <= 1 keep the grid fixed).
    double regrid_tolerance = 0.0;
};

/// One step of an observer's conditional master equation driven by the record
/// increment dr: kick (if due at t), half kinetic, potential, measurement and
/// decoherence, half kinetic, trace renormalization. The measurement is applied as
/// rho -> M rho M^dagger followed by Gaussian decoherence of the unobserved part,
/// which keeps rho positive. eta = 0 gives the unconditioned evolution.
DensityState step_sme(const DensityState& state, const SystemModel& model, double k, double eta,
                      double dr, double t, double dt);

struct SmeResult {
    CumulantSeries trajectory;
    InvariantReport invariants;
    DensityState final_state;
};

SmeResult run_sme(DensityState initial, const SystemModel& model, double k, double eta,
                  const MeasurementRecord& record, const SmeOptions& options = {});

/// sqrt(max(0, v_x(observer) - v_x(truth))).
double error_std(const Cumulants& observer, const Cumulants& truth);

}  // namespace qcl
