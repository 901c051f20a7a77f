#pragma once

#include <vector>

#include "qcl/sse.hpp"

namespace qcl {

/// Position estimates from a boxcar average of dr/dt. Entry i is centred on the middle
/// of increment i, i.e. on t = (i + 1/2) dt, so the filter has no group delay. Near the
/// ends the window shrinks symmetrically.
struct BandLimited {
    double dt = 0.0;
    std::size_t half_width = 0;
    std::vector<double> estimate;

    double time(std::size_t i) const { return (double(i) + 0.5) * dt; }
    /// True where the full window fits inside the record.
    bool full_window(std::size_t i) const {
        return i >= half_width && i + half_width < estimate.size();
    }
};

/// Window w covers 2h+1 increments with h = round((w/dt - 1)/2). Throws ConfigError if
/// the window is shorter than two steps.
BandLimited band_limit(const MeasurementRecord& record, double window);

/// rms of (estimate - truth) over entries with a full window; truth is sampled at the
/// same instants as the estimate.
double band_limited_deviation(const BandLimited& band, const std::vector<double>& truth);

struct AgreementStats {
    /// rms[i][j] and max[i][j] of |x_i - x_j|
    std::vector<std::vector<double>> rms;
    std::vector<std::vector<double>> max;
};

/// Pairwise differences between mean trajectories on a common grid.
AgreementStats agreement_stats(const std::vector<std::vector<double>>& estimates);

}  // namespace qcl
