#include "qcl/records.hpp"

#include <algorithm>
#include <cmath>

#include "qcl/error.hpp"
#include "qcl/stats.hpp"

namespace qcl {

BandLimited band_limit(const MeasurementRecord& record, double window) {
    if (!(record.dt > 0.0)) throw ConfigError("record time step must be positive");
    if (!(window >= 2.0 * record.dt * (1.0 - 1e-12))) throw ConfigError("window shorter than 2 steps");
    const auto h = static_cast<std::size_t>(std::max(0.0, std::round((window / record.dt - 1.0) / 2.0)));
    const std::size_t n = record.size();
    BandLimited out{record.dt, h, std::vector<double>(n)};
    // prefix sums keep the cost linear; the window sum is exact up to rounding
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + record.increments[i];
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t w = std::min({h, i, n - 1 - i});
        const double sum = prefix[i + w + 1] - prefix[i - w];
        out.estimate[i] = sum / (double(2 * w + 1) * record.dt);
    }
    return out;
}

double band_limited_deviation(const BandLimited& band, const std::vector<double>& truth) {
    if (truth.size() != band.estimate.size()) throw ConfigError("mismatched sampling grids");
    std::vector<double> diff;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (band.full_window(i)) diff.push_back(band.estimate[i] - truth[i]);
    return rms(diff);
}

AgreementStats agreement_stats(const std::vector<std::vector<double>>& estimates) {
    const std::size_t n = estimates.size();
    for (const auto& e : estimates)
        if (e.size() != estimates.front().size()) throw ConfigError("mismatched sampling grids");
    AgreementStats s{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)),
                     std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> d(estimates[i].size());
            for (std::size_t t = 0; t < d.size(); ++t) d[t] = estimates[i][t] - estimates[j][t];
            s.rms[i][j] = s.rms[j][i] = rms(d);
            s.max[i][j] = s.max[j][i] = max_abs(d);
        }
    }
    return s;
}

}  // namespace qcl
