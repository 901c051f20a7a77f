#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "qcl/grid_state.hpp"

namespace qcl {

/// Cumulants sampled at a sequence of times.
struct CumulantSeries {
    std::vector<double> t;
    std::vector<Cumulants> c;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    void push(double time, const Cumulants& value) {
        t.push_back(time);
        c.push_back(value);
    }
};

/// Worst values of the state invariants seen during a run.
struct InvariantReport {
    std::size_t checks = 0;
    double max_norm_error = 0.0;
    double max_hermiticity_error = 0.0;
    /// min over samples of (v_x v_p - c_xp^2) / (hbar^2/4)
    double min_uncertainty_ratio = std::numeric_limits<double>::infinity();
    /// min over checked samples of the smallest density-matrix eigenvalue
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    double max_spill = 0.0;
    std::size_t recenters = 0;
    std::size_t regrids = 0;

    void note_uncertainty(const Cumulants& c, double hbar) {
        min_uncertainty_ratio =
            std::min(min_uncertainty_ratio, c.uncertainty_product() / (0.25 * hbar * hbar));
    }

    void merge(const InvariantReport& o) {
        checks += o.checks;
        max_norm_error = std::max(max_norm_error, o.max_norm_error);
        max_hermiticity_error = std::max(max_hermiticity_error, o.max_hermiticity_error);
        min_uncertainty_ratio = std::min(min_uncertainty_ratio, o.min_uncertainty_ratio);
        min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
        max_spill = std::max(max_spill, o.max_spill);
        recenters += o.recenters;
        regrids += o.regrids;
    }
};

}  // namespace qcl
