#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qcl {

/// Sum by a fixed pairwise tree, so results do not depend on how the caller chunks work.
double pairwise_sum(std::span<const double> v);
double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
double rms(std::span<const double> v);
double max_abs(std::span<const double> v);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace qcl
