#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcl/models.hpp"

namespace qcl {

struct SteadyState {
    double v_x = 0.0;
    double v_p = 0.0;
    double c_xp = 0.0;
};

/// Stable fixed point of the covariance equations for constant dF/dx with
/// kbar = 8 eta k. Requires m > 0, k > 0 and 0 < eta <= 1.
SteadyState steady_state_covariance(double d_force, double m, double k, double eta, double hbar);

enum class MarginKind {
    Required,       // counts toward the verdict
    Informational,  // reported only
};

/// One inequality lhs << rhs (or lhs <= rhs for threshold checks).
struct Margin {
    double lhs = 0.0;
    double rhs = 0.0;
    /// rhs / lhs; NaN when undefined
    double factor = 0.0;
    /// factor needed for the inequality to count as satisfied
    double required = 10.0;
    bool defined = true;
    bool satisfied = false;
    MarginKind kind = MarginKind::Required;
    std::string note;
};

enum class Verdict { Classical, Marginal, NonClassical };
std::string to_string(Verdict v);

/// Inputs at the typical point.
struct RegimeInputs {
    TypicalPoint point;
    double mass = 1.0;
    double k = 0.0;
    /// efficiency used for the checks; callers pass the smallest observer efficiency
    double eta = 1.0;
    double hbar = 1.0;
    /// factor standing in for "much less than"
    double margin_factor = 10.0;
    /// optional tracking requirement
    std::optional<double> tracking_dx;
    std::optional<double> tracking_dt;
};

struct RegimeReport {
    double v_x_ss = 0.0, v_p_ss = 0.0, c_xp_ss = 0.0;
    double r = 0.0;
    double s = 0.0, s_prime = 0.0, s_bar = 0.0;
    double xi = 0.0;
    double energy = 0.0;
    std::optional<double> sigma_tracking;
    bool nonlinearity_weak = true;
    bool classical_window = true;
    std::map<std::string, Margin> margins;
    std::vector<std::string> notes;
    Verdict verdict = Verdict::NonClassical;

    nlohmann::json to_json() const;
    std::string table() const;
};

/// "lhs << rhs" evaluated with the given factor.
Margin much_less(double lhs, double rhs, double factor, MarginKind kind = MarginKind::Required);

/// Localization ratio and the weak/strong nonlinearity conditions.
std::map<std::string, Margin> localization_check(const RegimeInputs& in, RegimeReport* report = nullptr);

/// The two-sided low-noise window 2|dF|/(eta s_bar) << hbar k << |dF| s_bar / 4 plus
/// its constituent inequalities (informational).
std::map<std::string, Margin> low_noise_check(const RegimeInputs& in, RegimeReport* report = nullptr);

/// sigma_T = (8 eta k dt)^(-1/2); satisfied iff 8 eta k dt dx^2 >= 1.
struct TrackingResult {
    double sigma = 0.0;
    Margin margin;
};
TrackingResult tracking_check(double eta, double k, double dx_required, double dt_required);

RegimeReport evaluate_regime(const RegimeInputs& in);

}  // namespace qcl
