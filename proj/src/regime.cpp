#include "qcl/regime.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qcl/error.hpp"

namespace qcl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Margin undefined(std::string note) {
    Margin m;
    m.lhs = m.rhs = m.factor = kNaN;
    m.defined = false;
    m.note = std::move(note);
    return m;
}


}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Classical: return "classical";
        case Verdict::Marginal: return "marginal";
        case Verdict::NonClassical: return "non-classical";
    }
    return "unknown";
}

SteadyState steady_state_covariance(double d_force, double m, double k, double eta, double hbar) {
    if (!(m > 0.0) || !(k > 0.0) || !(eta > 0.0) || eta > 1.0 || !(hbar > 0.0))
        throw ConfigError("steady state needs m > 0, k > 0, 0 < eta <= 1, hbar > 0");
    const double kbar = 8.0 * eta * k;
    const double a = d_force / kbar;
    const double root = std::sqrt(a * a + hbar * hbar / (4.0 * eta));
    SteadyState s;
    // for a < 0 the difference root + a cancels; use the product form instead
    s.c_xp = a >= 0.0 ? a + root : (hbar * hbar / (4.0 * eta)) / (root - a);
    s.v_x = std::sqrt(2.0 * s.c_xp / (m * kbar));
    s.v_p = m * s.v_x * (kbar * s.c_xp - d_force);
    return s;
}

Margin much_less(double lhs, double rhs, double factor, MarginKind kind) {
    Margin m;
    m.lhs = lhs;
    m.rhs = rhs;
    m.required = factor;
    m.kind = kind;
    if (lhs == 0.0 && rhs > 0.0)
        m.factor = std::numeric_limits<double>::infinity();
    else
        m.factor = rhs / lhs;
    m.defined = !std::isnan(m.factor);
    m.satisfied = m.defined && m.factor >= factor;
    return m;
}

std::map<std::string, Margin> localization_check(const RegimeInputs& in, RegimeReport* report) {
    std::map<std::string, Margin> out;
    const auto& tp = in.point;
    const double F = tp.force, dF = tp.d_force, d2F = tp.d2_force, m = in.mass;
    const double kbar = 8.0 * in.eta * in.k;
    if (!(F > 0.0)) {
        for (const char* name : {"localization_ratio", "nonlinearity_weak", "nonlinearity_strong"})
            out[name] = undefined("undefined (F=0)");
        return out;
    }
    if (!(in.k > 0.0)) {
        out["localization_ratio"] = undefined("no measurement (k=0)");
        return out;
    }
    // worst case: evaluate the width at an unstable point, dF = +|dF|
    const auto ss = steady_state_covariance(std::abs(dF), m, in.k, in.eta, in.hbar);
    const double r = std::abs(d2F * ss.v_x / (2.0 * F));
    out["localization_ratio"] = much_less(r, 1.0, in.margin_factor);

    const double nl_lhs = d2F * d2F;
    const double nl_rhs = 16.0 * in.eta * m * F * F * std::abs(dF) / (in.hbar * in.hbar);
    Margin branch = much_less(nl_lhs, nl_rhs, in.margin_factor, MarginKind::Informational);
    const bool weak = branch.satisfied;
    out["nonlinearity_test"] = branch;
    if (weak) {
        out["nonlinearity_weak"] =
            much_less(std::sqrt(d2F * d2F * std::abs(dF) / (2.0 * m * F * F)), kbar, in.margin_factor);
    } else {
        out["nonlinearity_strong"] = much_less(
            d2F * d2F * in.hbar / (4.0 * std::sqrt(in.eta) * m * F * F), kbar, in.margin_factor);
    }
    if (report) {
        report->r = r;
        report->nonlinearity_weak = weak;
    }
    return out;
}

std::map<std::string, Margin> low_noise_check(const RegimeInputs& in, RegimeReport* report) {
    std::map<std::string, Margin> out;
    const auto& tp = in.point;
    const double F = tp.force, dF = tp.d_force, p = tp.momentum, m = in.mass, hbar = in.hbar;
    const double hk = hbar * in.k;
    const double energy = p * p / (2.0 * m);
    if (report) report->energy = energy;
    if (!(F > 0.0)) {
        out["low_noise_lower"] = undefined("undefined (F=0)");
        out["low_noise_upper"] = undefined("undefined (F=0)");
        return out;
    }
    if (!(dF > 0.0)) {
        out["low_noise_lower"] = undefined("not useful (dF=0)");
        out["low_noise_upper"] = undefined("not useful (dF=0)");
        return out;
    }
    const double s = energy * p / (4.0 * F) / hbar;
    const double s_prime = m * F * F * F / (dF * dF * p) / hbar;
    const double s_bar = std::min(s, s_prime);
    const double kbar = 8.0 * in.eta * in.k;
    const double xi = hbar * kbar / dF;
    if (report) {
        report->s = s;
        report->s_prime = s_prime;
        report->s_bar = s_bar;
        report->xi = xi;
        report->classical_window = s_bar * s_bar >= 8.0 / in.eta;
    }
    out["low_noise_lower"] = much_less(2.0 * dF / (in.eta * s_bar), hk, in.margin_factor);
    out["low_noise_upper"] = much_less(hk, dF * s_bar / 4.0, in.margin_factor);

    const auto info = MarginKind::Informational;
    out["action_s"] = much_less(1.0 / (8.0 * std::sqrt(in.eta)), s, in.margin_factor, info);
    out["unstable_xi_vs_s"] = much_less(1.0 / (2.0 * s), xi, in.margin_factor, info);
    out["unstable_xi_lower"] = much_less(16.0 / s_prime, xi, in.margin_factor, info);
    out["unstable_xi_upper"] = much_less(xi, 2.0 * in.eta * s_prime, in.margin_factor, info);
    out["stable_xi"] = much_less(xi, 4.0 * in.eta * s_prime, in.margin_factor, info);
    Margin pos = much_less(dF / (hbar * kbar), 4.0 * s, 1.0, info);
    out["positivity_4s"] = pos;
    return out;
}

TrackingResult tracking_check(double eta, double k, double dx_required, double dt_required) {
    if (!(dx_required > 0.0) || !(dt_required > 0.0)) throw ConfigError("tracking resolutions must be positive");
    const double rate = 8.0 * eta * k;
    TrackingResult t;
    t.sigma = 1.0 / std::sqrt(rate * dt_required);
    t.margin.lhs = 1.0 / (dt_required * dx_required * dx_required);
    t.margin.rhs = rate;
    t.margin.factor = rate * dt_required * dx_required * dx_required;
    t.margin.required = 1.0;
    t.margin.satisfied = t.margin.factor >= 1.0;
    return t;
}

RegimeReport evaluate_regime(const RegimeInputs& in) {
    RegimeReport rep;
    if (in.k > 0.0 && in.eta > 0.0) {
        const auto ss = steady_state_covariance(in.point.d_force, in.mass, in.k, in.eta, in.hbar);
        rep.v_x_ss = ss.v_x;
        rep.v_p_ss = ss.v_p;
        rep.c_xp_ss = ss.c_xp;
    }
    for (auto& [name, m] : localization_check(in, &rep)) rep.margins[name] = m;
    for (auto& [name, m] : low_noise_check(in, &rep)) rep.margins[name] = m;
    if (in.tracking_dx && in.tracking_dt && in.k > 0.0) {
        auto tr = tracking_check(in.eta, in.k, *in.tracking_dx, *in.tracking_dt);
        rep.sigma_tracking = tr.sigma;
        rep.margins["tracking"] = tr.margin;
    }
    if (!rep.classical_window) rep.notes.push_back("no classical window");

    bool all_strong = true, all_weak = true;
    for (const auto& [name, m] : rep.margins) {
        if (m.kind != MarginKind::Required) continue;
        if (!m.defined) {
            // cannot confirm the inequality either way
            all_strong = false;
            continue;
        }
        if (!m.satisfied) all_strong = false;
        if (!(m.factor >= 1.0)) all_weak = false;
    }
    if (!(in.k > 0.0)) {
        rep.notes.push_back("no measurement (k=0)");
        all_strong = all_weak = false;
    }
    rep.verdict = all_strong ? Verdict::Classical : all_weak ? Verdict::Marginal : Verdict::NonClassical;
    return rep;
}

nlohmann::json RegimeReport::to_json() const {
    using nlohmann::json;
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json margins_json = json::object();
    for (const auto& [name, m] : margins) {
        margins_json[name] = {{"lhs", num(m.lhs)},
                              {"rhs", num(m.rhs)},
                              {"factor", std::isinf(m.factor) ? json("inf") : num(m.factor)},
                              {"required", m.required},
                              {"defined", m.defined},
                              {"satisfied", m.satisfied},
                              {"counts_toward_verdict", m.kind == MarginKind::Required},
                              {"note", m.note}};
    }
    json j = {{"v_x_ss", num(v_x_ss)},
              {"v_p_ss", num(v_p_ss)},
              {"c_xp_ss", num(c_xp_ss)},
              {"r", num(r)},
              {"s", num(s)},
              {"s_prime", num(s_prime)},
              {"s_bar", num(s_bar)},
              {"xi", num(xi)},
              {"energy", num(energy)},
              {"nonlinearity_weak", nonlinearity_weak},
              {"classical_window", classical_window},
              {"margins", margins_json},
              {"notes", notes},
              {"verdict", to_string(verdict)}};
    j["sigma_tracking"] = sigma_tracking ? num(*sigma_tracking) : json(nullptr);
    return j;
}

std::string RegimeReport::table() const {
    std::ostringstream os;
    os << std::setprecision(4);
    os << "steady state: v_x=" << v_x_ss << " v_p=" << v_p_ss << " c_xp=" << c_xp_ss << "\n";
    os << "r=" << r << " s=" << s << " s'=" << s_prime << " xi=" << xi << "\n";
    os << std::left << std::setw(22) << "inequality" << std::setw(13) << "lhs" << std::setw(13)
       << "rhs" << std::setw(13) << "factor" << "status\n";
    for (const auto& [name, m] : margins) {
        os << std::setw(22) << name;
        if (!m.defined) {
            os << m.note << "\n";
            continue;
        }
        os << std::setw(13) << m.lhs << std::setw(13) << m.rhs << std::setw(13) << m.factor;
        os << (m.satisfied ? "ok" : "FAILS");
        if (m.kind == MarginKind::Informational) os << " (info)";
        os << "\n";
    }
    for (const auto& n : notes) os << "note: " << n << "\n";
    os << "verdict: " << to_string(verdict) << "\n";
    return os.str();
}

}  // namespace qcl
