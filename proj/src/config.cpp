#include "qcl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "qcl/error.hpp"

namespace qcl {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    return kind == ExperimentKind::Duffing ? "duffing" : "rotor";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "duffing") return ExperimentKind::Duffing;
    if (name == "rotor" || name == "kicked-rotor") return ExperimentKind::Rotor;
    throw ConfigError("unknown experiment '" + name + "'");
}

ExperimentConfig ExperimentConfig::duffing_defaults() {
    ExperimentConfig c;
    c.output_dir = default_output_dir();
    c.ensemble.enabled = false;
    return c;
}

ExperimentConfig ExperimentConfig::rotor_defaults() {
    ExperimentConfig c;
    c.kind = ExperimentKind::Rotor;
    c.x0 = 1.0;
    c.p0 = 0.5;
    c.dt = 1e-4;
    c.estimator_stride = 100;
    // kicks reshape the state faster than sample-time regridding can follow
    c.sme_regrid = 0.0;
    c.sample_interval = 1e-2;
    c.output_dir = default_output_dir();
    return c;
}

SystemModel ExperimentConfig::model() const {
    return kind == ExperimentKind::Duffing ? qcl::duffing(duffing) : kicked_rotor(rotor);
}

double ExperimentConfig::duration() const {
    return kind == ExperimentKind::Duffing ? t_final : double(kicks) * rotor.kick_period;
}

std::size_t exact_ratio(double a, double b, const char* what) {
    const double r = a / b;
    const double n = std::round(r);
    if (!(b > 0.0) || std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r)))
        throw ConfigError(std::string(what));
    return static_cast<std::size_t>(n);
}

std::size_t ExperimentConfig::steps() const {
    return exact_ratio(duration(), dt, "dt must divide the run duration");
}

std::size_t ExperimentConfig::sample_stride() const {
    return exact_ratio(sample_interval, dt, "dt must divide the sample interval");
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(hbar > 0.0, "hbar must be positive");
    require(k >= 0.0, "k must be non-negative");
    require(!etas.empty(), "at least one observer is required");
    for (double e : etas) require(e > 0.0, "observer efficiencies must be positive");
    require(std::accumulate(etas.begin(), etas.end(), 0.0) <= 1.0 + 1e-12,
            "observer efficiencies must sum to at most 1");
    require(dt > 0.0, "dt must be positive");
    require(duration() >= 0.0, "run duration must be non-negative");
    require(estimator_stride >= 1, "estimator_stride must be at least 1");
    require(filter_window >= 2.0 * dt, "filter window must cover at least two steps");
    require(sse_span_sigmas > 0.0 && sme_span_sigmas > 0.0, "grid spans must be positive");
    require(sme_regrid == 0.0 || sme_regrid > 1.0, "sme_regrid must be 0 or greater than 1");
    require(threads >= 1, "threads must be at least 1");
    require(margin_factor >= 1.0, "margin factor must be at least 1");
    if (kind == ExperimentKind::Duffing) {
        require(duffing.m > 0.0, "mass must be positive");
        require(duffing.b > 0.0, "Duffing quartic coefficient must be positive");
    } else {
        require(rotor.m > 0.0, "mass must be positive");
        require(rotor.kick_period > 0.0, "kick period must be positive");
        exact_ratio(rotor.kick_period, dt, "dt must divide the kick period");
    }
    steps();
    const std::size_t stride = sample_stride();
    require(stride % estimator_stride == 0,
            "sample interval must be a multiple of dt * estimator_stride");
    require(steps() % estimator_stride == 0, "estimator stride must divide the step count");
    if (ensemble.enabled && kind == ExperimentKind::Rotor) {
        require(ensemble.hbar > 0.0 && ensemble.k >= 0.0, "ensemble hbar/k out of range");
        require(ensemble.dt > 0.0, "ensemble dt must be positive");
        exact_ratio(rotor.kick_period, ensemble.dt, "ensemble dt must divide the kick period");
        require(ensemble.closed_periods >= 1, "closed ring needs at least one period");
        require(ensemble.closed_points >= 16 &&
                    (ensemble.closed_points & (ensemble.closed_points - 1)) == 0,
                "closed grid size must be a power of two");
    }
}

json ExperimentConfig::to_json() const {
    return {
        {"experiment", to_string(kind)},
        {"duffing", {{"m", duffing.m}, {"a", duffing.a}, {"b", duffing.b}, {"lambda", duffing.lambda}, {"omega", duffing.omega}}},
        {"rotor", {{"m", rotor.m}, {"kappa", rotor.kappa}, {"kick_period", rotor.kick_period}}},
        {"hbar", hbar},
        {"k", k},
        {"etas", etas},
        {"t_final", t_final},
        {"kicks", kicks},
        {"x0", x0},
        {"p0", p0},
        {"dt", dt},
        {"estimator_stride", estimator_stride},
        {"sample_interval", sample_interval},
        {"filter_window", filter_window},
        {"sse_points", sse_points},
        {"sme_points", sme_points},
        {"max_points", max_points},
        {"sse_span_sigmas", sse_span_sigmas},
        {"sme_span_sigmas", sme_span_sigmas},
        {"sme_regrid", sme_regrid},
        {"run_sme", run_sme},
        {"positivity_stride", positivity_stride},
        {"seed", seed},
        {"threads", threads},
        {"margin_factor", margin_factor},
        {"tracking_dx", tracking_dx},
        {"ensemble",
         {{"enabled", ensemble.enabled},
          {"hbar", ensemble.hbar},
          {"k", ensemble.k},
          {"dt", ensemble.dt},
          {"observed_trajectories", ensemble.observed_trajectories},
          {"classical_trajectories", ensemble.classical_trajectories},
          {"closed_periods", ensemble.closed_periods},
          {"closed_points", ensemble.closed_points}}},
        {"output_dir", output_dir},
    };
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"experiment", "duffing", "rotor", "hbar", "k", "etas", "t_final", "kicks", "x0",
                    "p0", "dt", "estimator_stride", "sample_interval", "filter_window",
                    "sse_points", "sme_points", "max_points", "sse_span_sigmas", "sme_span_sigmas", "sme_regrid",
                    "run_sme", "positivity_stride", "seed", "threads", "margin_factor",
                    "tracking_dx", "ensemble", "output_dir"},
                   "");
    ExperimentConfig c;
    try {
        if (auto it = j.find("experiment"); it != j.end()) {
            c = experiment_kind_from_string(it->get<std::string>()) == ExperimentKind::Rotor
                    ? rotor_defaults()
                    : duffing_defaults();
        } else {
            c = duffing_defaults();
        }
        if (auto it = j.find("duffing"); it != j.end()) {
            reject_unknown(*it, {"m", "a", "b", "lambda", "omega"}, "duffing.");
            read(*it, "m", c.duffing.m);
            read(*it, "a", c.duffing.a);
            read(*it, "b", c.duffing.b);
            read(*it, "lambda", c.duffing.lambda);
            read(*it, "omega", c.duffing.omega);
        }
        if (auto it = j.find("rotor"); it != j.end()) {
            reject_unknown(*it, {"m", "kappa", "kick_period"}, "rotor.");
            read(*it, "m", c.rotor.m);
            read(*it, "kappa", c.rotor.kappa);
            read(*it, "kick_period", c.rotor.kick_period);
        }
        read(j, "hbar", c.hbar);
        read(j, "k", c.k);
        read(j, "etas", c.etas);
        read(j, "t_final", c.t_final);
        read(j, "kicks", c.kicks);
        read(j, "x0", c.x0);
        read(j, "p0", c.p0);
        read(j, "dt", c.dt);
        read(j, "estimator_stride", c.estimator_stride);
        read(j, "sample_interval", c.sample_interval);
        read(j, "filter_window", c.filter_window);
        read(j, "sse_points", c.sse_points);
        read(j, "sme_points", c.sme_points);
        read(j, "max_points", c.max_points);
        read(j, "sse_span_sigmas", c.sse_span_sigmas);
        read(j, "sme_span_sigmas", c.sme_span_sigmas);
        read(j, "sme_regrid", c.sme_regrid);
        read(j, "run_sme", c.run_sme);
        read(j, "positivity_stride", c.positivity_stride);
        read(j, "seed", c.seed);
        read(j, "threads", c.threads);
        read(j, "margin_factor", c.margin_factor);
        read(j, "tracking_dx", c.tracking_dx);
        if (auto it = j.find("ensemble"); it != j.end()) {
            reject_unknown(*it,
                           {"enabled", "hbar", "k", "dt", "observed_trajectories",
                            "classical_trajectories", "closed_periods", "closed_points"},
                           "ensemble.");
            read(*it, "enabled", c.ensemble.enabled);
            read(*it, "hbar", c.ensemble.hbar);
            read(*it, "k", c.ensemble.k);
            read(*it, "dt", c.ensemble.dt);
            read(*it, "observed_trajectories", c.ensemble.observed_trajectories);
            read(*it, "classical_trajectories", c.ensemble.classical_trajectories);
            read(*it, "closed_periods", c.ensemble.closed_periods);
            read(*it, "closed_points", c.ensemble.closed_points);
        }
        read(j, "output_dir", c.output_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

std::string default_output_dir() {
    if (const char* env = std::getenv("QCL_OUTPUT_DIR"); env && *env) return env;
    return "qcl-output";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config file '" + path + "': " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

}  // namespace qcl
