#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcl/config.hpp"
#include "qcl/error.hpp"
#include "qcl/experiments.hpp"
#include "qcl/io.hpp"

using nlohmann::json;

namespace {

// Every config field as a flag; given flags are collected into a JSON patch applied on
// top of the preset and the --config file.
class ConfigFlags {
public:
    void attach(CLI::App* app) {
        app->add_option("--config", config_path_, "JSON config file")->check(CLI::ExistingFile);
        add<double>(app, "--hbar", "/hbar", "Planck constant");
        add<double>(app, "--k", "/k", "measurement strength");
        add<std::vector<double>>(app, "--etas", "/etas", "observer efficiencies")->delimiter(',');
        add<double>(app, "--t-final", "/t_final", "run length (Duffing)");
        add<std::size_t>(app, "--kicks", "/kicks", "number of kick periods (rotor)");
        add<double>(app, "--x0", "/x0", "initial position");
        add<double>(app, "--p0", "/p0", "initial momentum");
        add<double>(app, "--dt", "/dt", "SSE time step");
        add<std::size_t>(app, "--estimator-stride", "/estimator_stride", "SSE steps per estimator step");
        add<double>(app, "--sample-interval", "/sample_interval", "time between stored samples");
        add<double>(app, "--filter-window", "/filter_window", "record averaging window");
        add<std::size_t>(app, "--sse-points", "/sse_points", "SSE grid points (0 = auto)");
        add<std::size_t>(app, "--sme-points", "/sme_points", "SME grid points (0 = auto)");
        add<std::size_t>(app, "--max-points", "/max_points", "largest automatic grid");
        add<double>(app, "--sse-span", "/sse_span_sigmas", "SSE grid span in standard deviations");
        add<double>(app, "--sme-span", "/sme_span_sigmas", "SME grid span in standard deviations");
        add<bool>(app, "--run-sme", "/run_sme", "integrate the observers' master equations");
        add<double>(app, "--sme-regrid", "/sme_regrid", "SME regrid tolerance factor (0 = fixed spacing)");
        add<std::size_t>(app, "--positivity-stride", "/positivity_stride", "samples between eigenvalue checks");
        add<std::uint64_t>(app, "--seed", "/seed", "random seed");
        add<std::size_t>(app, "--threads", "/threads", "worker threads");
        add<double>(app, "--margin-factor", "/margin_factor", "factor used for 'much less than'");
        add<double>(app, "--tracking-dx", "/tracking_dx", "required position resolution (0 = skip)");
        add<std::string>(app, "--output-dir", "/output_dir", "bundle directory");
        add<double>(app, "--duffing-m", "/duffing/m", "Duffing mass");
        add<double>(app, "--duffing-a", "/duffing/a", "Duffing quadratic coefficient");
        add<double>(app, "--duffing-b", "/duffing/b", "Duffing quartic coefficient");
        add<double>(app, "--duffing-lambda", "/duffing/lambda", "drive amplitude");
        add<double>(app, "--duffing-omega", "/duffing/omega", "drive frequency");
        add<double>(app, "--rotor-m", "/rotor/m", "rotor mass");
        add<double>(app, "--rotor-kappa", "/rotor/kappa", "kick strength");
        add<double>(app, "--rotor-period", "/rotor/kick_period", "kick period");
        add<bool>(app, "--ensemble", "/ensemble/enabled", "run the energy study");
        add<double>(app, "--ensemble-hbar", "/ensemble/hbar", "energy study Planck constant");
        add<double>(app, "--ensemble-k", "/ensemble/k", "energy study measurement strength");
        add<double>(app, "--ensemble-dt", "/ensemble/dt", "energy study time step");
        add<std::size_t>(app, "--observed-trajectories", "/ensemble/observed_trajectories", "observed quantum ensemble size");
        add<std::size_t>(app, "--classical-trajectories", "/ensemble/classical_trajectories", "classical ensemble size");
        add<std::size_t>(app, "--closed-periods", "/ensemble/closed_periods", "closed rotor ring length in periods");
        add<std::size_t>(app, "--closed-points", "/ensemble/closed_points", "closed rotor grid points");
    }

    qcl::ExperimentConfig build(const std::string& experiment) const {
        json j = json::object();
        if (!config_path_.empty()) {
            std::ifstream in(config_path_);
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw qcl::ConfigError("cannot parse " + config_path_ + ": " + e.what());
            }
            if (!j.is_object()) throw qcl::ConfigError("config must be a JSON object");
            if (!experiment.empty() && j.contains("experiment") &&
                qcl::experiment_kind_from_string(j["experiment"].get<std::string>()) !=
                    qcl::experiment_kind_from_string(experiment))
                throw qcl::ConfigError("config file is for experiment '" + j["experiment"].get<std::string>() + "'");
        }
        if (!experiment.empty()) j["experiment"] = experiment;
        j.merge_patch(patch_);
        auto cfg = qcl::ExperimentConfig::from_json(j);
        cfg.validate();
        return cfg;
    }

private:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& pointer, const std::string& help) {
        return app->add_option_function<T>(
            flag, [this, pointer](const T& v) { patch_[json::json_pointer(pointer)] = v; }, help);
    }

    std::string config_path_;
    json patch_ = json::object();
};

json error_json(const std::string& type, const std::string& message, std::optional<double> time = {}) {
    json e = {{"type", type}, {"message", message}};
    if (time) e["time"] = *time;
    return {{"error", e}};
}

void print_run_summary(const qcl::ExperimentResult& result, const std::string& dir) {
    json out = result.summary();
    out["output_dir"] = dir;
    std::cout << out.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuously observed quantum systems: trajectories, estimators and regime checks"};
    app.require_subcommand(1);

    ConfigFlags duffing_flags, rotor_flags, regime_flags, replay_flags;
    auto* duffing = app.add_subcommand("run-duffing", "driven Duffing oscillator with three observers");
    duffing_flags.attach(duffing);
    auto* rotor = app.add_subcommand("run-rotor", "delta-kicked rotor with three observers and energy study");
    rotor_flags.attach(rotor);

    auto* regime = app.add_subcommand("analyze-regime", "evaluate the classical-regime inequalities");
    regime_flags.attach(regime);
    std::string regime_model = "duffing";
    bool regime_json = false;
    regime->add_option("--experiment", regime_model, "duffing or rotor (ignored if the config names one)");
    regime->add_flag("--json", regime_json, "print the report as JSON");

    auto* replay = app.add_subcommand("replay-records", "run the estimators on stored measurement records");
    replay_flags.attach(replay);
    std::string records_path;
    std::string replay_model = "duffing";
    replay->add_option("--records", records_path, "records CSV (t, dr_1..dr_N)")->required()->check(CLI::ExistingFile);
    replay->add_option("--experiment", replay_model, "duffing or rotor (ignored if the config names one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cout << error_json("usage", e.what()).dump() << '\n';
        return 2;
    }

    try {
        if (*duffing || *rotor) {
            const auto cfg = *duffing ? duffing_flags.build("duffing") : rotor_flags.build("rotor");
            const auto result = qcl::run_experiment(cfg);
            qcl::write_bundle(result, cfg.output_dir);
            print_run_summary(result, cfg.output_dir);
        } else if (*regime) {
            auto cfg = regime_flags.build("");
            if (regime->count("--experiment")) cfg = regime_flags.build(regime_model);
            const auto report = qcl::analyze_regime(cfg);
            if (regime_json)
                std::cout << report.to_json().dump(2) << '\n';
            else
                std::cout << report.table();
        } else if (*replay) {
            auto cfg = replay_flags.build("");
            if (replay->count("--experiment")) cfg = replay_flags.build(replay_model);
            const auto result = qcl::replay_records(cfg, qcl::read_records_csv(records_path));
            qcl::write_bundle(result, cfg.output_dir);
            print_run_summary(result, cfg.output_dir);
        }
    } catch (const qcl::ConfigError& e) {
        std::cout << error_json("config", e.what()).dump() << '\n';
        return 2;
    } catch (const qcl::SimulationError& e) {
        std::cout << error_json("simulation", e.what(), e.time()).dump() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cout << error_json("internal", e.what()).dump() << '\n';
        return 1;
    }
    return 0;
}
