#include "qcl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "qcl/error.hpp"
#include "qcl/io.hpp"
#include "qcl/parallel.hpp"
#include "qcl/rng.hpp"
#include "qcl/sme.hpp"
#include "qcl/stats.hpp"

namespace qcl {

using nlohmann::json;

SeriesStats series_stats(const std::vector<double>& v) {
    if (v.empty()) return {};
    return {rms(v), mean(v), max_abs(v)};
}

std::vector<double> sqrt_vx(const CumulantSeries& s) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::sqrt(std::max(0.0, s.c[i].v_x));
    return out;
}

namespace {

struct Widths {
    double sigma_x = 0.0;
    double sigma_p = 0.0;
};

Widths widths_of(const CumulantSeries& s) {
    Widths w;
    for (const auto& c : s.c) {
        w.sigma_x = std::max(w.sigma_x, std::sqrt(c.v_x));
        w.sigma_p = std::max(w.sigma_p, std::sqrt(c.v_p));
    }
    return w;
}

// Largest phase-space cell the state occupies, with the starting aspect ratio. Enough
// for a grid whose spacing follows the state's shape.
Widths cell_of(const CumulantSeries& s) {
    double area = 0.0;
    for (const auto& c : s.c) area = std::max(area, std::sqrt(c.v_x * c.v_p));
    const double aspect = std::sqrt(std::sqrt(s.c.front().v_x / s.c.front().v_p));
    return {std::sqrt(area) * aspect, std::sqrt(area) / aspect};
}

// Covariance flow along the noise-free mean path (zero innovation).
Widths predicted_widths(const SystemModel& model, GaussianState s, const NoiseParams& noise,
                        std::size_t steps, double dt) {
    Widths w{std::sqrt(s.v_x), std::sqrt(s.v_p)};
    for (std::size_t i = 0; i < steps; ++i) {
        s = step_gaussian(s, model, noise, s.x * dt, double(i) * dt, dt);
        w.sigma_x = std::max(w.sigma_x, std::sqrt(s.v_x));
        w.sigma_p = std::max(w.sigma_p, std::sqrt(s.v_p));
    }
    return w;
}

bool is_leak(const SimulationError& e) { return std::string(e.what()) == "state leaking off grid"; }

// Run with a grid sized from `w`; on leakage retry with twice the points.
template <class Run>
auto with_grid(const Widths& w, double hbar, double span, std::size_t fixed_points,
               std::size_t min_points, std::size_t max_points, Run run) {
    if (fixed_points) {
        GridSpec g;
        g.n = fixed_points;
        g.hbar = hbar;
        g.dx = std::sqrt(2.0 * std::numbers::pi * hbar * w.sigma_x / (double(g.n) * w.sigma_p));
        return run(g);
    }
    std::size_t floor = min_points;
    for (;;) {
        const GridSpec g = size_grid(w.sigma_x, w.sigma_p, hbar, span, floor, std::max(max_points, floor));
        try {
            return run(g);
        } catch (const SimulationError& e) {
            if (!is_leak(e) || 2 * g.n > max_points) throw;
            floor = 2 * g.n;
        }
    }
}

double start_d_force(const SystemModel& model, double x0) {
    return model.kick() ? 0.0 : model.d_force(x0, 0.0);
}

json invariants_json(const InvariantReport& r) {
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"checks", r.checks},
            {"max_norm_error", r.max_norm_error},
            {"max_hermiticity_error", r.max_hermiticity_error},
            {"min_uncertainty_ratio", num(r.min_uncertainty_ratio)},
            {"min_eigenvalue", num(r.min_eigenvalue)},
            {"max_spill", r.max_spill},
            {"recenters", r.recenters},
            {"regrids", r.regrids}};
}

json stats_json(const SeriesStats& s) { return {{"rms", s.rms}, {"mean", s.mean}, {"max", s.max}}; }

json agreement_json(const AgreementStats& a) { return {{"rms", a.rms}, {"max", a.max}}; }

EstimatorSummary summarize(const CumulantSeries& est, const CumulantSeries& truth, std::size_t points) {
    if (est.size() != truth.size()) throw std::logic_error("estimator and truth sampled differently");
    EstimatorSummary s;
    s.sqrt_vx = series_stats(sqrt_vx(est));
    std::vector<double> err(est.size()), dx(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        err[i] = error_std(est.c[i], truth.c[i]);
        dx[i] = est.c[i].x - truth.c[i].x;
    }
    s.error_std = series_stats(err);
    s.rms_mean_error = rms(dx);
    s.grid_points = points;
    return s;
}

// Estimators for every observer from records at the SSE step.
void run_estimators(ExperimentResult& res) {
    const auto& cfg = res.config;
    const SystemModel model = cfg.model();
    const std::size_t stride = cfg.sample_stride() / cfg.estimator_stride;
    res.observers.resize(cfg.etas.size());
    parallel_for(cfg.etas.size(), cfg.threads, [&](std::size_t i) {
        const double eta = cfg.etas[i];
        ObserverResult& ob = res.observers[i];
        ob.eta = eta;
        const MeasurementRecord rec = res.records[i].coarsened(cfg.estimator_stride);
        const SteadyState ss = initial_covariance(cfg, eta);
        const GaussianState g0{cfg.x0, cfg.p0, ss.v_x, ss.v_p, ss.c_xp};
        ob.gaussian = run_gaussian(g0, model, NoiseParams::quantum(cfg.k, eta, cfg.hbar), rec, stride).cumulants();
        if (!cfg.run_sme) return;
        SmeOptions opt;
        opt.sample_stride = stride;
        opt.positivity_stride = cfg.positivity_stride;
        opt.regrid_tolerance = cfg.sme_regrid;
        std::size_t used = 0;
        SmeResult sme = with_grid(cfg.sme_regrid > 0.0 ? cell_of(ob.gaussian) : widths_of(ob.gaussian), cfg.hbar, cfg.sme_span_sigmas, cfg.sme_points,
                                  64, cfg.max_points, [&](const GridSpec& g) {
                                      used = g.n;
                                      auto rho0 = make_gaussian_density(g, cfg.x0, cfg.p0, ss.v_x, ss.v_p, ss.c_xp);
                                      return run_sme(std::move(rho0), model, cfg.k, eta, rec, opt);
                                  });
        ob.sme = std::move(sme.trajectory);
        ob.sme_invariants = sme.invariants;
        ob.sme_summary = EstimatorSummary{};
        ob.sme_summary->grid_points = used;
    });
}

void finish(ExperimentResult& res) {
    const auto& cfg = res.config;
    const bool have_truth = !res.truth.empty();
    for (auto& ob : res.observers) {
        if (have_truth) {
            ob.gaussian_summary = summarize(ob.gaussian, res.truth, 0);
            if (ob.sme_summary) {
                const auto pts = ob.sme_summary->grid_points;
                ob.sme_summary = summarize(ob.sme, res.truth, pts);
            }
        } else {
            ob.gaussian_summary.sqrt_vx = series_stats(sqrt_vx(ob.gaussian));
            if (ob.sme_summary) ob.sme_summary->sqrt_vx = series_stats(sqrt_vx(ob.sme));
        }
    }
    res.band.clear();
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        res.band.push_back(band_limit(res.records[i], cfg.filter_window));
        if (res.mean_x.size() == res.records[i].size())
            res.observers[i].averaged_record_rms = band_limited_deviation(res.band.back(), res.mean_x);
    }
    auto means = [&](bool sme) {
        std::vector<std::vector<double>> xs;
        for (const auto& ob : res.observers) {
            const auto& s = sme ? ob.sme : ob.gaussian;
            std::vector<double> x;
            for (const auto& c : s.c) x.push_back(c.x);
            xs.push_back(std::move(x));
        }
        return xs;
    };
    res.agreement_gaussian = agreement_stats(means(false));
    if (cfg.run_sme) res.agreement_sme = agreement_stats(means(true));
}

GaussianState truth_gaussian(const ExperimentConfig& cfg) {
    const SteadyState ss = initial_covariance(cfg, 1.0);
    return {cfg.x0, cfg.p0, ss.v_x, ss.v_p, ss.c_xp};
}

ExperimentResult run_observed(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!(cfg.k > 0.0)) throw ConfigError("experiments need a positive measurement strength");
    ExperimentResult res;
    res.config = cfg;
    const SystemModel model = cfg.model();
    const std::size_t steps = cfg.steps();
    const std::size_t stride = cfg.sample_stride();
    const ObserverSet observers{cfg.k, cfg.etas};
    if (steps == 0) {
        for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
            res.records.push_back({cfg.dt, {}, i});
            ObserverResult ob;
            ob.eta = cfg.etas[i];
            res.observers.push_back(std::move(ob));
        }
        res.regime = analyze_regime(cfg);
        return res;
    }

    const GaussianState g0 = truth_gaussian(cfg);
    const NoiseParams truth_noise = NoiseParams::quantum(cfg.k, 1.0, cfg.hbar);
    const Widths w = predicted_widths(model, g0, truth_noise, steps, cfg.dt);
    SseOptions opt;
    opt.sample_stride = stride;
    SseResult sse = with_grid(w, cfg.hbar, cfg.sse_span_sigmas, cfg.sse_points, 256, cfg.max_points,
                              [&](const GridSpec& g) {
                                  res.truth_points = g.n;
                                  auto psi0 = make_gaussian_state(g, cfg.x0, cfg.p0, g0.v_x, g0.c_xp);
                                  return run_sse(std::move(psi0), model, observers, cfg.duration(), cfg.dt,
                                                 cfg.seed, opt);
                              });
    res.truth = std::move(sse.trajectory);
    res.truth_invariants = sse.invariants;
    res.truth_sqrt_vx = series_stats(sqrt_vx(res.truth));
    res.records = std::move(sse.records);
    res.mean_x = std::move(sse.mean_x);

    run_estimators(res);
    finish(res);

    for (const auto& pt : classical_trajectory(model, cfg.x0, cfg.p0, cfg.duration(), cfg.dt, stride)) {
        Cumulants c;
        c.x = pt.x;
        c.p = pt.p;
        res.classical.push(pt.t, c);
    }
    res.regime = analyze_regime(cfg);
    return res;
}

}  // namespace

SteadyState initial_covariance(const ExperimentConfig& config, double eta) {
    const SystemModel model = config.model();
    return steady_state_covariance(start_d_force(model, config.x0), model.mass(), config.k, eta, config.hbar);
}

ExperimentResult run_duffing_experiment(const ExperimentConfig& config) {
    if (config.kind != ExperimentKind::Duffing) throw ConfigError("config is not a Duffing experiment");
    return run_observed(config);
}

ExperimentResult run_rotor_experiment(const ExperimentConfig& config) {
    if (config.kind != ExperimentKind::Rotor) throw ConfigError("config is not a kicked-rotor experiment");
    ExperimentResult res = run_observed(config);
    if (config.ensemble.enabled) res.energy = run_energy_study(config);
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return config.kind == ExperimentKind::Duffing ? run_duffing_experiment(config)
                                                  : run_rotor_experiment(config);
}

ExperimentResult replay_records(const ExperimentConfig& config, const std::vector<MeasurementRecord>& records) {
    config.validate();
    if (records.size() != config.etas.size())
        throw ConfigError("record file has " + std::to_string(records.size()) + " observers, config has " +
                          std::to_string(config.etas.size()));
    ExperimentConfig cfg = config;
    cfg.dt = records.front().dt;
    if (!records.front().increments.empty()) {
        const double duration = double(records.front().size()) * cfg.dt;
        if (cfg.kind == ExperimentKind::Duffing)
            cfg.t_final = duration;
        else
            cfg.kicks = exact_ratio(duration, cfg.rotor.kick_period, "records must cover whole kick periods");
    }
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    res.records = records;
    run_estimators(res);
    finish(res);
    return res;
}

RegimeReport analyze_regime(const ExperimentConfig& config) {
    const SystemModel model = config.model();
    const double dt = model.kick() ? config.rotor.kick_period / 100.0 : 1e-4;
    const double duration = config.duration() > 0.0 ? config.duration() : 5.0;
    const auto traj = classical_trajectory(model, config.x0, config.p0, duration, dt);
    RegimeInputs in;
    in.point = typical_point(model, traj);
    in.mass = model.mass();
    in.k = config.k;
    in.eta = *std::min_element(config.etas.begin(), config.etas.end());
    in.hbar = config.hbar;
    in.margin_factor = config.margin_factor;
    if (config.tracking_dx > 0.0) {
        in.tracking_dx = config.tracking_dx;
        in.tracking_dt = config.filter_window;
    }
    return evaluate_regime(in);
}

std::vector<double> closed_rotor_energy(const KickedRotorParams& rotor, double hbar, double x0,
                                        double p0, double v_x, double c_xp, std::size_t kicks,
                                        std::size_t periods, std::size_t points) {
    const double length = 2.0 * std::numbers::pi * double(periods);
    const double dx = length / double(points);
    const double dq = 2.0 * std::numbers::pi * hbar / length;
    ComplexVector psi(points);
    for (std::size_t j = 0; j < points; ++j) {
        double d = std::remainder(double(j) * dx - x0, length);
        psi[j] = std::exp(cplx(-d * d / (4.0 * v_x), c_xp * d * d / (2.0 * hbar * v_x) + p0 * d / hbar));
    }
    std::vector<cplx> kick(points), free(points);
    for (std::size_t j = 0; j < points; ++j) {
        kick[j] = std::polar(1.0, -rotor.kappa * std::cos(double(j) * dx) / hbar);
        const double q = double(fft_frequency(j, points)) * dq;
        free[j] = std::polar(1.0, -q * q * rotor.kick_period / (2.0 * rotor.m * hbar));
    }
    std::vector<double> energy;
    for (std::size_t n = 0; n < kicks; ++n) {
        for (std::size_t j = 0; j < points; ++j) psi[j] *= kick[j];
        fft_forward(psi);
        double w = 0.0, e = 0.0;
        for (std::size_t j = 0; j < points; ++j) {
            const double q = double(fft_frequency(j, points)) * dq;
            const double a = std::norm(psi[j]);
            w += a;
            e += a * q * q;
            psi[j] *= free[j];
        }
        energy.push_back(e / w / (2.0 * rotor.m));
        fft_inverse(psi);
    }
    return energy;
}

EnergyStudy run_energy_study(const ExperimentConfig& config) {
    const auto& ens = config.ensemble;
    const KickedRotorParams& rp = config.rotor;
    const std::size_t kicks = config.kicks;
    const SystemModel model = kicked_rotor(rp);
    EnergyStudy out;
    for (std::size_t n = 1; n <= kicks; ++n) out.kick.push_back(double(n));

    // initial covariance: pure steady state between kicks for the ensemble parameters
    SteadyState ss;
    if (ens.k > 0.0) {
        ss = steady_state_covariance(0.0, rp.m, ens.k, 1.0, ens.hbar);
    } else {
        ss.v_x = 0.04;
        ss.c_xp = 0.0;
        ss.v_p = ens.hbar * ens.hbar / (4.0 * ss.v_x);
    }

    // classical ensemble sampled from the same phase-space Gaussian
    {
        const double l11 = std::sqrt(ss.v_x), l21 = ss.c_xp / l11;
        const double l22 = std::sqrt(std::max(0.0, ss.v_p - l21 * l21));
        std::vector<std::vector<double>> e(kicks);
        for (auto& v : e) v.resize(ens.classical_trajectories);
        NoiseStream noise(config.seed ^ 0x9e3779b97f4a7c15ULL, 0);
        for (std::size_t i = 0; i < ens.classical_trajectories; ++i) {
            const auto z = noise.normal_pair(i, 0);
            double x = config.x0 + l11 * z[0];
            double p = config.p0 + l21 * z[0] + l22 * z[1];
            for (std::size_t n = 0; n < kicks; ++n) {
                p += rp.kappa * std::sin(x);
                x += p * rp.kick_period / rp.m;
                e[n][i] = p * p / (2.0 * rp.m);
            }
        }
        for (std::size_t n = 0; n < kicks; ++n) {
            out.classical.push_back(mean(e[n]));
            out.classical_se.push_back(e[n].size() > 1 ? std::sqrt(variance(e[n]) / double(e[n].size())) : 0.0);
        }
    }

    // observed quantum ensemble
    if (ens.observed_trajectories > 0 && ens.k > 0.0) {
        const ObserverSet obs{ens.k, {1.0}};
        const std::size_t per_kick = exact_ratio(rp.kick_period, ens.dt, "ensemble dt must divide the kick period");
        const GaussianState g0{config.x0, config.p0, ss.v_x, ss.v_p, ss.c_xp};
        const Widths w = predicted_widths(model, g0, NoiseParams::quantum(ens.k, 1.0, ens.hbar),
                                          kicks * per_kick, ens.dt);
        std::vector<std::vector<double>> e(ens.observed_trajectories);
        std::vector<InvariantReport> inv(ens.observed_trajectories);
        std::vector<std::size_t> pts(ens.observed_trajectories);
        SseOptions opt;
        opt.sample_stride = per_kick;
        parallel_for(ens.observed_trajectories, config.threads, [&](std::size_t i) {
            SseOptions o = opt;
            o.trajectory = static_cast<std::uint32_t>(i);
            SseResult r = with_grid(w, ens.hbar, config.sse_span_sigmas, 0, 64, config.max_points,
                                    [&](const GridSpec& g) {
                                        pts[i] = g.n;
                                        auto psi = make_gaussian_state(g, config.x0, config.p0, ss.v_x, ss.c_xp);
                                        return run_sse(std::move(psi), model, obs, double(kicks) * rp.kick_period,
                                                       ens.dt, config.seed + 1, o);
                                    });
            for (std::size_t n = 1; n < r.trajectory.size(); ++n) {
                const auto& c = r.trajectory.c[n];
                e[i].push_back((c.p * c.p + c.v_p) / (2.0 * rp.m));
            }
            inv[i] = r.invariants;
        });
        for (std::size_t n = 0; n < kicks; ++n) {
            std::vector<double> col(e.size());
            for (std::size_t i = 0; i < e.size(); ++i) col[i] = e[i][n];
            out.observed.push_back(mean(col));
            out.observed_se.push_back(col.size() > 1 ? std::sqrt(variance(col) / double(col.size())) : 0.0);
        }
        for (const auto& r : inv) out.observed_invariants.merge(r);
        out.observed_points = *std::max_element(pts.begin(), pts.end());
    }

    const SteadyState closed_ss = ens.k > 0.0 ? ss : SteadyState{0.04, ens.hbar * ens.hbar / 0.16, 0.0};
    out.closed = closed_rotor_energy(rp, ens.hbar, config.x0, config.p0, closed_ss.v_x, closed_ss.c_xp, kicks,
                                     ens.closed_periods, ens.closed_points);

    auto slope = [&](const std::vector<double>& y, std::size_t first) {
        if (y.size() < first + 2) return std::numeric_limits<double>::quiet_NaN();
        std::span<const double> xs(out.kick), ys(y);
        return fit_line(xs.subspan(first - 1), ys.subspan(first - 1)).slope;
    };
    const std::size_t late = kicks > 10 ? kicks - 9 : 1;
    out.classical_slope = slope(out.classical, 5);
    out.classical_slope_late = slope(out.classical, late);
    out.observed_slope = slope(out.observed, 5);
    out.closed_slope_late = slope(out.closed, late);
    return out;
}

json EnergyStudy::to_json() const {
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"classical_slope", num(classical_slope)},
            {"classical_slope_last10", num(classical_slope_late)},
            {"observed_slope", num(observed_slope)},
            {"closed_slope_last10", num(closed_slope_late)},
            {"closed_to_classical", num(closed_slope_late / classical_slope)},
            {"observed_to_classical", num(observed_slope / classical_slope)},
            {"observed_grid_points", observed_points},
            {"observed_invariants", invariants_json(observed_invariants)}};
}

json ExperimentResult::summary() const {
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json table = {{"eta", json::array()},
                  {"quantum", json::array()},
                  {"gaussian", json::array()},
                  {"averaged_record", json::array()}};
    json errors = {{"quantum", json::array()}, {"gaussian", json::array()}};
    json obs = json::array();
    for (const auto& ob : observers) {
        table["eta"].push_back(ob.eta);
        table["quantum"].push_back(ob.sme_summary ? num(ob.sme_summary->sqrt_vx.rms) : json(nullptr));
        table["gaussian"].push_back(ob.gaussian_summary.sqrt_vx.rms);
        table["averaged_record"].push_back(truth.empty() ? json(nullptr) : json(ob.averaged_record_rms));
        errors["quantum"].push_back(ob.sme_summary && !truth.empty() ? num(ob.sme_summary->error_std.rms) : json(nullptr));
        errors["gaussian"].push_back(truth.empty() ? json(nullptr) : json(ob.gaussian_summary.error_std.rms));
        json o = {{"eta", ob.eta},
                  {"gaussian",
                   {{"sqrt_vx", stats_json(ob.gaussian_summary.sqrt_vx)},
                    {"error_std", stats_json(ob.gaussian_summary.error_std)},
                    {"rms_mean_error", ob.gaussian_summary.rms_mean_error}}},
                  {"averaged_record_rms", ob.averaged_record_rms}};
        if (ob.sme_summary) {
            o["quantum"] = {{"sqrt_vx", stats_json(ob.sme_summary->sqrt_vx)},
                            {"error_std", stats_json(ob.sme_summary->error_std)},
                            {"rms_mean_error", ob.sme_summary->rms_mean_error},
                            {"grid_points", ob.sme_summary->grid_points},
                            {"invariants", invariants_json(ob.sme_invariants)}};
        }
        obs.push_back(o);
    }
    json j = {{"experiment", to_string(config.kind)},
              {"config", config.to_json()},
              {"table", table},
              {"error_std", errors},
              {"observers", obs},
              {"agreement", {{"gaussian", agreement_json(agreement_gaussian)}}}};
    if (agreement_sme) j["agreement"]["quantum"] = agreement_json(*agreement_sme);
    if (!truth.empty()) {
        j["true_state"] = {{"sqrt_vx", stats_json(truth_sqrt_vx)},
                           {"grid_points", truth_points},
                           {"invariants", invariants_json(truth_invariants)}};
    }
    if (energy) j["energy"] = energy->to_json();
    if (regime) j["regime"] = regime->to_json();
    return j;
}

void write_bundle(const ExperimentResult& res, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
    const std::size_t n_obs = res.observers.size();

    if (!res.truth.empty()) write_tracker_csv(path("sse.csv"), res.truth);
    if (!res.classical.empty()) write_tracker_csv(path("classical.csv"), res.classical);
    for (std::size_t i = 0; i < n_obs; ++i) {
        write_tracker_csv(path("gaussian_" + std::to_string(i + 1) + ".csv"), res.observers[i].gaussian);
        if (!res.observers[i].sme.empty())
            write_tracker_csv(path("sme_" + std::to_string(i + 1) + ".csv"), res.observers[i].sme);
    }
    write_records_csv(path("records.csv"), res.records);

    if (!res.truth.empty()) {
        // band-limited estimates, decimated to the sample interval
        Table band;
        band.columns = {"t", "x_true"};
        for (std::size_t i = 0; i < n_obs; ++i) band.columns.push_back("x_avg_" + std::to_string(i + 1));
        const std::size_t stride = res.config.sample_stride();
        for (std::size_t s = 0; s < res.mean_x.size(); s += stride) {
            std::vector<double> row{(double(s) + 0.5) * res.config.dt, res.mean_x[s]};
            for (const auto& b : res.band) row.push_back(b.estimate[s]);
            band.rows.push_back(std::move(row));
        }
        write_table_csv(path("band_limited.csv"), band);

        Table err;
        err.columns = {"t"};
        const bool sme = res.config.run_sme;
        for (std::size_t i = 0; i < n_obs; ++i) {
            const auto k = std::to_string(i + 1);
            if (sme) {
                err.columns.push_back("error_std_sme_" + k);
                err.columns.push_back("dx_sme_" + k);
            }
            err.columns.push_back("error_std_gaussian_" + k);
            err.columns.push_back("dx_gaussian_" + k);
        }
        for (std::size_t s = 0; s < res.truth.size(); ++s) {
            std::vector<double> row{res.truth.t[s]};
            for (const auto& ob : res.observers) {
                if (sme) {
                    row.push_back(error_std(ob.sme.c[s], res.truth.c[s]));
                    row.push_back(ob.sme.c[s].x - res.truth.c[s].x);
                }
                row.push_back(error_std(ob.gaussian.c[s], res.truth.c[s]));
                row.push_back(ob.gaussian.c[s].x - res.truth.c[s].x);
            }
            err.rows.push_back(std::move(row));
        }
        write_table_csv(path("error_std.csv"), err);
    }

    if (res.energy) {
        const auto& e = *res.energy;
        Table t;
        t.columns = {"kick", "classical", "classical_se", "observed", "observed_se", "closed"};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t n = 0; n < e.kick.size(); ++n) {
            t.rows.push_back({e.kick[n], e.classical[n], e.classical_se[n],
                              n < e.observed.size() ? e.observed[n] : nan,
                              n < e.observed_se.size() ? e.observed_se[n] : nan, e.closed[n]});
        }
        write_table_csv(path("energy.csv"), t);
    }
    write_text(path("summary.json"), res.summary().dump(2) + "\n");
}

}  // namespace qcl
