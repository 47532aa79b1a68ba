#include "sdr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sdr/csv.hpp"
#include "sdr/decay.hpp"
#include "sdr/errors.hpp"
#include "sdr/estimation.hpp"
#include "sdr/montecarlo.hpp"

namespace sdr {

namespace {

RunConfig load_with_overrides(const CliOptions& opt) {
    RunConfig cfg = load_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.workers) cfg.workers = *opt.workers;
    return cfg;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void write_sidecar(const CliOptions& opt, const RunConfig& cfg, const std::string& command) {
    IniFile meta = serialize_config(cfg);
    meta.set("run", "command", command);
    meta.set("run", "version", kVersion);
    meta.set("run", "spectrum_mode", opt.spectrum_mode);
    meta.set("run", "output", opt.out_path);
    meta.set("run", "timestamp_utc", utc_timestamp());
    std::ofstream out(opt.out_path + ".meta");
    if (!out) throw Error("cannot write sidecar: " + opt.out_path + ".meta");
    out << meta.serialize();
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw ConfigError("point count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = hi;
        return v;
    }
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    v.back() = hi;
    return v;
}

double resolve_dt(const RunConfig& cfg, const Geometry& geom, double shortest_te) {
    if (cfg.dt_ms) return *cfg.dt_ms * constants::ms_to_s;
    // resolve both the restriction (step-size invariants) and the shortest
    // pulse train in the batch
    const double te_cap = shortest_te / 50.0;
    if (geom.restricted()) return std::min(max_stable_dt(geom), te_cap);
    return std::min(shortest_te / 2000.0, te_cap);
}

struct SimPlan {
    std::vector<PulseSequence> seqs;
    std::vector<double> coordinate; // what the first CSV column holds
    std::string column;             // its name
};

SimPlan build_sim_plan(const RunConfig& cfg) {
    SimPlan plan;
    const bool te_scan = cfg.te_count || cfg.te_min_ms || cfg.te_max_ms;
    const bool x_scan = cfg.x_count || cfg.x_min_ms || cfg.x_max_ms;
    if (te_scan && x_scan)
        throw ConfigError("[sequence] specifies both a TE scan and an x scan; pick one");

    auto make_kind = [&](double te) {
        if (cfg.sequence_kind == "hahn") return build_hahn(te);
        if (cfg.sequence_kind == "cpmg") return build_cpmg(cfg.n_pulses, te);
        if (!cfg.x_ms)
            throw ConfigError("[sequence] kind = sdr needs x_ms");
        return build_sdr(cfg.n_pulses, *cfg.x_ms * constants::ms_to_s, te);
    };

    if (te_scan) {
        if (!(cfg.te_min_ms && cfg.te_max_ms && cfg.te_count))
            throw ConfigError("[sequence] TE scan needs te_min_ms, te_max_ms and te_count");
        const auto tes =
            linspace(*cfg.te_min_ms * constants::ms_to_s, *cfg.te_max_ms * constants::ms_to_s,
                     *cfg.te_count);
        for (double te : tes) plan.seqs.push_back(make_kind(te));
        plan.coordinate = tes;
        plan.column = "time_s";
        return plan;
    }
    if (x_scan) {
        if (!(cfg.te_ms > 0.0)) throw ConfigError("[sequence] te_ms must be positive");
        const double te = cfg.te();
        const double x_lo = cfg.x_min_ms ? *cfg.x_min_ms * constants::ms_to_s : te * 1e-3;
        const double x_hi = cfg.x_max_ms ? *cfg.x_max_ms * constants::ms_to_s : te / cfg.n_pulses;
        const auto xs = linspace(x_lo, x_hi, cfg.x_count.value_or(50));
        for (double x : xs) plan.seqs.push_back(build_sdr(cfg.n_pulses, x, te));
        plan.coordinate = xs;
        plan.column = "x_delay_s";
        return plan;
    }
    if (!(cfg.te_ms > 0.0)) throw ConfigError("[sequence] te_ms must be positive");
    plan.seqs.push_back(make_kind(cfg.te()));
    plan.coordinate = {cfg.te()};
    plan.column = "time_s";
    return plan;
}

}  // namespace

SpectrumMode parse_spectrum_mode(const std::string& text) {
    if (text == "single") return SpectrumMode::single();
    if (text.rfind("multi:", 0) == 0) {
        try {
            const int k = std::stoi(text.substr(6));
            if (k >= 1) return SpectrumMode::multi(k);
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("spectrum mode must be 'single' or 'multi:<K>', got '" + text + "'");
}

int cmd_predict(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const Geometry geom = cfg.geometry();
    const AcquisitionParams acq = cfg.acquisition();
    const SpectrumMode mode = parse_spectrum_mode(opt.spectrum_mode);
    const NoiseSpectrum spec = build_spectrum(geom, acq, mode);

    if (!(cfg.te_ms > 0.0)) throw ConfigError("[sequence] te_ms must be positive");
    const double te = cfg.te();

    std::vector<double> xs;
    if (opt.cpmg_point) {
        xs = {te / cfg.n_pulses};
    } else if (cfg.x_ms) {
        xs = {*cfg.x_ms * constants::ms_to_s};
    } else {
        const double x_lo = cfg.x_min_ms ? *cfg.x_min_ms * constants::ms_to_s : te * 1e-3;
        const double x_hi = cfg.x_max_ms ? *cfg.x_max_ms * constants::ms_to_s : te / cfg.n_pulses;
        xs = linspace(x_lo, x_hi, cfg.x_count.value_or(50));
    }

    const DecayCurve curve = sdr_scan(cfg.n_pulses, te, spec, xs, acq);
    std::vector<std::vector<double>> rows;
    rows.reserve(curve.x_values.size());
    for (std::size_t i = 0; i < curve.x_values.size(); ++i)
        rows.push_back({curve.x_values[i], curve.signal[i]});
    write_csv(opt.out_path, {"x_delay_s", "magnetization"}, rows);
    write_sidecar(opt, cfg, "predict");
    return 0;
}

int cmd_simulate(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const Geometry geom = cfg.geometry();
    const AcquisitionParams acq = cfg.acquisition();
    const SimPlan plan = build_sim_plan(cfg);

    double horizon = 0.0;
    double shortest = plan.seqs.front().total_time;
    for (const auto& s : plan.seqs) {
        horizon = std::max(horizon, s.total_time);
        shortest = std::min(shortest, s.total_time);
    }

    WalkSpec walk;
    walk.geometry = geom;
    walk.duration = cfg.duration_ms ? *cfg.duration_ms * constants::ms_to_s : horizon;
    walk.dt = resolve_dt(cfg, geom, shortest);
    walk.n_walkers = cfg.n_walkers;
    walk.seed = cfg.seed;

    const EnsembleSignal sig = simulate_decay(walk, plan.seqs, acq, cfg.workers);

    std::vector<std::vector<double>> rows;
    rows.reserve(plan.seqs.size());
    for (std::size_t i = 0; i < plan.seqs.size(); ++i) {
        const double t2f =
            acq.t2 > 0.0 ? std::exp(-plan.seqs[i].total_time / acq.t2) : 1.0;
        rows.push_back({plan.coordinate[i], t2f * sig.magnetization[i], t2f * sig.stderr_mean[i]});
    }
    write_csv(opt.out_path, {plan.column, "magnetization", "stderr"}, rows);
    write_sidecar(opt, cfg, "simulate");
    return 0;
}

int cmd_fit(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const Geometry geom = cfg.geometry();
    if (!geom.restricted()) throw ConfigError("[geometry] fit needs a restricted kind");
    const AcquisitionParams acq = cfg.acquisition();
    const SpectrumMode mode = parse_spectrum_mode(opt.spectrum_mode);

    const CsvTable table = read_csv(opt.data_path);
    if (table.header != std::vector<std::string>{"x_delay_s", "signal"})
        throw CsvError(opt.data_path + ": expected header 'x_delay_s,signal'");
    if (table.rows.size() < 5)
        throw InsufficientDataError(opt.data_path + ": need at least 5 rows, got " +
                                    std::to_string(table.rows.size()));

    std::vector<std::string> warnings;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(table.rows.size());
    for (const auto& row : table.rows) pts.emplace_back(row[0], row[1]);
    if (!std::is_sorted(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        warnings.push_back("input rows were not sorted by x_delay_s; sorted ascending");
        std::cerr << "warning: " << warnings.back() << "\n";
    }

    DecayCurve curve;
    curve.te = cfg.te();
    curve.n_pulses = cfg.n_pulses;
    curve.acq = acq;
    for (const auto& [x, s] : pts) {
        curve.x_values.push_back(x);
        curve.signal.push_back(s);
    }

    const DecayCurve normalized = normalize_first_point(curve);

    FitOptions fopt;
    fopt.d_min = cfg.d_min_um * constants::um_to_m;
    fopt.d_max = cfg.d_max_um * constants::um_to_m;
    fopt.multistarts = cfg.multistarts;
    fopt.fit_amplitude = cfg.fit_amplitude;
    fopt.fit_d0 = cfg.fit_d0;
    fopt.mode = mode;

    const FitResult fit = fit_diameter(normalized, geom.kind, geom.d0, fopt);

    // model curve at the data's x values
    const std::vector<double> res =
        residuals(normalized, geom.kind, fit.diameter, fit.amplitude, fit.d0, mode);

    nlohmann::json report;
    report["diameter_m"] = fit.diameter;
    report["diameter_um"] = fit.diameter / constants::um_to_m;
    report["amplitude"] = fit.amplitude;
    report["d0_m2_per_s"] = fit.d0;
    report["d0_fitted"] = fit.d0_fitted;
    report["residual_rms"] = fit.residual_rms;
    report["iterations"] = fit.iterations;
    report["converged"] = fit.converged;
    report["objective"] = fit.objective;
    report["covariance_diag"] = fit.covariance_diag;
    report["spectrum_mode"] = opt.spectrum_mode;
    report["n_points"] = normalized.x_values.size();
    report["geometry_kind"] = to_string(geom.kind);
    report["warnings"] = warnings;
    nlohmann::json curve_json = nlohmann::json::array();
    for (std::size_t i = 0; i < normalized.x_values.size(); ++i) {
        curve_json.push_back({{"x_delay_s", normalized.x_values[i]},
                              {"signal", normalized.signal[i]},
                              {"model", normalized.signal[i] + res[i]},
                              {"residual", res[i]}});
    }
    report["model_curve"] = curve_json;

    std::ofstream out(opt.out_path);
    if (!out) throw Error("cannot write report: " + opt.out_path);
    out << report.dump(2) << "\n";
    write_sidecar(opt, cfg, "fit");

    std::cout << "fitted diameter: " << fit.diameter / constants::um_to_m << " um (converged: "
              << (fit.converged ? "yes" : "no") << ", residual rms " << fit.residual_rms << ")\n";
    return 0;
}

int cmd_msd(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const Geometry geom = cfg.geometry();

    WalkSpec walk;
    walk.geometry = geom;
    if (cfg.duration_ms) {
        walk.duration = *cfg.duration_ms * constants::ms_to_s;
    } else if (geom.restricted()) {
        walk.duration = 12.0 * correlation_time(geom);
    } else {
        throw ConfigError("[walk] duration_ms is required for free geometry");
    }
    walk.dt = resolve_dt(cfg, geom, walk.duration);
    walk.n_walkers = cfg.n_walkers;
    walk.seed = cfg.seed;

    const int points = opt.points > 0 ? opt.points : 64;
    const MsdCurve msd = simulate_msd(walk, points, cfg.workers);

    double scale = 1.0;
    std::string col = "msd_m2";
    if (opt.normalize_lc2) {
        const double lc = restriction_length(correlation_time(geom), geom.d0);
        scale = 1.0 / (lc * lc);
        col = "msd_over_lc2";
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(msd.times.size());
    for (std::size_t i = 0; i < msd.times.size(); ++i)
        rows.push_back({msd.times[i], scale * msd.msd[i]});
    write_csv(opt.out_path, {"t_s", col}, rows);
    write_sidecar(opt, cfg, "msd");
    return 0;
}

int cmd_spectrum(const CliOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const Geometry geom = cfg.geometry();
    const AcquisitionParams acq = cfg.acquisition();
    const SpectrumMode mode = parse_spectrum_mode(opt.spectrum_mode);
    const NoiseSpectrum spec = build_spectrum(geom, acq, mode);

    const int points = opt.points > 0 ? opt.points : 256;
    const double knee = 1.0 / spec.min_tau();
    const auto omegas = linspace(0.0, opt.omega_span * knee, points);

    std::vector<std::vector<double>> rows;
    rows.reserve(omegas.size());
    for (double w : omegas) rows.push_back({w, s_of_omega(spec, w)});
    write_csv(opt.out_path, {"omega_rad_s", "s_omega_s"}, rows);
    write_sidecar(opt, cfg, "spectrum");
    return 0;
}

}  // namespace sdr
