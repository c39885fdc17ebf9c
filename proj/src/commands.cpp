#include "vmt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "vmt/calibrate.hpp"
#include "vmt/errors.hpp"

namespace vmt {

namespace {

using cd = std::complex<double>;

struct TauPlan {
    double tau_max_ps;
    double dt_ps;
};

// Sampling plan for Fourier-transforming a tau-domain series: run until the
// slowest incoherent decay has died to the decay tolerance and resolve the
// fastest oscillation present.
TauPlan numeric_tau_plan(const VibronicSystem& system, const DerivedQuantities& dq,
                         double tau_floor_ps) {
    const double central = rate_from_meV(dq.big_gamma_meV) / 2.0;
    const double side = rate_from_meV(3.0 * dq.gamma_meV + 2.0 * dq.gamma_pd_meV) / 4.0;
    const double slowest = std::min(central, side);
    TauPlan plan;
    plan.tau_max_ps = std::max(tau_floor_ps, std::log(2e4) / slowest);

    double fastest = rate_from_meV(dq.omega_renorm_meV);
    if (dq.mollow_splitting_meV) fastest = rate_from_meV(*dq.mollow_splitting_meV);
    for (const auto& m : system.modes) fastest = std::max(fastest, rate_from_meV(m.nu_meV));
    fastest = std::max(fastest, 2.0 * std::numbers::pi / plan.tau_max_ps * 8.0);
    plan.dt_ps = 2.0 * std::numbers::pi / fastest / 16.0;

    const double samples = plan.tau_max_ps / plan.dt_ps;
    if (samples > 2e6)
        throw NumericalError("numeric spectrum plan needs " + std::to_string(samples) +
                             " samples; use an analytic method for this system");
    return plan;
}

std::vector<double> uniform_grid(double t_max, double dt) {
    std::vector<double> g;
    for (double t = 0.0; t <= t_max + 1e-12; t += dt) g.push_back(t);
    return g;
}

double series_normalization(const RunConfig& cfg, const DerivedQuantities& dq, cd g0) {
    if (cfg.output.normalization == NormalizationMode::StrongDrive) return 0.5;
    (void)dq;
    return std::abs(g0);
}

// tau series for the two series-valued methods
std::vector<cd> method_series(const RunConfig& cfg, std::span<const double> taus) {
    if (cfg.method == Method::TlsExact) return g1_tls_exact(cfg.system, taus);
    TruncationConfig trunc = cfg.truncation;
    trunc.tau_max_ps = taus.empty() ? trunc.tau_max_ps : taus.back();
    auto ws = build_workspace(cfg.system, trunc);
    return g1_numeric(ws, taus);
}

} // namespace

CorrelationModel build_model(const RunConfig& cfg) {
    const auto dq = derive(cfg.system);
    CorrelationModel model;
    switch (cfg.method) {
        case Method::AnalyticSingle:
            model = g1_single_mode(cfg.system, cfg.n_max);
            break;
        case Method::AnalyticFirstReplica:
            model = g1_multimode_first_replica(cfg.system);
            break;
        case Method::AnalyticGeneral:
            model = g1_multimode_general(cfg.system, cfg.weight_threshold);
            break;
        default:
            throw ValidationError("build_model: method " + to_string(cfg.method) +
                                  " has no closed-form correlation model");
    }
    return normalize(std::move(model), dq, cfg.output.normalization);
}

SpectrumResult cmd_spectrum(const RunConfig& cfg) {
    const auto dq = derive(cfg.system);
    auto grid = cfg.grid.make_omega_grid();
    const double eps_laser = cfg.output.laser_linewidth_factor * dq.gamma_meV;

    SpectrumResult result;
    if (cfg.method == Method::Oracle || cfg.method == Method::TlsExact) {
        const TauPlan plan = numeric_tau_plan(cfg.system, dq, cfg.grid.tau_max_ps);
        const auto taus = uniform_grid(plan.tau_max_ps, plan.dt_ps);
        const auto series = method_series(cfg, taus);
        NumericSpectrumOptions opts;
        opts.normalization = series_normalization(cfg, dq, series[0]);
        opts.method = to_string(cfg.method);
        if (cfg.output.include_coherent) opts.render_plateau_linewidth_meV = eps_laser;
        result.spectrum = spectrum_numeric(series, plan.dt_ps, std::move(grid), opts);
    } else {
        CorrelationModel model = build_model(cfg);
        SpectrumOptions opts;
        opts.include_coherent = cfg.output.include_coherent;
        opts.laser_linewidth_meV = eps_laser;
        result.spectrum = spectrum_from_model(model, std::move(grid), opts);
    }

    Table& t = result.table;
    t.name = "spectrum";
    t.metadata.emplace_back("method", result.spectrum.meta.method);
    t.metadata.emplace_back("normalization_mode", result.spectrum.meta.normalization_mode.empty()
                                                      ? (cfg.output.normalization ==
                                                                 NormalizationMode::Exact
                                                             ? "exact"
                                                             : "strong_drive")
                                                      : result.spectrum.meta.normalization_mode);
    t.metadata.emplace_back("normalization", format_double(result.spectrum.meta.normalization));
    t.metadata.emplace_back("dropped_weight", format_double(result.spectrum.meta.dropped_weight));
    t.metadata.emplace_back("pruned_weight", format_double(result.spectrum.meta.pruned_weight));
    t.metadata.emplace_back("coherent_weight", format_double(result.spectrum.meta.coherent_weight));
    t.metadata.emplace_back("include_coherent", cfg.output.include_coherent ? "true" : "false");
    t.columns = {"omega_meV", "intensity"};
    t.rows.reserve(result.spectrum.omega_meV.size());
    for (std::size_t i = 0; i < result.spectrum.omega_meV.size(); ++i)
        t.rows.push_back({result.spectrum.omega_meV[i], result.spectrum.values[i]});
    return result;
}

SweepResult cmd_sweep(const RunConfig& cfg) {
    if (!cfg.sweep) throw ValidationError("cmd_sweep: config has no sweep block");
    const SweepConfig& sw = *cfg.sweep;

    std::vector<double> drives;
    for (int i = 0; i < sw.points; ++i)
        drives.push_back(sw.points == 1 ? sw.omega_from_ueV
                                        : sw.omega_from_ueV + (sw.omega_to_ueV - sw.omega_from_ueV) *
                                                                  i / (sw.points - 1));

    double dipole = sw.dipole_debye;
    if (sw.with_intensity && dipole == 0.0)
        dipole = dipole_from_lifetime_debye(cfg.system.emitter.gamma_ueV,
                                            cfg.system.emitter.emission_wavelength_nm);

    struct PointOut {
        std::vector<std::vector<double>> rows;
        std::string error;
    };
    std::vector<PointOut> outs(drives.size());

    std::mutex next_mutex;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(next_mutex);
                if (next >= drives.size()) return;
                i = next++;
            }
            RunConfig point = cfg;
            point.sweep.reset();
            point.system.drive = DriveConfig::from_ueV(drives[i]);
            try {
                const auto res = cmd_spectrum(point);
                const auto dqp = derive(point.system);
                const double intensity =
                    sw.with_intensity ? intensity_from_rabi_uW_per_um2(drives[i], dipole) : 0.0;
                for (std::size_t k = 0; k < res.spectrum.omega_meV.size(); ++k) {
                    std::vector<double> row{drives[i], ueV_from_meV(dqp.omega_renorm_meV)};
                    if (sw.with_intensity) row.push_back(intensity);
                    row.push_back(res.spectrum.omega_meV[k]);
                    row.push_back(res.spectrum.values[k]);
                    outs[i].rows.push_back(std::move(row));
                }
            } catch (const Error& e) {
                outs[i].error = e.what();
            }
        }
    };
    const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(drives.size())));
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    Table& t = result.table;
    t.name = "sweep";
    t.metadata.emplace_back("method", to_string(cfg.method));
    if (sw.with_intensity) t.metadata.emplace_back("dipole_debye", format_double(dipole));
    t.columns = {"omega_bare_ueV", "omega_renorm_ueV"};
    if (sw.with_intensity) t.columns.push_back("intensity_uW_um2");
    t.columns.push_back("omega_meV");
    t.columns.push_back("intensity");
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (!outs[i].error.empty()) {
            result.failures.push_back("omega_bare_ueV=" + format_double(drives[i]) + ": " +
                                      outs[i].error);
            t.metadata.emplace_back("failed_point_" + std::to_string(i), outs[i].error);
            continue;
        }
        for (auto& row : outs[i].rows) t.rows.push_back(std::move(row));
    }
    return result;
}

CompareResult cmd_compare(const RunConfig& cfg) {
    if (cfg.method == Method::Oracle)
        throw ValidationError("cmd_compare: pick an analytic method to compare against the oracle");
    const auto dq = derive(cfg.system);

    TruncationConfig trunc = cfg.truncation;
    trunc.tau_max_ps = cfg.grid.tau_max_ps;
    auto ws = build_workspace(cfg.system, trunc);
    const auto taus = uniform_grid(cfg.grid.tau_max_ps, ws.tau_grid_dt);

    const auto num = g1_numeric(ws, taus);
    std::vector<cd> ana;
    if (cfg.method == Method::TlsExact) {
        ana = g1_tls_exact(cfg.system, taus);
    } else {
        RunConfig acfg = cfg;
        acfg.output.normalization = NormalizationMode::StrongDrive;  // raw model, scaled below
        const CorrelationModel model = build_model(acfg);
        ana = g1_eval(model, taus);
    }

    const double n0 = std::abs(num[0]);
    const double a0 = std::abs(ana[0]);
    if (n0 == 0.0 || a0 == 0.0)
        throw NumericalError("cmd_compare: vanishing correlation at tau=0");
    std::vector<cd> num_n(num), ana_n(ana);
    for (auto& v : num_n) v /= n0;
    for (auto& v : ana_n) v /= a0;

    CompareResult result;
    result.rmse_value = rmse(std::span<const cd>(ana_n), std::span<const cd>(num_n));
    result.cutoff = cfg.rmse_cutoff;
    result.pass = result.rmse_value <= cfg.rmse_cutoff;

    Table& g1t = result.g1_table;
    g1t.name = "compare_g1";
    g1t.metadata.emplace_back("method", to_string(cfg.method));
    g1t.metadata.emplace_back("rmse", format_double(result.rmse_value));
    g1t.metadata.emplace_back("rmse_cutoff", format_double(cfg.rmse_cutoff));
    g1t.metadata.emplace_back("fock_levels",
                              ws.fock_levels.empty() ? "none"
                                                     : std::to_string(ws.fock_levels[0]));
    g1t.columns = {"tau_ps", "abs_g1_analytic", "abs_g1_numeric", "re_g1_analytic",
                   "im_g1_analytic", "re_g1_numeric", "im_g1_numeric"};
    for (std::size_t i = 0; i < taus.size(); ++i)
        g1t.rows.push_back({taus[i], std::abs(ana_n[i]), std::abs(num_n[i]), ana_n[i].real(),
                            ana_n[i].imag(), num_n[i].real(), num_n[i].imag()});

    // spectra on the shared omega grid
    {
        auto grid = cfg.grid.make_omega_grid();
        RunConfig scfg = cfg;
        const auto ana_spec = [&] {
            if (cfg.method == Method::TlsExact) {
                scfg.method = Method::TlsExact;
                return cmd_spectrum(scfg).spectrum;
            }
            const CorrelationModel model = build_model(scfg);
            SpectrumOptions so;
            so.include_coherent = cfg.output.include_coherent;
            so.laser_linewidth_meV = cfg.output.laser_linewidth_factor * dq.gamma_meV;
            return spectrum_from_model(model, grid, so);
        }();

        const TauPlan plan = numeric_tau_plan(cfg.system, dq, cfg.grid.tau_max_ps);
        const auto long_taus = uniform_grid(plan.tau_max_ps, plan.dt_ps);
        const auto long_num = g1_numeric(ws, long_taus);
        NumericSpectrumOptions nopts;
        nopts.normalization = series_normalization(cfg, dq, long_num[0]);
        if (cfg.output.include_coherent)
            nopts.render_plateau_linewidth_meV = cfg.output.laser_linewidth_factor * dq.gamma_meV;
        const auto num_spec = spectrum_numeric(long_num, plan.dt_ps, grid, nopts);

        Table& st = result.spectra_table;
        st.name = "compare_spectra";
        st.metadata.emplace_back("method", to_string(cfg.method));
        st.columns = {"omega_meV", "intensity_analytic", "intensity_numeric"};
        for (std::size_t i = 0; i < grid.size(); ++i)
            st.rows.push_back({grid[i], ana_spec.values[i], num_spec.values[i]});
    }

    Table& sum = result.summary;
    sum.name = "compare_summary";
    sum.metadata.emplace_back("method", to_string(cfg.method));
    sum.metadata.emplace_back("pass", result.pass ? "true" : "false");
    sum.columns = {"rmse", "rmse_cutoff", "pass"};
    sum.rows.push_back({result.rmse_value, cfg.rmse_cutoff, result.pass ? 1.0 : 0.0});
    return result;
}

Table cmd_criteria(const RunConfig& cfg) {
    const auto dq = derive(cfg.system);
    const double g = dq.gamma_meV, gpd = dq.gamma_pd_meV;

    Table t;
    t.name = "criteria";
    t.metadata.emplace_back("omega_renorm_ueV", format_double(ueV_from_meV(dq.omega_renorm_meV)));
    t.metadata.emplace_back("mollow_splitting_ueV",
                            dq.has_splitting()
                                ? format_double(ueV_from_meV(*dq.mollow_splitting_meV))
                                : "none");
    t.columns = {"mode",       "nu_meV",          "kappa_meV",        "beta",
                 "threshold_ueV", "r_gamma",      "r_amplitude",      "central_fwhm_ueV",
                 "side_fwhm_ueV"};

    auto push_row = [&](int index, double nu, double kappa, double beta, int n) {
        const double thr = resolvability_threshold_meV(g, gpd, n, kappa);
        const auto lw = predicted_linewidths(g, gpd, n, kappa);
        double r_gamma = (g + 2.0 * gpd + n * kappa) / (1.5 * g + gpd + n * kappa);
        double r_amp = std::numeric_limits<double>::quiet_NaN();
        if (dq.has_splitting()) {
            const auto r = triplet_ratios(dq, n, kappa);
            r_gamma = r.r_gamma;
            r_amp = r.r_amplitude;
        }
        t.rows.push_back({static_cast<double>(index), nu, kappa, beta, ueV_from_meV(thr), r_gamma,
                          r_amp, ueV_from_meV(lw.central_fwhm_meV), ueV_from_meV(lw.side_fwhm_meV)});
    };

    push_row(0, 0.0, 0.0, 0.0, 0);  // zero-phonon line
    for (std::size_t j = 0; j < cfg.system.modes.size(); ++j) {
        const auto& m = cfg.system.modes[j];
        push_row(static_cast<int>(j) + 1, m.nu_meV, m.kappa_meV, huang_rhys(m), 1);
    }
    return t;
}

Table cmd_dephasing(const RunConfig& cfg, std::span<const double> temperatures_K) {
    if (temperatures_K.empty()) throw ValidationError("cmd_dephasing: no temperatures given");
    const DephasingModel model = cfg.dephasing.value_or(DBTPreset::dephasing());
    Table t;
    t.name = "dephasing";
    t.metadata.emplace_back("mu_ps5", format_double(model.mu_ps5));
    t.metadata.emplace_back("omega_c_ps_inv", format_double(model.omega_c_ps_inv));
    t.columns = {"T_K", "gamma_pd_ueV", "gamma_pd_over_gamma"};
    for (const double T : temperatures_K) {
        const double gpd = dephasing_rate_ueV(T, model);
        t.rows.push_back({T, gpd, gpd / cfg.system.emitter.gamma_ueV});
    }
    return t;
}

Table cmd_calibrate(const RunConfig& cfg, std::span<const double> omegas_ueV,
                    double dipole_debye_override, double spot_area_um2) {
    if (omegas_ueV.empty()) throw ValidationError("cmd_calibrate: no Rabi frequencies given");
    if (!(spot_area_um2 > 0.0)) throw ValidationError("cmd_calibrate: spot area must be > 0");
    const auto dq = derive(cfg.system);
    const double dipole =
        dipole_debye_override > 0.0
            ? dipole_debye_override
            : dipole_from_lifetime_debye(cfg.system.emitter.gamma_ueV,
                                         cfg.system.emitter.emission_wavelength_nm);

    Table t;
    t.name = "calibrate";
    t.metadata.emplace_back("dipole_debye", format_double(dipole));
    t.metadata.emplace_back("fc_factor", format_double(dq.fc_factor));
    t.metadata.emplace_back("spot_area_um2", format_double(spot_area_um2));
    // intensity_if_renormalized reads the input as the renormalized Rabi
    // frequency and converts through the bare one
    t.columns = {"omega_ueV", "intensity_uW_um2", "power_uW", "intensity_if_renormalized_uW_um2",
                 "roundtrip_omega_ueV"};
    for (const double w : omegas_ueV) {
        const double intensity = intensity_from_rabi_uW_per_um2(w, dipole);
        const double intensity_renorm =
            intensity_from_rabi_uW_per_um2(w / dq.fc_factor, dipole);
        const double roundtrip = rabi_from_intensity_ueV(intensity, dipole);
        t.rows.push_back({w, intensity, intensity * spot_area_um2, intensity_renorm, roundtrip});
    }
    return t;
}

ScanResult cmd_scan_validity(const RunConfig& cfg) {
    if (!cfg.scan) throw ValidationError("cmd_scan_validity: config has no scan block");
    if (cfg.system.modes.size() != 1)
        throw ValidationError("cmd_scan_validity: the scan needs a single-mode base system");

    ScanOptions opts;
    opts.tau_max_ps = cfg.scan->tau_max_ps;
    opts.dt_ps = cfg.scan->dt_ps;
    opts.cutoff = cfg.rmse_cutoff;
    opts.max_system_dim = cfg.truncation.max_system_dim;
    ScanResult result;
    result.scan = validity_scan(cfg.system, cfg.scan->eta_over_nu, cfg.scan->omega_over_eta, opts);

    Table& t = result.table;
    t.name = "validity_scan";
    t.metadata.emplace_back("rmse_cutoff", format_double(opts.cutoff));
    t.metadata.emplace_back("tau_max_ps", format_double(opts.tau_max_ps));
    t.columns = {"eta_over_nu", "omega_over_eta", "rmse", "ok", "fock_levels"};
    for (const auto& p : result.scan.points) {
        t.rows.push_back({p.eta_over_nu, p.omega_over_eta, p.rmse, p.ok ? 1.0 : 0.0,
                          static_cast<double>(p.fock_levels)});
        if (!p.ok)
            t.metadata.emplace_back("failed_point eta/nu=" + format_double(p.eta_over_nu) +
                                        " omega/eta=" + format_double(p.omega_over_eta),
                                    p.error);
    }
    return result;
}

void write_outputs(const RunConfig& cfg, Table table, const std::string& path) {
    if (path.empty()) throw ValidationError("write_outputs: empty output path");
    table.metadata.emplace_back("config_hash", config_hash(cfg));
    const bool json = cfg.output.format == OutputFormat::Json;
    write_table(table, path, json);
    write_text(resolved_json(cfg).dump(2) + "\n", path + ".config.json");
}

} // namespace vmt
