#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmt/commands.hpp"
#include "vmt/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out;
    std::string format;
    int workers = 0;
    double rmse_cutoff = 0.0;
};

void add_common(CLI::App* app, CommonArgs& args) {
    app->add_option("--config", args.config_path, "JSON configuration file");
    app->add_option("--preset", args.preset, "built-in preset name (dbt-pdcb)");
    app->add_option("--out", args.out, "output file path");
    app->add_option("--format", args.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--workers", args.workers, "worker threads for sweeps");
    app->add_option("--rmse-cutoff", args.rmse_cutoff, "comparison RMSE cutoff");
}

vmt::RunConfig resolve_config(const CommonArgs& args) {
    nlohmann::json doc = nlohmann::json::object();
    if (!args.config_path.empty()) {
        std::ifstream is(args.config_path);
        if (!is) throw vmt::ValidationError("cannot open config: " + args.config_path);
        doc = nlohmann::json::parse(is);
    }
    if (!args.preset.empty()) doc["preset"] = args.preset;
    vmt::RunConfig cfg = vmt::config_from_json(doc);
    if (!args.format.empty())
        cfg.output.format = args.format == "json" ? vmt::OutputFormat::Json : vmt::OutputFormat::Csv;
    if (!args.out.empty()) cfg.output.path = args.out;
    if (args.workers > 0) cfg.workers = args.workers;
    if (args.rmse_cutoff > 0.0) cfg.rmse_cutoff = args.rmse_cutoff;
    return cfg;
}

void emit_or_print(const vmt::RunConfig& cfg, const vmt::Table& t, const std::string& suffix = "") {
    if (cfg.output.path.empty()) {
        std::cout << vmt::to_csv(t);
        return;
    }
    std::string path = cfg.output.path + suffix;
    vmt::write_outputs(cfg, t, path);
    std::cout << "wrote " << path << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vmt: resonance-fluorescence spectra of vibronically coupled emitters"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, sweep_args, compare_args, criteria_args, dephasing_args,
        calibrate_args, scan_args;

    auto* sp = app.add_subcommand("spectrum", "emission spectrum for one configuration");
    add_common(sp, spectrum_args);

    auto* sw = app.add_subcommand("sweep", "spectra over a range of drive strengths");
    add_common(sw, sweep_args);
    double sweep_from = 0.0, sweep_to = 0.0;
    int sweep_points = 0;
    bool sweep_no_intensity = false;
    sw->add_option("--omega-from-ueV", sweep_from, "sweep start (bare Rabi, ueV)");
    sw->add_option("--omega-to-ueV", sweep_to, "sweep end (bare Rabi, ueV)");
    sw->add_option("--points", sweep_points, "number of sweep points");
    sw->add_flag("--no-intensity", sweep_no_intensity, "omit the laser-intensity column");

    auto* cp = app.add_subcommand("compare", "analytic vs oracle correlation and spectra");
    add_common(cp, compare_args);

    auto* cr = app.add_subcommand("criteria", "per-mode resolvability thresholds and ratios");
    add_common(cr, criteria_args);

    auto* dp = app.add_subcommand("dephasing", "temperature-dependent pure dephasing table");
    add_common(dp, dephasing_args);
    std::vector<double> temps;
    dp->add_option("--T", temps, "temperatures in K");

    auto* cl = app.add_subcommand("calibrate", "Rabi frequency <-> laser intensity");
    add_common(cl, calibrate_args);
    std::vector<double> cal_omegas;
    double cal_dipole = 0.0, cal_area = 1.0;
    cl->add_option("--omega-ueV", cal_omegas, "Rabi frequencies in ueV");
    cl->add_option("--dipole-debye", cal_dipole, "dipole override in Debye");
    cl->add_option("--spot-area-um2", cal_area, "laser spot area in um^2");

    auto* sc = app.add_subcommand("scan-validity", "RMSE map over coupling and drive ratios");
    add_common(sc, scan_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sp->parsed()) {
            const auto cfg = resolve_config(spectrum_args);
            const auto res = vmt::cmd_spectrum(cfg);
            emit_or_print(cfg, res.table);
        } else if (sw->parsed()) {
            auto cfg = resolve_config(sweep_args);
            if (sweep_points > 0) {
                vmt::SweepConfig swc;
                swc.omega_from_ueV = sweep_from;
                swc.omega_to_ueV = sweep_to;
                swc.points = sweep_points;
                swc.with_intensity = !sweep_no_intensity;
                cfg.sweep = swc;
            }
            const auto res = vmt::cmd_sweep(cfg);
            emit_or_print(cfg, res.table);
            for (const auto& f : res.failures) std::cerr << "point failed: " << f << "\n";
        } else if (cp->parsed()) {
            const auto cfg = resolve_config(compare_args);
            const auto res = vmt::cmd_compare(cfg);
            if (cfg.output.path.empty()) {
                std::cout << vmt::to_csv(res.summary);
            } else {
                vmt::write_outputs(cfg, res.g1_table, cfg.output.path + ".g1.csv");
                vmt::write_outputs(cfg, res.spectra_table, cfg.output.path + ".spectra.csv");
                vmt::write_outputs(cfg, res.summary, cfg.output.path + ".summary.csv");
                std::cout << "wrote " << cfg.output.path << ".{g1,spectra,summary}.csv\n";
            }
            std::printf("rmse = %.6g (cutoff %.3g): %s\n", res.rmse_value, res.cutoff,
                        res.pass ? "PASS" : "FAIL");
            if (!res.pass) return 3;
        } else if (cr->parsed()) {
            const auto cfg = resolve_config(criteria_args);
            emit_or_print(cfg, vmt::cmd_criteria(cfg));
        } else if (dp->parsed()) {
            const auto cfg = resolve_config(dephasing_args);
            if (temps.empty()) temps = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 11.5};
            emit_or_print(cfg, vmt::cmd_dephasing(cfg, temps));
        } else if (cl->parsed()) {
            const auto cfg = resolve_config(calibrate_args);
            if (cal_omegas.empty()) throw vmt::ValidationError("calibrate: give --omega-ueV");
            emit_or_print(cfg, vmt::cmd_calibrate(cfg, cal_omegas, cal_dipole, cal_area));
        } else if (sc->parsed()) {
            const auto cfg = resolve_config(scan_args);
            const auto res = vmt::cmd_scan_validity(cfg);
            emit_or_print(cfg, res.table);
        }
    } catch (const vmt::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const vmt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const vmt::ComparisonError& e) {
        std::cerr << "comparison failed: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
