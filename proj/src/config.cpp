#include "vmt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vmt/errors.hpp"

namespace vmt {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

double num(const json& obj, const std::string& key, double fallback, bool* present = nullptr) {
    if (!obj.contains(key)) {
        if (present) *present = false;
        return fallback;
    }
    if (!obj[key].is_number())
        throw ValidationError("config: '" + key + "' must be a number");
    if (present) *present = true;
    return obj[key].get<double>();
}

} // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::AnalyticSingle: return "analytic_single";
        case Method::AnalyticFirstReplica: return "analytic_first_replica";
        case Method::AnalyticGeneral: return "analytic_general";
        case Method::Oracle: return "oracle";
        case Method::TlsExact: return "tls_exact";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "analytic_single") return Method::AnalyticSingle;
    if (s == "analytic_first_replica") return Method::AnalyticFirstReplica;
    if (s == "analytic_general") return Method::AnalyticGeneral;
    if (s == "oracle") return Method::Oracle;
    if (s == "tls_exact") return Method::TlsExact;
    throw ValidationError("config: unknown method '" + s + "'");
}

std::vector<double> GridConfig::make_omega_grid() const {
    if (!(omega_step_meV > 0.0)) throw ValidationError("grid: omega_step must be > 0");
    if (!(omega_max_meV > omega_min_meV))
        throw ValidationError("grid: omega range is empty");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>((omega_max_meV - omega_min_meV) / omega_step_meV) + 1;
    if (n < 2) throw ValidationError("grid: omega grid has fewer than 2 points");
    g.reserve(n);
    for (std::size_t i = 0; i < n; ++i) g.push_back(omega_min_meV + i * omega_step_meV);
    return g;
}

VibronicSystem DBTPreset::system() {
    VibronicSystem s;
    s.emitter.gamma_ueV = gamma_ueV;
    s.emitter.gamma_pd_ueV = 0.0;
    s.emitter.emission_wavelength_nm = wavelength_nm;
    // local vibrational modes of DBT in para-dichlorobenzene, meV
    s.modes = {
        {22.01, 4.17, 0.129}, {28.98, 6.06, 0.156}, {35.67, 2.83, 0.035},
        {35.93, 10.78, 0.037}, {49.98, 6.00, 0.054}, {56.95, 7.25, 0.060},
        {83.13, 9.33, 0.016}, {94.89, 6.37, 0.028}, {95.28, 7.00, 0.033},
        {97.27, 10.91, 0.060},
    };
    s.drive = DriveConfig::from_ueV(10.0 * gamma_ueV);
    return s;
}

DephasingModel DBTPreset::dephasing() { return {4.7e-7, 8.6}; }

RunConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config: document must be a JSON object");
    reject_unknown(doc, {"preset", "emitter", "modes", "drive", "temperature_K", "dephasing",
                         "method", "grid", "n_max", "weight_threshold", "oracle", "output",
                         "rmse_cutoff", "workers", "sweep", "scan"},
                   "top level");

    RunConfig cfg;
    bool preset_used = false;
    if (doc.contains("preset")) {
        const std::string p = doc["preset"].get<std::string>();
        if (p != "dbt-pdcb") throw ValidationError("config: unknown preset '" + p + "'");
        cfg.system = DBTPreset::system();
        cfg.dephasing = DBTPreset::dephasing();
        preset_used = true;
    }

    bool gamma_pd_given = false;
    if (doc.contains("emitter")) {
        const json& e = doc["emitter"];
        reject_unknown(e, {"gamma_ueV", "gamma_pd_ueV", "wavelength_nm", "detuning_meV"}, "emitter");
        cfg.system.emitter.gamma_ueV = num(e, "gamma_ueV", cfg.system.emitter.gamma_ueV);
        cfg.system.emitter.gamma_pd_ueV =
            num(e, "gamma_pd_ueV", cfg.system.emitter.gamma_pd_ueV, &gamma_pd_given);
        cfg.system.emitter.emission_wavelength_nm =
            num(e, "wavelength_nm", cfg.system.emitter.emission_wavelength_nm);
        cfg.system.emitter.detuning_meV = num(e, "detuning_meV", cfg.system.emitter.detuning_meV);
    } else if (!preset_used) {
        throw ValidationError("config: 'emitter' block (or a preset) is required");
    }

    if (doc.contains("modes")) {
        if (!doc["modes"].is_array()) throw ValidationError("config: 'modes' must be an array");
        cfg.system.modes.clear();
        for (const auto& m : doc["modes"]) {
            reject_unknown(m, {"nu_meV", "eta_meV", "kappa_meV"}, "modes[]");
            PhononMode mode;
            mode.nu_meV = num(m, "nu_meV", 0.0);
            mode.eta_meV = num(m, "eta_meV", 0.0);
            mode.kappa_meV = num(m, "kappa_meV", 0.0);
            cfg.system.modes.push_back(mode);
        }
    }

    if (doc.contains("drive")) {
        const json& d = doc["drive"];
        reject_unknown(d, {"omega_ueV", "omega_meV", "omega_over_gamma"}, "drive");
        const int given = d.contains("omega_ueV") + d.contains("omega_meV") +
                          d.contains("omega_over_gamma");
        if (given != 1)
            throw ValidationError("config: drive needs exactly one of omega_ueV, omega_meV, "
                                  "omega_over_gamma");
        if (d.contains("omega_ueV"))
            cfg.system.drive = DriveConfig::from_ueV(num(d, "omega_ueV", 0.0));
        else if (d.contains("omega_meV"))
            cfg.system.drive = DriveConfig::from_meV(num(d, "omega_meV", 0.0));
        else
            cfg.system.drive = DriveConfig::from_ueV(num(d, "omega_over_gamma", 0.0) *
                                                     cfg.system.emitter.gamma_ueV);
    } else if (!preset_used) {
        throw ValidationError("config: 'drive' block is required");
    }

    if (doc.contains("dephasing")) {
        const json& d = doc["dephasing"];
        reject_unknown(d, {"mu_ps5", "omega_c_ps_inv"}, "dephasing");
        DephasingModel m;
        m.mu_ps5 = num(d, "mu_ps5", 4.7e-7);
        m.omega_c_ps_inv = num(d, "omega_c_ps_inv", 8.6);
        cfg.dephasing = m;
    }

    if (doc.contains("temperature_K")) {
        if (gamma_pd_given)
            throw ValidationError("config: give either temperature_K or emitter.gamma_pd_ueV, "
                                  "not both");
        const double T = doc["temperature_K"].get<double>();
        if (!(T >= 0.0)) throw ValidationError("config: temperature must be >= 0");
        if (!cfg.dephasing)
            throw ValidationError("config: temperature_K requires a 'dephasing' block "
                                  "(or the dbt-pdcb preset)");
        cfg.temperature_K = T;
        cfg.system.temperature_K = T;
        cfg.system.emitter.gamma_pd_ueV = dephasing_rate_ueV(T, *cfg.dephasing);
    }

    if (doc.contains("method")) {
        cfg.method = method_from_string(doc["method"].get<std::string>());
        cfg.method_explicit = true;
    } else {
        cfg.method = cfg.system.modes.empty()
                         ? Method::TlsExact
                         : (cfg.system.modes.size() == 1 ? Method::AnalyticSingle
                                                         : Method::AnalyticFirstReplica);
    }

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        reject_unknown(g, {"omega_min_meV", "omega_max_meV", "omega_step_meV", "tau_max_ps",
                           "dt_ps"},
                       "grid");
        cfg.grid.omega_min_meV = num(g, "omega_min_meV", cfg.grid.omega_min_meV);
        cfg.grid.omega_max_meV = num(g, "omega_max_meV", cfg.grid.omega_max_meV);
        cfg.grid.omega_step_meV = num(g, "omega_step_meV", cfg.grid.omega_step_meV);
        cfg.grid.tau_max_ps = num(g, "tau_max_ps", cfg.grid.tau_max_ps);
        cfg.grid.dt_ps = num(g, "dt_ps", cfg.grid.dt_ps);
    }

    if (doc.contains("n_max")) {
        cfg.n_max = doc["n_max"].get<int>();
        if (cfg.n_max < 0) throw ValidationError("config: n_max must be >= 0");
    }
    if (doc.contains("weight_threshold")) {
        cfg.weight_threshold = doc["weight_threshold"].get<double>();
        if (!(cfg.weight_threshold > 0.0 && cfg.weight_threshold < 1.0))
            throw ValidationError("config: weight_threshold must be in (0,1)");
    }

    if (doc.contains("oracle")) {
        const json& o = doc["oracle"];
        reject_unknown(o, {"fock_levels", "max_system_dim", "steady_state"}, "oracle");
        if (o.contains("fock_levels"))
            cfg.truncation.fock_levels = o["fock_levels"].get<std::vector<int>>();
        if (o.contains("max_system_dim"))
            cfg.truncation.max_system_dim = o["max_system_dim"].get<int>();
        if (o.contains("steady_state")) {
            const std::string s = o["steady_state"].get<std::string>();
            if (s == "null-space")
                cfg.truncation.steady_state_method = TruncationConfig::SteadyStateMethod::NullSpace;
            else if (s == "long-time-propagation")
                cfg.truncation.steady_state_method =
                    TruncationConfig::SteadyStateMethod::LongTimePropagation;
            else
                throw ValidationError("config: oracle.steady_state must be 'null-space' or "
                                      "'long-time-propagation'");
        }
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        reject_unknown(o, {"path", "format", "normalization", "include_coherent",
                           "laser_linewidth_factor"},
                       "output");
        if (o.contains("path")) cfg.output.path = o["path"].get<std::string>();
        if (o.contains("format")) {
            const std::string f = o["format"].get<std::string>();
            if (f == "csv") cfg.output.format = OutputFormat::Csv;
            else if (f == "json") cfg.output.format = OutputFormat::Json;
            else throw ValidationError("config: output.format must be csv or json");
        }
        if (o.contains("normalization")) {
            const std::string nm = o["normalization"].get<std::string>();
            if (nm == "exact") cfg.output.normalization = NormalizationMode::Exact;
            else if (nm == "strong_drive") cfg.output.normalization = NormalizationMode::StrongDrive;
            else throw ValidationError("config: output.normalization must be exact or strong_drive");
        }
        if (o.contains("include_coherent"))
            cfg.output.include_coherent = o["include_coherent"].get<bool>();
        cfg.output.laser_linewidth_factor =
            num(o, "laser_linewidth_factor", cfg.output.laser_linewidth_factor);
        if (!(cfg.output.laser_linewidth_factor > 0.0))
            throw ValidationError("config: laser_linewidth_factor must be > 0");
    }

    if (doc.contains("rmse_cutoff")) {
        cfg.rmse_cutoff = doc["rmse_cutoff"].get<double>();
        if (!(cfg.rmse_cutoff > 0.0)) throw ValidationError("config: rmse_cutoff must be > 0");
    }
    if (doc.contains("workers")) {
        cfg.workers = doc["workers"].get<int>();
        if (cfg.workers < 1) throw ValidationError("config: workers must be >= 1");
    }

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        reject_unknown(s, {"omega_from_ueV", "omega_to_ueV", "points", "with_intensity",
                           "dipole_debye"},
                       "sweep");
        SweepConfig sw;
        sw.omega_from_ueV = num(s, "omega_from_ueV", 0.0);
        sw.omega_to_ueV = num(s, "omega_to_ueV", 0.0);
        sw.points = s.contains("points") ? s["points"].get<int>() : 0;
        if (s.contains("with_intensity")) sw.with_intensity = s["with_intensity"].get<bool>();
        sw.dipole_debye = num(s, "dipole_debye", 0.0);
        if (sw.points < 1) throw ValidationError("config: sweep.points must be >= 1");
        if (sw.points > 1 && !(sw.omega_to_ueV > sw.omega_from_ueV))
            throw ValidationError("config: sweep omega range is empty");
        cfg.sweep = sw;
    }

    if (doc.contains("scan")) {
        const json& s = doc["scan"];
        reject_unknown(s, {"eta_over_nu", "omega_over_eta", "tau_max_ps", "dt_ps"}, "scan");
        ScanConfig sc;
        if (s.contains("eta_over_nu")) sc.eta_over_nu = s["eta_over_nu"].get<std::vector<double>>();
        if (s.contains("omega_over_eta"))
            sc.omega_over_eta = s["omega_over_eta"].get<std::vector<double>>();
        sc.tau_max_ps = num(s, "tau_max_ps", sc.tau_max_ps);
        sc.dt_ps = num(s, "dt_ps", sc.dt_ps);
        if (sc.eta_over_nu.empty() || sc.omega_over_eta.empty())
            throw ValidationError("config: scan needs eta_over_nu and omega_over_eta grids");
        cfg.scan = sc;
    }

    cfg.truncation.tau_max_ps = cfg.grid.tau_max_ps;
    cfg.truncation.dt_ps = cfg.grid.dt_ps;
    cfg.system.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open " + path);
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("config: parse error in " + path + ": " + e.what());
    }
    return config_from_json(doc);
}

nlohmann::json resolved_json(const RunConfig& cfg) {
    json j;
    json emitter;
    emitter["gamma_ueV"] = cfg.system.emitter.gamma_ueV;
    emitter["gamma_pd_ueV"] = cfg.system.emitter.gamma_pd_ueV;
    emitter["wavelength_nm"] = cfg.system.emitter.emission_wavelength_nm;
    emitter["detuning_meV"] = cfg.system.emitter.detuning_meV;
    j["emitter"] = emitter;
    json modes = json::array();
    for (const auto& m : cfg.system.modes) {
        json mode;
        mode["nu_meV"] = m.nu_meV;
        mode["eta_meV"] = m.eta_meV;
        mode["kappa_meV"] = m.kappa_meV;
        modes.push_back(mode);
    }
    j["modes"] = modes;
    j["drive"]["omega_meV"] = cfg.system.drive.omega_meV;
    if (cfg.temperature_K) j["temperature_K"] = *cfg.temperature_K;
    if (cfg.dephasing) {
        j["dephasing"]["mu_ps5"] = cfg.dephasing->mu_ps5;
        j["dephasing"]["omega_c_ps_inv"] = cfg.dephasing->omega_c_ps_inv;
    }
    j["method"] = to_string(cfg.method);
    j["grid"]["omega_min_meV"] = cfg.grid.omega_min_meV;
    j["grid"]["omega_max_meV"] = cfg.grid.omega_max_meV;
    j["grid"]["omega_step_meV"] = cfg.grid.omega_step_meV;
    j["grid"]["tau_max_ps"] = cfg.grid.tau_max_ps;
    j["grid"]["dt_ps"] = cfg.grid.dt_ps;
    j["n_max"] = cfg.n_max;
    j["weight_threshold"] = cfg.weight_threshold;
    j["oracle"]["fock_levels"] = cfg.truncation.fock_levels;
    j["oracle"]["max_system_dim"] = cfg.truncation.max_system_dim;
    j["oracle"]["steady_state"] =
        cfg.truncation.steady_state_method == TruncationConfig::SteadyStateMethod::NullSpace
            ? "null-space"
            : "long-time-propagation";
    j["output"]["format"] = cfg.output.format == OutputFormat::Csv ? "csv" : "json";
    j["output"]["normalization"] =
        cfg.output.normalization == NormalizationMode::Exact ? "exact" : "strong_drive";
    j["output"]["include_coherent"] = cfg.output.include_coherent;
    j["output"]["laser_linewidth_factor"] = cfg.output.laser_linewidth_factor;
    j["rmse_cutoff"] = cfg.rmse_cutoff;
    j["workers"] = cfg.workers;
    if (cfg.sweep) {
        j["sweep"]["omega_from_ueV"] = cfg.sweep->omega_from_ueV;
        j["sweep"]["omega_to_ueV"] = cfg.sweep->omega_to_ueV;
        j["sweep"]["points"] = cfg.sweep->points;
        j["sweep"]["with_intensity"] = cfg.sweep->with_intensity;
        j["sweep"]["dipole_debye"] = cfg.sweep->dipole_debye;
    }
    if (cfg.scan) {
        j["scan"]["eta_over_nu"] = cfg.scan->eta_over_nu;
        j["scan"]["omega_over_eta"] = cfg.scan->omega_over_eta;
        j["scan"]["tau_max_ps"] = cfg.scan->tau_max_ps;
        j["scan"]["dt_ps"] = cfg.scan->dt_ps;
    }
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string s = resolved_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

} // namespace vmt
