#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vmt/model.hpp"
#include "vmt/observables.hpp"
#include "vmt/oracle.hpp"

namespace vmt {

enum class Method { AnalyticSingle, AnalyticFirstReplica, AnalyticGeneral, Oracle, TlsExact };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

enum class OutputFormat { Csv, Json };

struct GridConfig {
    double omega_min_meV = -1.0;
    double omega_max_meV = 1.0;
    double omega_step_meV = 1e-3;
    double tau_max_ps = 30.0;
    double dt_ps = 0.0;  // 0 = auto

    std::vector<double> make_omega_grid() const;
};

struct OutputConfig {
    std::string path;  // empty = stdout summary only
    OutputFormat format = OutputFormat::Csv;
    NormalizationMode normalization = NormalizationMode::StrongDrive;
    bool include_coherent = false;
    double laser_linewidth_factor = 0.01;  // times gamma
};

struct SweepConfig {
    double omega_from_ueV = 0.0;
    double omega_to_ueV = 0.0;
    int points = 0;
    bool with_intensity = true;
    double dipole_debye = 0.0;  // 0 = derive from gamma and wavelength
};

struct ScanConfig {
    std::vector<double> eta_over_nu;
    std::vector<double> omega_over_eta;
    double tau_max_ps = 30.0;
    double dt_ps = 0.05;
};

// Fully resolved run configuration. Exactly one of temperature or an explicit
// dephasing rate is accepted; a temperature is converted through the
// dephasing quadrature at load time.
struct RunConfig {
    VibronicSystem system;
    std::optional<double> temperature_K;
    std::optional<DephasingModel> dephasing;
    Method method = Method::AnalyticFirstReplica;
    bool method_explicit = false;
    GridConfig grid;
    OutputConfig output;
    int n_max = 12;
    double weight_threshold = 1e-6;
    TruncationConfig truncation;
    double rmse_cutoff = 0.05;
    int workers = 1;
    std::optional<SweepConfig> sweep;
    std::optional<ScanConfig> scan;
};

// The embedded dibenzoterrylene (pDCB host) preset: ten local modes, the
// lifetime-limited emitter, and the dephasing constants.
struct DBTPreset {
    static VibronicSystem system();
    static DephasingModel dephasing();
    static constexpr double gamma_ueV = 0.094;
    static constexpr double wavelength_nm = 745.0;
};

// Parse + validate a JSON config document. Unknown keys are rejected;
// "preset": "dbt-pdcb" expands before user keys are applied.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Canonical echo of the fully resolved configuration.
nlohmann::json resolved_json(const RunConfig& cfg);

// FNV-1a 64-bit hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const RunConfig& cfg);

} // namespace vmt
