#pragma once

#include <span>
#include <string>
#include <vector>

#include "vmt/config.hpp"
#include "vmt/output.hpp"

namespace vmt {

// In-process command implementations shared by the CLI and the test suites.
// Each returns its tables; write_outputs() persists them next to the
// configured output path together with the resolved-config echo.

struct SpectrumResult {
    Spectrum spectrum;
    Table table;
};

SpectrumResult cmd_spectrum(const RunConfig& cfg);

struct SweepResult {
    Table table;
    std::vector<std::string> failures;  // recorded per-point errors
};

SweepResult cmd_sweep(const RunConfig& cfg);

struct CompareResult {
    double rmse_value = 0.0;
    double cutoff = 0.05;
    bool pass = false;
    Table g1_table;
    Table spectra_table;
    Table summary;
};

CompareResult cmd_compare(const RunConfig& cfg);

Table cmd_criteria(const RunConfig& cfg);

Table cmd_dephasing(const RunConfig& cfg, std::span<const double> temperatures_K);

Table cmd_calibrate(const RunConfig& cfg, std::span<const double> omegas_ueV,
                    double dipole_debye_override = 0.0, double spot_area_um2 = 1.0);

struct ScanResult {
    ValidityScan scan;
    Table table;
};

ScanResult cmd_scan_validity(const RunConfig& cfg);

// Correlation model for the analytic methods (throws for Oracle/TlsExact).
CorrelationModel build_model(const RunConfig& cfg);

// Writes one table to <path> in the configured format and the resolved config
// echo to <path>.config.json. Every table gets the config hash stamped into
// its metadata first.
void write_outputs(const RunConfig& cfg, Table table, const std::string& path);

} // namespace vmt
