#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "vmt/units.hpp"

namespace vmt {

// Two-level emitter parameters. gamma is the spontaneous-emission rate,
// gamma_pd the pure-dephasing rate; both are stored in ueV as given by the
// user and converted to meV/ps^-1 on demand. The detuning is measured from
// the polaron-shifted line; every analytic path assumes it is zero.
struct EmitterParams {
    double gamma_ueV = 4.1;
    double gamma_pd_ueV = 0.0;
    double emission_wavelength_nm = 745.0;
    double detuning_meV = 0.0;

    double gamma_meV() const { return meV_from_ueV(gamma_ueV); }
    double gamma_pd_meV() const { return meV_from_ueV(gamma_pd_ueV); }

    void validate() const;
};

// One localized vibrational mode: energy nu, linear electron-phonon coupling
// eta, decay rate kappa (all meV).
struct PhononMode {
    double nu_meV = 0.0;
    double eta_meV = 0.0;
    double kappa_meV = 0.0;

    void validate() const;
};

// Huang-Rhys factor (eta/nu)^2 of a single mode.
double huang_rhys(const PhononMode& mode);

// CW drive. Only the bare Rabi frequency enters the model; the unit tag
// records how the user specified it so outputs can echo it back.
struct DriveConfig {
    double omega_meV = 0.0;
    enum class UnitTag { meV, ueV } unit_tag = UnitTag::ueV;

    static DriveConfig from_ueV(double ueV) { return {meV_from_ueV(ueV), UnitTag::ueV}; }
    static DriveConfig from_meV(double meV) { return {meV, UnitTag::meV}; }

    void validate() const;
};

// The composite system: emitter + phonon modes + drive + temperature. All
// computations read their inputs from here. The mode list may be empty
// (bare-atom limit). Spectra are reported relative to the polaron-shifted
// line, so no absolute transition frequency is stored.
struct VibronicSystem {
    EmitterParams emitter;
    std::vector<PhononMode> modes;
    DriveConfig drive;
    double temperature_K = 0.0;

    void validate() const;
};

// Quantities derived from a VibronicSystem. mollow_splitting is absent when
// the renormalized drive is too weak to split the line (no-splitting state);
// lambda_plus/minus are only populated in the splitting regime.
struct DerivedQuantities {
    double beta_tilde = 0.0;                      // sum of Huang-Rhys factors
    double fc_factor = 1.0;                       // exp(-beta_tilde/2)
    double omega_renorm_meV = 0.0;                // fc_factor * omega_bare
    std::optional<double> mollow_splitting_meV;   // sqrt(W^2 - (g/4 - gpd/2)^2)
    double polaron_shift_meV = 0.0;               // sum eta^2/nu
    std::complex<double> lambda_plus{0.0, 0.0};
    std::complex<double> lambda_minus{0.0, 0.0};
    double saturation_s = 0.0;                    // 2 W^2/(gamma Gamma)
    double ratio_a = 1.0;                         // gamma/Gamma
    double big_gamma_meV = 0.0;                   // gamma + 2 gamma_pd
    double gamma_meV = 0.0;
    double gamma_pd_meV = 0.0;

    bool has_splitting() const { return mollow_splitting_meV.has_value(); }
};

// Pure function of the system; identical inputs give bit-identical outputs.
DerivedQuantities derive(const VibronicSystem& system);

// Bose-Einstein occupation of a mode of energy nu_meV at temperature T_K.
// Returns 0 at T = 0.
double thermal_occupation(double nu_meV, double T_K);

} // namespace vmt
