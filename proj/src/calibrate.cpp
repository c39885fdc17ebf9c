#include "vmt/calibrate.hpp"

#include <cmath>

#include "vmt/errors.hpp"
#include "vmt/units.hpp"

namespace vmt {

namespace {

double ueV_to_rad_per_s(double ueV) {
    return ueV * 1e-6 * constants::elementary_charge_C / constants::hbar_J_s;
}

double ueV_to_J(double ueV) { return ueV * 1e-6 * constants::elementary_charge_C; }

} // namespace

void CalibrationInput::validate() const {
    if (!(gamma_ueV > 0.0)) throw ValidationError("calibrate: gamma must be > 0");
    if (!(wavelength_nm > 0.0)) throw ValidationError("calibrate: wavelength must be > 0");
    if (!(dipole_debye >= 0.0)) throw ValidationError("calibrate: dipole must be >= 0");
    if (!(spot_area_um2 > 0.0)) throw ValidationError("calibrate: spot area must be > 0");
}

double dipole_from_lifetime_Cm(double gamma_ueV, double wavelength_nm) {
    if (!(gamma_ueV > 0.0) || !(wavelength_nm > 0.0))
        throw ValidationError("dipole_from_lifetime: inputs must be > 0");
    const double gamma_rad = ueV_to_rad_per_s(gamma_ueV);
    const double lam = wavelength_nm * 1e-9;
    const double d2 = 3.0 * constants::eps0_F_per_m * constants::hbar_J_s * gamma_rad *
                      lam * lam * lam / (8.0 * M_PI * M_PI);
    return std::sqrt(d2);
}

double dipole_from_lifetime_debye(double gamma_ueV, double wavelength_nm) {
    return dipole_from_lifetime_Cm(gamma_ueV, wavelength_nm) / constants::debye_C_m;
}

double intensity_from_rabi_uW_per_um2(double omega_ueV, double dipole_debye) {
    if (!(omega_ueV >= 0.0)) throw ValidationError("intensity_from_rabi: omega must be >= 0");
    if (!(dipole_debye > 0.0)) throw ValidationError("intensity_from_rabi: dipole must be > 0");
    const double d = dipole_debye * constants::debye_C_m;
    const double field = ueV_to_J(omega_ueV) / d;  // V/m
    const double I_W_m2 = 0.5 * constants::eps0_F_per_m * constants::c_m_per_s * field * field;
    return I_W_m2 * 1e-6;  // W/m^2 -> uW/um^2
}

double rabi_from_intensity_ueV(double intensity_uW_per_um2, double dipole_debye) {
    if (!(intensity_uW_per_um2 >= 0.0))
        throw ValidationError("rabi_from_intensity: intensity must be >= 0");
    if (!(dipole_debye > 0.0)) throw ValidationError("rabi_from_intensity: dipole must be > 0");
    const double d = dipole_debye * constants::debye_C_m;
    const double I_W_m2 = intensity_uW_per_um2 * 1e6;
    const double field = std::sqrt(2.0 * I_W_m2 / (constants::eps0_F_per_m * constants::c_m_per_s));
    return field * d / constants::elementary_charge_C * 1e6;
}

} // namespace vmt
