#pragma once

namespace vmt {

// Inputs for the Rabi-frequency <-> laser-intensity mapping.
struct CalibrationInput {
    double gamma_ueV = 0.094;
    double wavelength_nm = 745.0;
    double dipole_debye = 0.0;  // 0 means derive it from the lifetime
    double spot_area_um2 = 1.0;

    void validate() const;
};

// Transition dipole moment from the radiative decay rate,
// d = sqrt(3 eps0 hbar gamma lambda^3 / (8 pi^2)), in Debye.
double dipole_from_lifetime_debye(double gamma_ueV, double wavelength_nm);

// Same, in C*m.
double dipole_from_lifetime_Cm(double gamma_ueV, double wavelength_nm);

// Laser intensity I = (eps0 c / 2) (hbar Omega / d)^2 in uW/um^2.
double intensity_from_rabi_uW_per_um2(double omega_ueV, double dipole_debye);

// Inverse of intensity_from_rabi; the round trip is exact to rounding.
double rabi_from_intensity_ueV(double intensity_uW_per_um2, double dipole_debye);

} // namespace vmt
