#pragma once

namespace vmt {

// Unit conventions used throughout the library: energies and rates are stored
// in meV, times in ps. Angular frequencies in ps^-1 are obtained by dividing
// an energy by hbar. User-facing decay rates are accepted in ueV and converted
// at the boundary.
namespace constants {

inline constexpr double hbar_meV_ps = 0.6582119569;   // meV*ps
inline constexpr double kB_meV_per_K = 0.08617333;    // meV/K

// SI values for the laser-power calibration.
inline constexpr double hbar_J_s = 1.054571817e-34;
inline constexpr double eps0_F_per_m = 8.8541878128e-12;
inline constexpr double c_m_per_s = 2.99792458e8;
inline constexpr double elementary_charge_C = 1.602176634e-19;
inline constexpr double debye_C_m = 3.33564e-30;

} // namespace constants

// meV -> angular frequency in ps^-1
inline constexpr double rate_from_meV(double energy_meV) {
    return energy_meV / constants::hbar_meV_ps;
}

// angular frequency in ps^-1 -> meV
inline constexpr double meV_from_rate(double rate_ps) {
    return rate_ps * constants::hbar_meV_ps;
}

inline constexpr double meV_from_ueV(double ueV) { return 1e-3 * ueV; }
inline constexpr double ueV_from_meV(double meV) { return 1e3 * meV; }

} // namespace vmt
