#include "vmt/model.hpp"

#include <cmath>
#include <string>

#include "vmt/errors.hpp"

namespace vmt {

void EmitterParams::validate() const {
    if (!(gamma_ueV > 0.0))
        throw ValidationError("emitter: gamma must be > 0 (got " + std::to_string(gamma_ueV) + " ueV)");
    if (!(gamma_pd_ueV >= 0.0))
        throw ValidationError("emitter: gamma_pd must be >= 0");
    if (!(emission_wavelength_nm > 0.0))
        throw ValidationError("emitter: emission wavelength must be > 0");
    if (!std::isfinite(detuning_meV))
        throw ValidationError("emitter: detuning must be finite");
}

void PhononMode::validate() const {
    if (!(nu_meV > 0.0))
        throw ValidationError("phonon mode: nu must be > 0 (got " + std::to_string(nu_meV) + " meV)");
    if (!(eta_meV >= 0.0))
        throw ValidationError("phonon mode: eta must be >= 0");
    if (!(kappa_meV >= 0.0))
        throw ValidationError("phonon mode: kappa must be >= 0");
    if (!std::isfinite(huang_rhys(*this)))
        throw ValidationError("phonon mode: Huang-Rhys factor not finite");
}

double huang_rhys(const PhononMode& mode) {
    const double r = mode.eta_meV / mode.nu_meV;
    return r * r;
}

void DriveConfig::validate() const {
    if (!(omega_meV >= 0.0))
        throw ValidationError("drive: omega must be >= 0");
}

void VibronicSystem::validate() const {
    emitter.validate();
    drive.validate();
    for (const auto& m : modes) m.validate();
    if (!(temperature_K >= 0.0))
        throw ValidationError("system: temperature must be >= 0");
}

DerivedQuantities derive(const VibronicSystem& system) {
    system.validate();
    DerivedQuantities dq;
    dq.gamma_meV = system.emitter.gamma_meV();
    dq.gamma_pd_meV = system.emitter.gamma_pd_meV();
    dq.big_gamma_meV = dq.gamma_meV + 2.0 * dq.gamma_pd_meV;

    for (const auto& m : system.modes) {
        dq.beta_tilde += huang_rhys(m);
        dq.polaron_shift_meV += m.eta_meV * m.eta_meV / m.nu_meV;
    }
    dq.fc_factor = std::exp(-dq.beta_tilde / 2.0);
    dq.omega_renorm_meV = dq.fc_factor * system.drive.omega_meV;

    const double w = dq.omega_renorm_meV;
    const double gap = dq.gamma_meV / 4.0 - dq.gamma_pd_meV / 2.0;
    dq.saturation_s = 2.0 * w * w / (dq.gamma_meV * dq.big_gamma_meV);
    dq.ratio_a = dq.gamma_meV / dq.big_gamma_meV;

    const double radicand = w * w - gap * gap;
    if (radicand > 0.0) {
        const double wg = std::sqrt(radicand);
        dq.mollow_splitting_meV = wg;
        // Lambda_a = W^2 / (8 Wg^2 + 2 a i Wg (gamma - 2 gamma_pd))
        const double diff = dq.gamma_meV - 2.0 * dq.gamma_pd_meV;
        const std::complex<double> den_p(8.0 * wg * wg, 2.0 * wg * diff);
        const std::complex<double> den_m(8.0 * wg * wg, -2.0 * wg * diff);
        dq.lambda_plus = w * w / den_p;
        dq.lambda_minus = w * w / den_m;
    }
    return dq;
}

double thermal_occupation(double nu_meV, double T_K) {
    if (!(nu_meV > 0.0)) throw ValidationError("thermal_occupation: nu must be > 0");
    if (!(T_K >= 0.0)) throw ValidationError("thermal_occupation: T must be >= 0");
    if (T_K == 0.0) return 0.0;
    const double x = nu_meV / (constants::kB_meV_per_K * T_K);
    // expm1 keeps the classical limit accurate; huge x underflows to 0.
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

} // namespace vmt
