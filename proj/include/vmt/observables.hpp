#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vmt/analytic.hpp"
#include "vmt/model.hpp"

namespace vmt {

// Result of a Lorentzian fit. Area is the full analytic area pi*height*HWHM
// of the fitted profile, so window truncation does not bias it. residual is
// the rms misfit relative to the rms signal in the window.
struct PeakFit {
    double center_meV = 0.0;
    double fwhm_meV = 0.0;
    double height = 0.0;
    double area = 0.0;
    double residual = 0.0;
    bool converged = false;
};

// Temperature-dependent pure-dephasing model: quadrature prefactor mu and
// acoustic cutoff omega_c.
struct DephasingModel {
    double mu_ps5 = 4.7e-7;
    double omega_c_ps_inv = 8.6;

    void validate() const;
};

// Minimum renormalized Rabi frequency resolving the n-th replica triplet of a
// mode with decay kappa: (1/4) sqrt((g-2gpd)^2 + (4nk + 5g + 6gpd)^2).
double resolvability_threshold_meV(double gamma_meV, double gamma_pd_meV, int n, double kappa_meV);

struct TripletRatios {
    double r_gamma = 0.0;      // central/side linewidth ratio
    double r_amplitude = 0.0;  // central/side height ratio
};

// Linewidth and amplitude ratios of the n-th replica triplet. The |8 Lambda|
// factor is evaluated exactly from the derived quantities (it equals
// omega_renorm / splitting), not approximated by 1.
TripletRatios triplet_ratios(const DerivedQuantities& dq, int n, double kappa_meV);

struct Linewidths {
    double central_fwhm_meV = 0.0;  // gamma + 2 gamma_pd + n kappa
    double side_fwhm_meV = 0.0;     // (3 gamma + 2 gamma_pd + 2 n kappa)/2
};

Linewidths predicted_linewidths(double gamma_meV, double gamma_pd_meV, int n, double kappa_meV);

// Fit window: initial center and FWHM guess for one peak.
struct FitWindow {
    double center_meV = 0.0;
    double fwhm_guess_meV = 0.0;
};

struct FitOptions {
    bool dispersive = true;   // include the odd component of a complex Lorentzian
    int max_iterations = 400;
    double window_halfwidth_factor = 4.0;  // fit slice = center +- factor*fwhm_guess
    double residual_threshold = 0.25;      // above this the fit is flagged unconverged
};

// Joint least-squares fit of several Lorentzians plus a constant baseline on
// the grid slice [lo_meV, hi_meV]. Deterministic: fixed initialization from
// the guesses and a fixed iteration budget.
std::vector<PeakFit> fit_lorentzians(const Spectrum& spec, double lo_meV, double hi_meV,
                                     std::span<const FitWindow> peaks, const FitOptions& opts = {});

// One independent single-Lorentzian fit per window. Windows must be disjoint
// and each FWHM must be resolved by at least 8 grid points. Non-convergence
// is flagged on the result, not thrown.
std::vector<PeakFit> fit_peaks(const Spectrum& spec, std::span<const FitWindow> windows,
                               const FitOptions& opts = {});

// Number of local maxima in [lo_meV, hi_meV] whose prominence exceeds
// rel_prominence times the window maximum.
int count_local_maxima(const Spectrum& spec, double lo_meV, double hi_meV,
                       double rel_prominence = 0.005);

// Pure-dephasing rate gamma_pd(T) in ueV from the phonon-scattering
// quadrature. The integrand is even in omega and the integral runs over the
// full line; it is evaluated as twice the [0, 50 omega_c] adaptive quadrature
// in ps^-1 units and converted. Returns 0 exactly at T = 0.
double dephasing_rate_ueV(double T_K, const DephasingModel& model);

// Adaptive Gauss-Kronrod 15(7) quadrature, relative tolerance rtol.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rtol, double atol = 0.0);

} // namespace vmt
