#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "vmt/analytic.hpp"
#include "vmt/model.hpp"

namespace vmt {

// Truncation and propagation settings for the exact reference computation.
struct TruncationConfig {
    std::vector<int> fock_levels;  // per mode; empty selects the Poisson-tail default
    double tau_max_ps = 30.0;
    double dt_ps = 0.0;            // 0 selects a step resolving the fastest mode
    enum class SteadyStateMethod { NullSpace, LongTimePropagation };
    SteadyStateMethod steady_state_method = SteadyStateMethod::NullSpace;
    int max_system_dim = 40;       // cap on 2 * prod(fock_levels)

    void validate(const VibronicSystem& system) const;
};

// Smallest Fock dimension whose Poisson tail sum_{n >= N-2} e^-b b^n/n! is
// below 1e-8, with a floor of 8 levels.
int default_fock_levels(double beta);

// Truncated operator set, Liouvillian and cached decompositions for one
// system. Build once, then query; a workspace is used by one thread at a time.
struct OracleWorkspace {
    VibronicSystem system;
    TruncationConfig trunc;
    std::vector<int> fock_levels;
    int dim = 0;  // 2 * prod(fock_levels)

    Eigen::MatrixXcd sigma_b_minus;      // collapse operator sigma B-
    Eigen::MatrixXcd sigma_dag_b_plus;
    Eigen::MatrixXcd excited_projector;  // sigma^dag sigma
    std::vector<Eigen::MatrixXcd> lowering_ops;  // b_j on the full space
    Eigen::MatrixXcd liouvillian;        // D^2 x D^2, ps^-1

    double displacement_deviation = 0.0;  // ||P(B+ B- - 1)P|| truncation diagnostic
    double tau_grid_dt = 0.0;             // resolved dt

    // cached eigendecomposition of the Liouvillian
    bool eig_ready = false;
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    bool lu_ready = false;
    Eigen::PartialPivLU<Eigen::MatrixXcd> eigenvector_lu;

    // cached steady state
    bool steady_ready = false;
    Eigen::MatrixXcd rho_ss;
    double leakage = 0.0;  // population of the highest kept Fock level
};

// Builds operators and the Liouvillian. Throws NumericalError when the
// displacement truncation diagnostic exceeds 1e-6.
OracleWorkspace build_workspace(const VibronicSystem& system, TruncationConfig trunc = {});

// Steady state (unit trace, Hermitian). Null-space method reads it off the
// Liouvillian eigendecomposition and verifies ||L rho|| < 1e-10 ||L||;
// degenerate null spaces are an error.
const Eigen::MatrixXcd& steady_state(OracleWorkspace& ws);

// exp(L tau) applied to an arbitrary operator, via the eigendecomposition.
Eigen::MatrixXcd propagate(OracleWorkspace& ws, const Eigen::MatrixXcd& op, double tau_ps);

// G1(tau) = Tr[(sigma B-) exp(L tau) (rho_ss sigma^dag B+)] on the grid.
std::vector<std::complex<double>> g1_numeric(OracleWorkspace& ws, std::span<const double> tau_grid_ps);

// Same correlator by adaptive Runge-Kutta integration of the regression
// state; cross-check for the eigendecomposition route.
std::vector<std::complex<double>> g1_numeric_rk45(OracleWorkspace& ws,
                                                  std::span<const double> tau_grid_ps,
                                                  double rel_tol = 1e-10);

struct NumericSpectrumOptions {
    double normalization = 1.0;
    bool subtract_plateau = true;    // remove the elastic long-time offset first
    double window_alpha_ps = 0.0;    // exponential window; adds 2*alpha*hbar FWHM
    double decay_tolerance = 1e-4;   // required tail suppression
    double render_plateau_linewidth_meV = 0.0;  // >0 re-adds the plateau as a narrow Lorentzian
    std::string method = "oracle";
};

// Fourier transform of the two-sided Hermitian extension of a uniformly
// sampled correlation series, evaluated on an arbitrary meV grid.
Spectrum spectrum_numeric(std::span<const std::complex<double>> g1, double dt_ps,
                          std::vector<double> omega_grid_meV,
                          const NumericSpectrumOptions& opts = {});

// sqrt(mean((|a|-|b|)^2)); grids must match.
double rmse(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b);
double rmse(std::span<const double> a, std::span<const double> b);

// Mean-field reference with the exact two-level regression (no strong-drive
// approximation): phonon correlation times tls_regression_exact.
std::vector<std::complex<double>> g1_tls_exact(const VibronicSystem& system,
                                               std::span<const double> tau_grid_ps);

struct ValidityPoint {
    double eta_over_nu = 0.0;
    double omega_over_eta = 0.0;
    double rmse = 0.0;
    int fock_levels = 0;
    bool ok = false;
    std::string error;
};

struct ValidityScan {
    std::vector<double> eta_over_nu_grid;
    std::vector<double> omega_over_eta_grid;
    std::vector<ValidityPoint> points;  // row-major over (eta, omega)
    double cutoff = 0.05;
};

struct ScanOptions {
    double tau_max_ps = 30.0;
    double dt_ps = 0.05;
    double cutoff = 0.05;
    int max_system_dim = 40;
};

// RMSE between the adiabatic analytic form and the exact oracle over a grid
// of coupling and drive ratios; per-point truncation failures are recorded,
// not fatal. The base system must have exactly one phonon mode.
ValidityScan validity_scan(const VibronicSystem& base, std::span<const double> eta_over_nu_grid,
                           std::span<const double> omega_over_eta_grid,
                           const ScanOptions& opts = {});

} // namespace vmt
