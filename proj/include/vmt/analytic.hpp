#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vmt/model.hpp"

namespace vmt {

// One term of the first-order coherence function,
//   amplitude * exp(-decay*tau - i*frequency*tau),
// with decay and frequency in ps^-1. The frequency is the spectral offset
// from the polaron-shifted line (negative values are red sidebands).
struct ExponentialTerm {
    std::complex<double> amplitude{0.0, 0.0};
    double decay = 0.0;
    double frequency = 0.0;

    std::complex<double> eval(double tau_ps) const {
        return amplitude * std::exp(std::complex<double>(-decay * tau_ps, -frequency * tau_ps));
    }
};

// G1(tau) decomposed into a finite sum of complex exponentials plus an
// elastic (coherent) delta contribution at the laser frequency. The terms
// hold only the incoherent part; coherent_weight is the tau->infinity limit
// of the full correlation function. normalization is the <sig+ sig->_ss
// divisor applied when synthesizing a spectrum.
struct CorrelationModel {
    std::vector<ExponentialTerm> terms;
    double coherent_weight = 0.0;
    double normalization = 1.0;
    std::string normalization_mode = "none";
    double retained_weight = 1.0;   // Franck-Condon weight kept by the builder
    double dropped_weight = 0.0;    // 1 - retained_weight
    double pruned_weight = 0.0;     // |amplitude| removed by prune()
    std::string builder;

    // Incoherent term sum at tau.
    std::complex<double> eval_terms(double tau_ps) const;
    // Full model: term sum + coherent weight.
    std::complex<double> eval(double tau_ps) const { return eval_terms(tau_ps) + coherent_weight; }
};

struct SpectrumMetadata {
    std::string method;
    std::string normalization_mode;
    double normalization = 1.0;
    double dropped_weight = 0.0;
    double pruned_weight = 0.0;
    double coherent_weight = 0.0;
    bool include_coherent = false;
    double laser_linewidth_meV = 0.0;  // width used to render the elastic peak
    double window_fwhm_meV = 0.0;      // extra linewidth added by a numeric window
};

// Emission spectrum on a strictly increasing grid of meV offsets from the
// polaron-shifted line. Values carry 1/ps^-1 units (rate-normalized
// intensity); only ratios and integrals are physically meaningful here.
struct Spectrum {
    std::vector<double> omega_meV;
    std::vector<double> values;
    SpectrumMetadata meta;
};

// Phonon displacement autocorrelation
//   exp(-sum_j beta_j (1 - exp(-(kappa_j/2 + i nu_j) tau)))
// evaluated at tau >= 0 (rates converted to ps^-1).
std::complex<double> phonon_correlation(std::span<const PhononMode> modes, double tau_ps);

// The three-term bare-emitter decomposition: central term (1/4, Gamma/2, 0)
// and side terms (Lambda_pm, (3g+2gpd)/4, -+ splitting). Requires the
// splitting regime.
std::array<ExponentialTerm, 3> atomic_terms(const DerivedQuantities& dq);

// Elastic scattering weight a*s/(2(s+1)^2) of the bare emitter.
double coherent_weight(const DerivedQuantities& dq);

// Poisson (Franck-Condon) series of the single-mode system, truncated at
// n_max phonon replicas. Requires exactly one mode and the splitting regime.
CorrelationModel g1_single_mode(const VibronicSystem& system, int n_max);

// Compact multi-mode form keeping the zero-phonon line and one replica per
// mode, with linear weights beta_j. 3(M+1) terms when all beta_j > 0.
CorrelationModel g1_multimode_first_replica(const VibronicSystem& system);

// Full product expansion over replica multi-indices (n_1..n_M); keeps every
// multi-index whose Franck-Condon weight is >= weight_threshold. Throws
// NumericalError if that enumeration exceeds term_budget indices.
CorrelationModel g1_multimode_general(const VibronicSystem& system, double weight_threshold,
                                      std::size_t term_budget = 200000);

// Bare-emitter correlation from the 3x3 regression system without the
// strong-drive approximation: evolves rho_ss * (sig+ - <sig+>) under the
// Bloch generator and adds the steady-state coherent product. This is the
// reference the closed-form atomic_terms are measured against.
std::vector<std::complex<double>> tls_regression_exact(const EmitterParams& emitter,
                                                       double omega_renorm_meV,
                                                       std::span<const double> tau_grid_ps);

enum class NormalizationMode { Exact, StrongDrive };

// Sets model.normalization to <sig+sig->_ss: s/(2(s+1)) for Exact, 1/2 for
// StrongDrive.
CorrelationModel normalize(CorrelationModel model, const DerivedQuantities& dq, NormalizationMode mode);

// Drops terms with |amplitude| < cutoff * (incoherent tau=0 weight) and
// accumulates the removed weight in pruned_weight.
CorrelationModel prune(CorrelationModel model, double relative_cutoff = 1e-8);

struct SpectrumOptions {
    bool include_coherent = false;
    double laser_linewidth_meV = 0.0;  // required when include_coherent
    double prune_cutoff = 1e-8;
};

// Lorentzian synthesis S(w) = 2 Re sum_k A_k/(decay_k + i(freq_k - w)),
// divided by model.normalization. The elastic delta is rendered as a
// Lorentzian of width laser_linewidth_meV carrying the exact weight.
Spectrum spectrum_from_model(const CorrelationModel& model, std::vector<double> omega_grid_meV,
                             const SpectrumOptions& opts = {});

// Model evaluated on a tau grid (terms + coherent weight).
std::vector<std::complex<double>> g1_eval(const CorrelationModel& model, std::span<const double> tau_grid_ps);

} // namespace vmt
