#include "vmt/analytic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vmt/errors.hpp"

namespace vmt {

namespace {

using cd = std::complex<double>;

double poisson_weight(double beta, int n) {
    // e^-beta beta^n / n!, computed in log space to stay finite for large n
    if (beta == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-beta + n * std::log(beta) - std::lgamma(n + 1.0));
}

void require_resonant(const EmitterParams& emitter, const char* who) {
    if (emitter.detuning_meV != 0.0)
        throw ValidationError(std::string(who) + ": closed forms require zero detuning");
}

// The three bare-emitter terms scaled by an overall weight, shifted by one
// replica increment (decay_inc, freq_inc) in ps^-1.
void append_triplet(std::vector<ExponentialTerm>& out, const DerivedQuantities& dq, double weight,
                    double decay_inc, double freq_inc) {
    if (weight == 0.0) return;
    const double half_central = rate_from_meV(dq.big_gamma_meV) / 2.0;
    const double side = rate_from_meV(3.0 * dq.gamma_meV + 2.0 * dq.gamma_pd_meV) / 4.0;
    const double wg = rate_from_meV(*dq.mollow_splitting_meV);
    out.push_back({weight * 0.25, half_central + decay_inc, freq_inc});
    out.push_back({weight * dq.lambda_plus, side + decay_inc, -wg + freq_inc});
    out.push_back({weight * dq.lambda_minus, side + decay_inc, wg + freq_inc});
}

} // namespace

std::complex<double> CorrelationModel::eval_terms(double tau_ps) const {
    cd acc{0.0, 0.0};
    for (const auto& t : terms) acc += t.eval(tau_ps);
    return acc;
}

std::complex<double> phonon_correlation(std::span<const PhononMode> modes, double tau_ps) {
    if (!(tau_ps >= 0.0)) throw ValidationError("phonon_correlation: tau must be >= 0");
    cd expo{0.0, 0.0};
    for (const auto& m : modes) {
        const double beta = huang_rhys(m);
        if (beta == 0.0) continue;
        const cd rate(rate_from_meV(m.kappa_meV) / 2.0, rate_from_meV(m.nu_meV));
        expo += -beta * (1.0 - std::exp(-rate * tau_ps));
    }
    return std::exp(expo);
}

std::array<ExponentialTerm, 3> atomic_terms(const DerivedQuantities& dq) {
    if (!dq.has_splitting())
        throw ValidationError("atomic_terms: no Mollow splitting at these parameters "
                              "(omega_renorm below |gamma/4 - gamma_pd/2|)");
    std::vector<ExponentialTerm> v;
    append_triplet(v, dq, 1.0, 0.0, 0.0);
    return {v[0], v[1], v[2]};
}

double coherent_weight(const DerivedQuantities& dq) {
    const double s = dq.saturation_s;
    return dq.ratio_a * s / (2.0 * (s + 1.0) * (s + 1.0));
}

CorrelationModel g1_single_mode(const VibronicSystem& system, int n_max) {
    if (system.modes.size() != 1)
        throw ValidationError("g1_single_mode: exactly one phonon mode required");
    if (n_max < 0) throw ValidationError("g1_single_mode: n_max must be >= 0");
    require_resonant(system.emitter, "g1_single_mode");
    const auto dq = derive(system);
    if (!dq.has_splitting()) throw ValidationError("g1_single_mode: no Mollow splitting");

    const auto& mode = system.modes[0];
    const double beta = huang_rhys(mode);
    const double kap_half = rate_from_meV(mode.kappa_meV) / 2.0;
    const double nu = rate_from_meV(mode.nu_meV);

    CorrelationModel model;
    model.builder = "analytic_single";
    double retained = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double w = poisson_weight(beta, n);
        retained += w;
        append_triplet(model.terms, dq, w, n * kap_half, -n * nu);
    }
    model.retained_weight = retained;
    model.dropped_weight = 1.0 - retained;
    model.coherent_weight = std::exp(-beta) * coherent_weight(dq);
    return model;
}

CorrelationModel g1_multimode_first_replica(const VibronicSystem& system) {
    require_resonant(system.emitter, "g1_multimode_first_replica");
    const auto dq = derive(system);
    if (!dq.has_splitting()) throw ValidationError("g1_multimode_first_replica: no Mollow splitting");

    const double zpl = std::exp(-dq.beta_tilde);
    CorrelationModel model;
    model.builder = "analytic_first_replica";
    append_triplet(model.terms, dq, zpl, 0.0, 0.0);
    for (const auto& m : system.modes) {
        const double beta = huang_rhys(m);
        append_triplet(model.terms, dq, zpl * beta, rate_from_meV(m.kappa_meV) / 2.0,
                       -rate_from_meV(m.nu_meV));
    }
    // Linear-in-beta weights: the tau=0 term sum is exp(-bt)(1+bt)/2.
    model.retained_weight = zpl * (1.0 + dq.beta_tilde);
    model.dropped_weight = 1.0 - model.retained_weight;
    model.coherent_weight = zpl * coherent_weight(dq);
    return model;
}

CorrelationModel g1_multimode_general(const VibronicSystem& system, double weight_threshold,
                                      std::size_t term_budget) {
    if (!(weight_threshold > 0.0 && weight_threshold < 1.0))
        throw ValidationError("g1_multimode_general: weight_threshold must be in (0,1)");
    require_resonant(system.emitter, "g1_multimode_general");
    const auto dq = derive(system);
    if (!dq.has_splitting()) throw ValidationError("g1_multimode_general: no Mollow splitting");

    const std::size_t m_count = system.modes.size();
    // Per-mode replica weights up to where they can no longer matter.
    std::vector<std::vector<double>> weights(m_count);
    std::vector<double> wmax(m_count, 1.0);
    double wmax_all = 1.0;
    for (std::size_t j = 0; j < m_count; ++j) {
        const double beta = huang_rhys(system.modes[j]);
        double peak = 0.0;
        for (int n = 0;; ++n) {
            const double w = poisson_weight(beta, n);
            peak = std::max(peak, w);
            weights[j].push_back(w);
            if (n > beta && w < weight_threshold) break;
            if (n > 4000)
                throw NumericalError("g1_multimode_general: per-mode replica range exploded");
        }
        wmax[j] = peak;
        wmax_all *= peak;
    }
    // suffix_max[j] = product of peak weights of modes j..M-1
    std::vector<double> suffix_max(m_count + 1, 1.0);
    for (std::size_t j = m_count; j-- > 0;) suffix_max[j] = suffix_max[j + 1] * wmax[j];

    CorrelationModel model;
    model.builder = "analytic_general";
    double retained = 0.0;
    std::size_t indices = 0;

    // Depth-first enumeration of all multi-indices with weight >= threshold.
    auto visit = [&](auto&& self, std::size_t j, double prefix, double decay_inc,
                     double freq_inc) -> void {
        if (prefix * suffix_max[j] < weight_threshold) return;
        if (j == m_count) {
            if (prefix < weight_threshold) return;
            if (++indices > term_budget)
                throw NumericalError("g1_multimode_general: term budget exceeded ("
                                     + std::to_string(term_budget) + " multi-indices)");
            retained += prefix;
            append_triplet(model.terms, dq, prefix, decay_inc, freq_inc);
            return;
        }
        const auto& m = system.modes[j];
        const double beta = huang_rhys(m);
        const double kap_half = rate_from_meV(m.kappa_meV) / 2.0;
        const double nu = rate_from_meV(m.nu_meV);
        for (std::size_t n = 0; n < weights[j].size(); ++n) {
            const double w = prefix * weights[j][n];
            if (static_cast<double>(n) > beta && w * suffix_max[j + 1] < weight_threshold) break;
            self(self, j + 1, w, decay_inc + n * kap_half, freq_inc - n * nu);
        }
    };
    visit(visit, 0, 1.0, 0.0, 0.0);

    model.retained_weight = retained;
    model.dropped_weight = 1.0 - retained;
    model.coherent_weight = std::exp(-dq.beta_tilde) * coherent_weight(dq);
    return model;
}

std::vector<std::complex<double>> tls_regression_exact(const EmitterParams& emitter,
                                                       double omega_renorm_meV,
                                                       std::span<const double> tau_grid_ps) {
    emitter.validate();
    require_resonant(emitter, "tls_regression_exact");
    if (!tau_grid_ps.empty() && tau_grid_ps[0] < 0.0)
        throw ValidationError("tls_regression_exact: tau grid must start at >= 0");

    const double g = rate_from_meV(emitter.gamma_meV());
    const double gpd = rate_from_meV(emitter.gamma_pd_meV());
    const double big = g + 2.0 * gpd;
    const double w = rate_from_meV(omega_renorm_meV);
    const double s = 2.0 * w * w / (g * big);

    // Steady state of the Bloch system at resonance.
    const double rho_ee = s / (2.0 * (s + 1.0));
    const cd rho_ge = cd(0.0, w / big) / (s + 1.0);
    const cd rho_eg = std::conj(rho_ge);
    const double coherent = std::norm(rho_ge);

    // Initial condition rho_ss * (sig+ - <sig+>) expressed in the
    // (<sig>, <sig+>, <sig_z>) component basis of the regression system.
    Eigen::Vector3cd v0;
    v0(0) = rho_ee - rho_eg * rho_ge;
    v0(1) = -rho_ge * rho_ge;
    v0(2) = -2.0 * rho_ee * rho_ge;

    Eigen::Matrix3cd gen;
    gen << cd(-big / 2.0, 0), cd(0, 0), cd(0, w / 2.0),
           cd(0, 0), cd(-big / 2.0, 0), cd(0, -w / 2.0),
           cd(0, w), cd(0, -w), cd(-g, 0);

    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(gen, true);
    if (es.info() != Eigen::Success)
        throw NumericalError("tls_regression_exact: 3x3 eigendecomposition failed");
    const Eigen::Vector3cd coeff = es.eigenvectors().partialPivLu().solve(v0);

    std::vector<cd> out;
    out.reserve(tau_grid_ps.size());
    for (const double tau : tau_grid_ps) {
        cd acc{0.0, 0.0};
        for (int k = 0; k < 3; ++k)
            acc += es.eigenvectors()(0, k) * coeff(k) * std::exp(es.eigenvalues()(k) * tau);
        out.push_back(acc + coherent);
    }
    return out;
}

CorrelationModel normalize(CorrelationModel model, const DerivedQuantities& dq, NormalizationMode mode) {
    if (mode == NormalizationMode::StrongDrive) {
        model.normalization = 0.5;
        model.normalization_mode = "strong_drive";
    } else {
        const double s = dq.saturation_s;
        if (s == 0.0) throw ValidationError("normalize: exact normalization undefined at zero drive");
        model.normalization = s / (2.0 * (s + 1.0));
        model.normalization_mode = "exact";
    }
    return model;
}

CorrelationModel prune(CorrelationModel model, double relative_cutoff) {
    const double base = 0.5 * model.retained_weight;
    const double cutoff = relative_cutoff * base;
    std::vector<ExponentialTerm> kept;
    kept.reserve(model.terms.size());
    for (const auto& t : model.terms) {
        if (std::abs(t.amplitude) < cutoff)
            model.pruned_weight += std::abs(t.amplitude);
        else
            kept.push_back(t);
    }
    model.terms = std::move(kept);
    return model;
}

Spectrum spectrum_from_model(const CorrelationModel& model, std::vector<double> omega_grid_meV,
                             const SpectrumOptions& opts) {
    if (omega_grid_meV.size() < 2)
        throw ValidationError("spectrum_from_model: omega grid needs at least 2 points");
    for (std::size_t i = 0; i + 1 < omega_grid_meV.size(); ++i)
        if (!(omega_grid_meV[i] < omega_grid_meV[i + 1]))
            throw ValidationError("spectrum_from_model: omega grid must be strictly increasing");
    if (opts.include_coherent && !(opts.laser_linewidth_meV > 0.0))
        throw ValidationError("spectrum_from_model: include_coherent requires a laser linewidth");

    CorrelationModel pruned = prune(model, opts.prune_cutoff);
    std::vector<ExponentialTerm> terms = pruned.terms;
    if (opts.include_coherent && pruned.coherent_weight > 0.0)
        terms.push_back({pruned.coherent_weight, rate_from_meV(opts.laser_linewidth_meV) / 2.0, 0.0});

    Spectrum spec;
    spec.omega_meV = std::move(omega_grid_meV);
    spec.values.resize(spec.omega_meV.size());
    for (std::size_t i = 0; i < spec.omega_meV.size(); ++i) {
        const double w = rate_from_meV(spec.omega_meV[i]);
        double acc = 0.0;
        for (const auto& t : terms)
            acc += 2.0 * std::real(t.amplitude / cd(t.decay, t.frequency - w));
        spec.values[i] = acc / pruned.normalization;
        if (!std::isfinite(spec.values[i]))
            throw NumericalError("spectrum_from_model: non-finite spectrum value");
    }
    spec.meta.method = pruned.builder;
    spec.meta.normalization = pruned.normalization;
    spec.meta.normalization_mode = pruned.normalization_mode;
    spec.meta.dropped_weight = pruned.dropped_weight;
    spec.meta.pruned_weight = pruned.pruned_weight;
    spec.meta.coherent_weight = pruned.coherent_weight;
    spec.meta.include_coherent = opts.include_coherent;
    spec.meta.laser_linewidth_meV = opts.include_coherent ? opts.laser_linewidth_meV : 0.0;
    return spec;
}

std::vector<std::complex<double>> g1_eval(const CorrelationModel& model, std::span<const double> tau_grid_ps) {
    std::vector<cd> out;
    out.reserve(tau_grid_ps.size());
    for (const double tau : tau_grid_ps) out.push_back(model.eval(tau));
    return out;
}

} // namespace vmt
