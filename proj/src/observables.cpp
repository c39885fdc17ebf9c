#include "vmt/observables.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "vmt/errors.hpp"

namespace vmt {

namespace {

// ---- adaptive Gauss-Kronrod 15(7) ----

constexpr double kr_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kr_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
// Gauss-7 lives on Kronrod nodes 1,3,5,7
constexpr double g7_weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double k = 0.0, g = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = kr_nodes[i] * h;
        const double fv = (i == 7) ? f(c) : f(c - x) + f(c + x);
        k += kr_weights[i] * fv;
        if (i % 2 == 1) g += g7_weights[i / 2] * fv;  // Gauss-7 nodes are 1,3,5,7
    }
    return {k * h, std::abs(k - g) * h};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    const PanelResult p = gk15(f, a, b);
    if (p.error <= tol || depth > 60) {
        if (depth > 60 && p.error > tol)
            throw NumericalError("adaptive_quadrature: did not converge (max depth)");
        return p.integral;
    }
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, tol / 2.0, depth + 1) + adapt(f, c, b, tol / 2.0, depth + 1);
}

// ---- Levenberg-Marquardt Lorentzian fitting ----

// Per peak: center c, half width w, height h, optional dispersive coefficient
// d; one shared constant baseline. Model value at x:
//   h w^2/(w^2+(x-c)^2) + d w (x-c)/(w^2+(x-c)^2) + b
struct FitProblem {
    const std::vector<double>& x;
    const std::vector<double>& y;
    int n_peaks;
    bool dispersive;

    int pp() const { return dispersive ? 4 : 3; }
    int n_params() const { return n_peaks * pp() + 1; }

    Eigen::VectorXd residuals(const Eigen::VectorXd& p) const {
        Eigen::VectorXd r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double m = p(n_params() - 1);
            for (int k = 0; k < n_peaks; ++k) {
                const double c = p(pp() * k), w = p(pp() * k + 1), h = p(pp() * k + 2);
                const double dx = x[i] - c;
                const double den = w * w + dx * dx;
                m += h * w * w / den;
                if (dispersive) m += p(pp() * k + 3) * w * dx / den;
            }
            r(i) = y[i] - m;
        }
        return r;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
        Eigen::MatrixXd J(x.size(), n_params());
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int k = 0; k < n_peaks; ++k) {
                const double c = p(pp() * k), w = p(pp() * k + 1), h = p(pp() * k + 2);
                const double d = dispersive ? p(pp() * k + 3) : 0.0;
                const double dx = x[i] - c;
                const double den = w * w + dx * dx;
                const double den2 = den * den;
                // d/dc, d/dw, d/dh (and d/dd) of the model
                double dc = 2.0 * h * w * w * dx / den2;
                double dw = 2.0 * h * w * dx * dx / den2;
                if (dispersive) {
                    dc += d * w * (dx * dx - w * w) / den2;
                    dw += d * dx * (dx * dx - w * w) / den2;
                }
                J(i, pp() * k) = dc;
                J(i, pp() * k + 1) = dw;
                J(i, pp() * k + 2) = w * w / den;
                if (dispersive) J(i, pp() * k + 3) = w * dx / den;
            }
            J(i, n_params() - 1) = 1.0;
        }
        return J;
    }
};

} // namespace

void DephasingModel::validate() const {
    if (!(mu_ps5 > 0.0)) throw ValidationError("dephasing: mu must be > 0");
    if (!(omega_c_ps_inv > 0.0)) throw ValidationError("dephasing: omega_c must be > 0");
}

double resolvability_threshold_meV(double gamma_meV, double gamma_pd_meV, int n, double kappa_meV) {
    if (n < 0) throw ValidationError("resolvability_threshold: n must be >= 0");
    const double d1 = gamma_meV - 2.0 * gamma_pd_meV;
    const double d2 = 4.0 * n * kappa_meV + 5.0 * gamma_meV + 6.0 * gamma_pd_meV;
    return 0.25 * std::sqrt(d1 * d1 + d2 * d2);
}

TripletRatios triplet_ratios(const DerivedQuantities& dq, int n, double kappa_meV) {
    if (n < 0) throw ValidationError("triplet_ratios: n must be >= 0");
    if (!dq.has_splitting())
        throw ValidationError("triplet_ratios: amplitude ratio requires the splitting regime");
    const double g = dq.gamma_meV, gpd = dq.gamma_pd_meV, nk = n * kappa_meV;
    TripletRatios r;
    r.r_gamma = (g + 2.0 * gpd + nk) / (1.5 * g + gpd + nk);
    // |1/(8 Lambda)| = splitting / omega_renorm exactly
    const double inv8lambda = 1.0 / (8.0 * std::abs(dq.lambda_plus));
    r.r_amplitude = (2.0 / r.r_gamma) * inv8lambda;
    return r;
}

Linewidths predicted_linewidths(double gamma_meV, double gamma_pd_meV, int n, double kappa_meV) {
    if (n < 0) throw ValidationError("predicted_linewidths: n must be >= 0");
    Linewidths lw;
    lw.central_fwhm_meV = gamma_meV + 2.0 * gamma_pd_meV + n * kappa_meV;
    lw.side_fwhm_meV = (3.0 * gamma_meV + 2.0 * gamma_pd_meV + 2.0 * n * kappa_meV) / 2.0;
    return lw;
}

std::vector<PeakFit> fit_lorentzians(const Spectrum& spec, double lo_meV, double hi_meV,
                                     std::span<const FitWindow> peaks, const FitOptions& opts) {
    if (peaks.empty()) throw ValidationError("fit_lorentzians: no peaks requested");
    const auto first = std::lower_bound(spec.omega_meV.begin(), spec.omega_meV.end(), lo_meV);
    const auto last = std::upper_bound(spec.omega_meV.begin(), spec.omega_meV.end(), hi_meV);
    const std::size_t i0 = first - spec.omega_meV.begin();
    const std::size_t i1 = last - spec.omega_meV.begin();
    if (i1 - i0 < 8 * peaks.size())
        throw ValidationError("fit_lorentzians: window contains too few grid points");

    std::vector<double> x(spec.omega_meV.begin() + i0, spec.omega_meV.begin() + i1);
    std::vector<double> y(spec.values.begin() + i0, spec.values.begin() + i1);

    FitProblem prob{x, y, static_cast<int>(peaks.size()), opts.dispersive};
    Eigen::VectorXd p(prob.n_params());
    const double base0 = *std::min_element(y.begin(), y.end());
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const auto near =
            std::min_element(x.begin(), x.end(), [&](double a, double b) {
                return std::abs(a - peaks[k].center_meV) < std::abs(b - peaks[k].center_meV);
            });
        p(prob.pp() * k) = peaks[k].center_meV;
        p(prob.pp() * k + 1) = peaks[k].fwhm_guess_meV / 2.0;
        p(prob.pp() * k + 2) = std::max(y[near - x.begin()] - base0, 1e-300);
        if (opts.dispersive) p(prob.pp() * k + 3) = 0.0;
    }
    p(prob.n_params() - 1) = base0;

    Eigen::VectorXd r = prob.residuals(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool stepped_to_tol = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::MatrixXd J = prob.jacobian(p);
        const Eigen::VectorXd g = J.transpose() * r;
        const Eigen::MatrixXd H = J.transpose() * J;
        bool accepted = false;
        Eigen::VectorXd dp;
        for (int tries = 0; tries < 60; ++tries) {
            Eigen::MatrixXd A = H;
            A.diagonal() += lambda * H.diagonal().cwiseMax(1e-300);
            dp = A.ldlt().solve(g);
            const Eigen::VectorXd pn = p + dp;
            const Eigen::VectorXd rn = prob.residuals(pn);
            const double cn = rn.squaredNorm();
            if (cn < cost) {
                p = pn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) break;
        double rel = 0.0;
        for (int j = 0; j < p.size(); ++j)
            rel = std::max(rel, std::abs(dp(j)) / std::max(std::abs(p(j)), 1e-30));
        if (rel < 1e-12) {
            stepped_to_tol = true;
            break;
        }
    }

    const double signal = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    const double resid = signal > 0.0 ? std::sqrt(cost) / signal : 0.0;
    std::vector<PeakFit> out;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        PeakFit f;
        f.center_meV = p(prob.pp() * k);
        f.fwhm_meV = 2.0 * std::abs(p(prob.pp() * k + 1));
        f.height = p(prob.pp() * k + 2);
        f.area = M_PI * f.height * f.fwhm_meV / 2.0;
        f.residual = resid;
        f.converged = std::isfinite(resid) && resid <= opts.residual_threshold &&
                      (stepped_to_tol || resid < 1e-6);
        out.push_back(f);
    }
    return out;
}

std::vector<PeakFit> fit_peaks(const Spectrum& spec, std::span<const FitWindow> windows,
                               const FitOptions& opts) {
    // disjointness of the fit slices
    std::vector<std::pair<double, double>> spans;
    for (const auto& w : windows) {
        if (!(w.fwhm_guess_meV > 0.0)) throw ValidationError("fit_peaks: width guess must be > 0");
        spans.emplace_back(w.center_meV - opts.window_halfwidth_factor * w.fwhm_guess_meV,
                           w.center_meV + opts.window_halfwidth_factor * w.fwhm_guess_meV);
    }
    auto sorted = spans;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i].second > sorted[i + 1].first)
            throw ValidationError("fit_peaks: windows overlap; use fit_lorentzians for joint fits");

    std::vector<PeakFit> out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const FitWindow w = windows[i];
        auto fits = fit_lorentzians(spec, spans[i].first, spans[i].second, {&w, 1}, opts);
        out.push_back(fits[0]);
    }
    return out;
}

int count_local_maxima(const Spectrum& spec, double lo_meV, double hi_meV, double rel_prominence) {
    const auto first = std::lower_bound(spec.omega_meV.begin(), spec.omega_meV.end(), lo_meV);
    const auto last = std::upper_bound(spec.omega_meV.begin(), spec.omega_meV.end(), hi_meV);
    const std::ptrdiff_t i0 = first - spec.omega_meV.begin();
    const std::ptrdiff_t i1 = last - spec.omega_meV.begin();
    if (i1 - i0 < 3) return 0;
    const auto& y = spec.values;
    double ymax = y[i0];
    for (std::ptrdiff_t i = i0; i < i1; ++i) ymax = std::max(ymax, y[i]);
    const double need = rel_prominence * ymax;

    int count = 0;
    for (std::ptrdiff_t i = i0 + 1; i + 1 < i1; ++i) {
        if (!(y[i] > y[i - 1] && y[i] > y[i + 1])) continue;
        double lmin = y[i];
        for (std::ptrdiff_t j = i - 1; j >= i0; --j) {
            if (y[j] > y[i]) break;
            lmin = std::min(lmin, y[j]);
        }
        double rmin = y[i];
        for (std::ptrdiff_t j = i + 1; j < i1; ++j) {
            if (y[j] > y[i]) break;
            rmin = std::min(rmin, y[j]);
        }
        if (y[i] - std::max(lmin, rmin) >= need) ++count;
    }
    return count;
}

namespace {

// 3 - e^{-2a}(3 + 6a + 6a^2 + 4a^3 + 2a^4) cancels to O(a^5); switch to its
// Taylor series below a = 1/2.
double dephasing_kernel(double a) {
    if (a >= 0.5) {
        const double poly = 3.0 + a * (6.0 + a * (6.0 + a * (4.0 + a * 2.0)));
        return 8.0 * (3.0 - std::exp(-2.0 * a) * poly) / std::pow(a, 5);
    }
    static const std::vector<double> series = [] {
        // coefficients f_k of 3 - e^{-2a} P(a) for k = 5..34
        const double P[5] = {3.0, 6.0, 6.0, 4.0, 2.0};
        std::vector<double> ek(40);
        ek[0] = 1.0;
        for (int k = 1; k < 40; ++k) ek[k] = ek[k - 1] * (-2.0) / k;
        std::vector<double> f;
        for (int k = 5; k < 35; ++k) {
            double d = 0.0;
            for (int i = 0; i < 5 && i <= k; ++i) d += P[i] * ek[k - i];
            f.push_back(-d);
        }
        return f;
    }();
    double acc = 0.0, apow = 1.0;
    for (double fk : series) {
        acc += fk * apow;
        apow *= a;
    }
    return 8.0 * acc;
}

} // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rtol, double atol) {
    // seed with several panels so a narrow feature cannot hide from the
    // first-pass estimate that sets the tolerance
    constexpr int seeds = 16;
    double rough = 0.0;
    for (int i = 0; i < seeds; ++i) {
        const double lo = a + (b - a) * i / seeds;
        const double hi = a + (b - a) * (i + 1) / seeds;
        rough += gk15(f, lo, hi).integral;
    }
    const double tol = std::max(atol, rtol * std::abs(rough));
    if (tol == 0.0) return rough;
    double total = 0.0;
    for (int i = 0; i < seeds; ++i) {
        const double lo = a + (b - a) * i / seeds;
        const double hi = a + (b - a) * (i + 1) / seeds;
        total += adapt(f, lo, hi, tol / seeds, 0);
    }
    return total;
}

double dephasing_rate_ueV(double T_K, const DephasingModel& model) {
    model.validate();
    if (!(T_K >= 0.0)) throw ValidationError("dephasing_rate: T must be >= 0");
    if (T_K == 0.0) return 0.0;

    const double wc = model.omega_c_ps_inv;
    const double kT_rate = constants::kB_meV_per_K * T_K / constants::hbar_meV_ps;
    auto integrand = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double x = w / kT_rate;
        if (x > 690.0) return 0.0;  // occupation underflows
        const double n = 1.0 / std::expm1(x);
        const double aa = 2.0 * (w / wc) * (w / wc);
        return std::pow(w, 6) * n * (n + 1.0) * dephasing_kernel(aa);
    };
    // integrand decays doubly-exponentially beyond the cutoff and the
    // occupation underflows beyond ~690 kT
    const double hi = std::min(50.0 * wc, 690.0 * kT_rate);
    const double integral = adaptive_quadrature(integrand, 0.0, hi, 1e-8);
    // even integrand, full-line integral
    const double rate_ps = model.mu_ps5 * 2.0 * integral;
    return ueV_from_meV(meV_from_rate(rate_ps));
}

} // namespace vmt
