#include "vmt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vmt/errors.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace vmt {

namespace {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat lowering(int n) {
    Mat b = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
    return b;
}

// exp(g (b^dag - b)) from the generator truncated at dim levels. Exactly
// unitary, so the dissipator algebra (sig B-)^dag (sig B-) = sig^dag sig holds
// on the truncated space too.
Mat displacement_truncated(double g, int dim) {
    const Mat b = lowering(dim);
    const Mat gen_h = cd(0.0, 1.0) * g * (b.adjoint() - b);  // Hermitian i*G
    Eigen::SelfAdjointEigenSolver<Mat> es(gen_h);
    if (es.info() != Eigen::Success)
        throw NumericalError("displacement: eigendecomposition failed");
    Vec phase(dim);
    for (int k = 0; k < dim; ++k)
        phase(k) = std::exp(cd(0.0, -es.eigenvalues()(k)));  // exp(G) = exp(-i (iG))
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

// Truncation diagnostic: Frobenius distance, on the levels below kept/2,
// between the truncated-generator exponential and the same operator built on
// a doubled guard space. The literal product B+ B- is unitary by construction
// and carries no truncation information; this difference does.
double displacement_deviation(double g, int kept) {
    if (g == 0.0) return 0.0;
    const Mat b_t = displacement_truncated(g, kept);
    const Mat b_g = displacement_truncated(g, 2 * kept + 4).topLeftCorner(kept, kept);
    const int low = (kept + 1) / 2;
    return (b_t - b_g).topLeftCorner(low, low).norm();
}

void vec_of(const Mat& x, Vec& out) {
    out = Eigen::Map<const Vec>(x.data(), x.size());
}

Mat unvec(const Vec& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }

// L += rate * (conj(A) kron A - 1/2 I kron A^dag A - 1/2 (A^dag A)^T kron I)
void add_dissipator(Mat& liou, const Mat& a, double rate, const Mat& eye) {
    const Mat ada = a.adjoint() * a;
    liou += rate * (kron(a.conjugate(), a) - 0.5 * kron(eye, ada) - 0.5 * kron(ada.transpose(), eye));
}

void ensure_eig(OracleWorkspace& ws) {
    if (ws.eig_ready) return;
    const int n = static_cast<int>(ws.liouvillian.rows());
    Mat a = ws.liouvillian;  // zgeev overwrites
    ws.eigenvalues.resize(n);
    ws.eigenvectors.resize(n, n);
    const int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n,
                                   ws.eigenvalues.data(), nullptr, 1, ws.eigenvectors.data(), n);
    if (info != 0)
        throw NumericalError("oracle: zgeev failed with info=" + std::to_string(info));
    ws.eig_ready = true;
}

const Eigen::PartialPivLU<Mat>& ensure_lu(OracleWorkspace& ws) {
    ensure_eig(ws);
    if (!ws.lu_ready) {
        ws.eigenvector_lu.compute(ws.eigenvectors);
        ws.lu_ready = true;
    }
    return ws.eigenvector_lu;
}

} // namespace

int default_fock_levels(double beta) {
    if (beta < 0.0) throw ValidationError("default_fock_levels: beta must be >= 0");
    if (beta == 0.0) return 8;
    for (int n = 8;; ++n) {
        // tail sum_{k >= n-2} e^-b b^k/k!
        double tail = 0.0;
        double term = std::exp(-beta + (n - 2) * std::log(beta) - std::lgamma(n - 1.0));
        for (int k = n - 2; k < n + 200 && term > 0.0; ++k) {
            tail += term;
            term *= beta / (k + 1);
        }
        if (tail < 1e-8 && displacement_deviation(std::sqrt(beta), n) < 1e-6) return n;
        if (n > 4000) throw NumericalError("default_fock_levels: no finite truncation found");
    }
}

void TruncationConfig::validate(const VibronicSystem& system) const {
    if (!fock_levels.empty() && fock_levels.size() != system.modes.size())
        throw ValidationError("truncation: fock_levels size must match the mode count");
    for (int n : fock_levels)
        if (n < 2) throw ValidationError("truncation: fock_levels must be >= 2");
    if (!(tau_max_ps > 0.0)) throw ValidationError("truncation: tau_max must be > 0");
    if (dt_ps < 0.0) throw ValidationError("truncation: dt must be >= 0");
    if (dt_ps > 0.0 && !system.modes.empty()) {
        double nu_max = 0.0;
        for (const auto& m : system.modes) nu_max = std::max(nu_max, m.nu_meV);
        const double limit = 2.0 * std::numbers::pi / rate_from_meV(nu_max) / 10.0;
        if (dt_ps >= limit)
            throw ValidationError("truncation: dt must resolve the fastest mode (dt < " +
                                  std::to_string(limit) + " ps)");
    }
}

OracleWorkspace build_workspace(const VibronicSystem& system, TruncationConfig trunc) {
    system.validate();
    trunc.validate(system);

    OracleWorkspace ws;
    ws.system = system;
    const std::size_t m_count = system.modes.size();

    ws.fock_levels.resize(m_count);
    for (std::size_t j = 0; j < m_count; ++j)
        ws.fock_levels[j] = trunc.fock_levels.empty() ? default_fock_levels(huang_rhys(system.modes[j]))
                                                      : trunc.fock_levels[j];
    long long dim = 2;
    for (int n : ws.fock_levels) dim *= n;
    if (dim > trunc.max_system_dim)
        throw ValidationError("oracle: system dimension " + std::to_string(dim) +
                              " exceeds the budget of " + std::to_string(trunc.max_system_dim));
    ws.dim = static_cast<int>(dim);

    // two-level operators; |g> = e0, |e> = e1
    Mat sig = Mat::Zero(2, 2);
    sig(0, 1) = 1.0;
    Mat nexc = Mat::Zero(2, 2);
    nexc(1, 1) = 1.0;
    const Mat eye2 = Mat::Identity(2, 2);

    // phonon-space operators
    int ph_dim = 1;
    for (int n : ws.fock_levels) ph_dim *= n;
    Mat b_plus = Mat::Identity(1, 1);  // displacement on the phonon space
    Mat num_ph = Mat::Zero(ph_dim, ph_dim);
    std::vector<Mat> b_full(m_count);
    ws.displacement_deviation = 0.0;
    {
        // per-mode operators lifted by kron products, preserving mode order
        std::vector<Mat> eyes(m_count);
        for (std::size_t j = 0; j < m_count; ++j)
            eyes[j] = Mat::Identity(ws.fock_levels[j], ws.fock_levels[j]);
        for (std::size_t j = 0; j < m_count; ++j) {
            const int nj = ws.fock_levels[j];
            const double g = system.modes[j].eta_meV / system.modes[j].nu_meV;
            Mat bj = lowering(nj);
            Mat dj = displacement_truncated(g, nj);
            ws.displacement_deviation =
                std::max(ws.displacement_deviation, displacement_deviation(g, nj));
            Mat lift_b = Mat::Identity(1, 1), lift_n = Mat::Identity(1, 1);
            for (std::size_t k = 0; k < m_count; ++k) {
                lift_b = kron(lift_b, k == j ? bj : eyes[k]);
                lift_n = kron(lift_n, k == j ? Mat(bj.adjoint() * bj) : eyes[k]);
            }
            b_full[j] = lift_b;
            num_ph += rate_from_meV(system.modes[j].nu_meV) * lift_n;
            b_plus = kron(b_plus, dj);
        }
    }
    const Mat b_minus = b_plus.adjoint();
    if (ws.displacement_deviation >= 1e-6)
        throw NumericalError("oracle: displacement truncation deviation " +
                             std::to_string(ws.displacement_deviation) +
                             " >= 1e-6; increase fock_levels");

    const Mat eye_ph = Mat::Identity(ph_dim, ph_dim);
    const Mat eye = Mat::Identity(ws.dim, ws.dim);

    ws.sigma_b_minus = kron(sig, b_minus);
    ws.sigma_dag_b_plus = kron(Mat(sig.adjoint()), b_plus);
    ws.excited_projector = kron(nexc, eye_ph);
    ws.lowering_ops.resize(m_count);
    for (std::size_t j = 0; j < m_count; ++j) ws.lowering_ops[j] = kron(eye2, b_full[j]);

    // H = delta sig^dag sig + sum nu_j b^dag b + (Omega/2)(sig B- + sig^dag B+), in ps^-1
    Mat h = rate_from_meV(system.emitter.detuning_meV) * ws.excited_projector + kron(eye2, num_ph);
    h += 0.5 * rate_from_meV(system.drive.omega_meV) * (ws.sigma_b_minus + ws.sigma_dag_b_plus);

    ws.liouvillian = -cd(0.0, 1.0) * (kron(eye, h) - kron(h.transpose(), eye));
    add_dissipator(ws.liouvillian, ws.sigma_b_minus, rate_from_meV(system.emitter.gamma_meV()), eye);
    // phonon absorption (kappa^+) is dropped in the low-temperature regime
    for (std::size_t j = 0; j < m_count; ++j)
        add_dissipator(ws.liouvillian, ws.lowering_ops[j],
                       rate_from_meV(system.modes[j].kappa_meV), eye);
    if (system.emitter.gamma_pd_ueV > 0.0)
        add_dissipator(ws.liouvillian, ws.excited_projector,
                       2.0 * rate_from_meV(system.emitter.gamma_pd_meV()), eye);

    // resolved tau step
    if (trunc.dt_ps > 0.0) {
        ws.tau_grid_dt = trunc.dt_ps;
    } else {
        double dt = trunc.tau_max_ps / 600.0;
        for (const auto& m : system.modes)
            dt = std::min(dt, 2.0 * std::numbers::pi / rate_from_meV(m.nu_meV) / 16.0);
        ws.tau_grid_dt = dt;
    }
    ws.trunc = std::move(trunc);
    return ws;
}

const Eigen::MatrixXcd& steady_state(OracleWorkspace& ws) {
    if (ws.steady_ready) return ws.rho_ss;
    ensure_eig(ws);

    const int n = static_cast<int>(ws.eigenvalues.size());
    int best = 0;
    double scale = 0.0;
    for (int k = 0; k < n; ++k) {
        scale = std::max(scale, std::abs(ws.eigenvalues(k)));
        if (ws.eigenvalues(k).real() > ws.eigenvalues(best).real()) best = k;
    }
    int null_count = 0;
    for (int k = 0; k < n; ++k)
        if (std::abs(ws.eigenvalues(k)) < 1e-10 * scale) ++null_count;
    if (null_count > 1)
        throw NumericalError("oracle: degenerate steady state (null space dimension " +
                             std::to_string(null_count) + ")");

    Mat rho = unvec(ws.eigenvectors.col(best), ws.dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const cd tr = rho.trace();
    if (std::abs(tr) < 1e-14)
        throw NumericalError("oracle: traceless null vector; steady state not found");
    rho /= tr;

    if (ws.trunc.steady_state_method == TruncationConfig::SteadyStateMethod::LongTimePropagation) {
        // propagate the ground state far past 1/gamma instead of reading the
        // null vector; both must agree, this path exists as a cross-check
        Mat ground = Mat::Zero(ws.dim, ws.dim);
        ground(0, 0) = 1.0;
        const double t_long = 60.0 / rate_from_meV(ws.system.emitter.gamma_meV());
        rho = propagate(ws, ground, t_long);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rho /= rho.trace();
    }

    // residual check against the generator scale
    Vec rv;
    vec_of(rho, rv);
    const double resid = (ws.liouvillian * rv).norm();
    if (resid > 1e-10 * ws.liouvillian.norm())
        throw NumericalError("oracle: steady-state residual " + std::to_string(resid) +
                             " too large");

    {
        Eigen::SelfAdjointEigenSolver<Mat> es(rho);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw NumericalError("oracle: steady state not positive (min eigenvalue " +
                                 std::to_string(es.eigenvalues().minCoeff()) + ")");
    }

    // truncation leakage: population of the highest kept level of any mode
    double leak = 0.0;
    {
        int ph_dim = 1;
        for (int nj : ws.fock_levels) ph_dim *= nj;
        for (std::size_t j = 0; j < ws.fock_levels.size(); ++j) {
            int stride = 1;  // index stride of mode j in the kron ordering
            for (std::size_t k = j + 1; k < ws.fock_levels.size(); ++k)
                stride *= ws.fock_levels[k];
            double pop = 0.0;
            for (int i = 0; i < ws.dim; ++i) {
                const int ph_index = i % ph_dim;
                if ((ph_index / stride) % ws.fock_levels[j] == ws.fock_levels[j] - 1)
                    pop += rho(i, i).real();
            }
            leak = std::max(leak, pop);
        }
    }
    ws.leakage = leak;
    if (leak >= 1e-6)
        throw NumericalError("oracle: steady-state leakage " + std::to_string(leak) +
                             " >= 1e-6; increase fock_levels");

    ws.rho_ss = std::move(rho);
    ws.steady_ready = true;
    return ws.rho_ss;
}

Eigen::MatrixXcd propagate(OracleWorkspace& ws, const Eigen::MatrixXcd& op, double tau_ps) {
    const Vec w = [&] {
        Vec v;
        vec_of(op, v);
        return Vec(ensure_lu(ws).solve(v));
    }();
    Vec scaled(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k)
        scaled(k) = w(k) * std::exp(ws.eigenvalues(k) * tau_ps);
    return unvec(ws.eigenvectors * scaled, ws.dim);
}

std::vector<std::complex<double>> g1_numeric(OracleWorkspace& ws, std::span<const double> tau_grid_ps) {
    const Mat& rho = steady_state(ws);

    Vec x0;
    vec_of(Mat(rho * ws.sigma_dag_b_plus), x0);
    const Vec w = ensure_lu(ws).solve(x0);
    Vec r;
    vec_of(Mat(ws.sigma_b_minus.transpose()), r);  // Tr[A Y] = vec(A^T) . vec(Y)
    const Vec u = ws.eigenvectors.transpose() * r;

    std::vector<cd> out;
    out.reserve(tau_grid_ps.size());
    for (const double tau : tau_grid_ps) {
        if (tau < 0.0) throw ValidationError("g1_numeric: tau must be >= 0");
        cd acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < w.size(); ++k)
            acc += u(k) * w(k) * std::exp(ws.eigenvalues(k) * tau);
        out.push_back(acc);
    }
    return out;
}

namespace {

// Dormand-Prince 5(4) with PI-free step control, integrating dx/dt = L x and
// sampling x exactly at the requested times.
class Rk45 {
public:
    Rk45(const Mat& gen, double rel_tol) : gen_(gen), tol_(rel_tol) {}

    void advance(Vec& x, double& t, double t_target) {
        double h = std::min(initial_step_, t_target - t);
        while (t < t_target) {
            h = std::min(h, t_target - t);
            const Vec k1 = gen_ * x;
            const Vec k2 = gen_ * (x + h * (1.0 / 5.0) * k1);
            const Vec k3 = gen_ * (x + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
            const Vec k4 = gen_ * (x + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
            const Vec k5 = gen_ * (x + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                            64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
            const Vec k6 = gen_ * (x + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                            46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                            5103.0 / 18656.0 * k5));
            const Vec x5 = x + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                                    2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
            const Vec k7 = gen_ * x5;
            const Vec x4 = x + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                                    393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                                    187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
            const double err = (x5 - x4).norm() / std::max(x.norm(), 1e-300);
            if (err <= tol_ || h <= min_step_) {
                x = x5;
                t += h;
            }
            const double factor = err > 0.0 ? 0.9 * std::pow(tol_ / err, 0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
            if (h < min_step_) h = min_step_;
            if (++steps_ > 20000000)
                throw NumericalError("g1_numeric_rk45: step budget exhausted");
        }
    }

private:
    const Mat& gen_;
    double tol_;
    double initial_step_ = 1e-4;
    double min_step_ = 1e-12;
    long steps_ = 0;
};

} // namespace

std::vector<std::complex<double>> g1_numeric_rk45(OracleWorkspace& ws,
                                                  std::span<const double> tau_grid_ps,
                                                  double rel_tol) {
    const Mat& rho = steady_state(ws);
    Vec x;
    vec_of(Mat(rho * ws.sigma_dag_b_plus), x);
    Vec r;
    vec_of(Mat(ws.sigma_b_minus.transpose()), r);

    Rk45 stepper(ws.liouvillian, rel_tol);
    std::vector<cd> out;
    out.reserve(tau_grid_ps.size());
    double t = 0.0;
    for (const double tau : tau_grid_ps) {
        if (tau < t) throw ValidationError("g1_numeric_rk45: tau grid must be ascending");
        if (tau > t) stepper.advance(x, t, tau);
        out.push_back(r.cwiseProduct(x).sum());  // plain (non-conjugating) product
    }
    return out;
}

Spectrum spectrum_numeric(std::span<const std::complex<double>> g1, double dt_ps,
                          std::vector<double> omega_grid_meV, const NumericSpectrumOptions& opts) {
    if (g1.size() < 16) throw ValidationError("spectrum_numeric: series too short");
    if (!(dt_ps > 0.0)) throw ValidationError("spectrum_numeric: dt must be > 0");
    for (std::size_t i = 0; i + 1 < omega_grid_meV.size(); ++i)
        if (!(omega_grid_meV[i] < omega_grid_meV[i + 1]))
            throw ValidationError("spectrum_numeric: omega grid must be strictly increasing");

    const std::size_t n = g1.size();
    std::vector<cd> work(g1.begin(), g1.end());

    cd plateau{0.0, 0.0};
    if (opts.subtract_plateau) {
        const std::size_t tail_start = n - std::max<std::size_t>(n / 10, 1);
        for (std::size_t i = tail_start; i < n; ++i) plateau += work[i];
        plateau /= static_cast<double>(n - tail_start);
        for (auto& v : work) v -= plateau;
    }
    if (opts.window_alpha_ps > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            work[i] *= std::exp(-opts.window_alpha_ps * dt_ps * static_cast<double>(i));

    const double head = std::abs(work[0]);
    double tail_max = 0.0;
    for (std::size_t i = n - std::max<std::size_t>(n / 20, 1); i < n; ++i)
        tail_max = std::max(tail_max, std::abs(work[i]));
    if (tail_max > opts.decay_tolerance * head)
        throw NumericalError("spectrum_numeric: insufficient decay (tail " +
                             std::to_string(tail_max / std::max(head, 1e-300)) +
                             " of initial); extend tau_max");

    Spectrum spec;
    spec.omega_meV = std::move(omega_grid_meV);
    spec.values.resize(spec.omega_meV.size());
    for (std::size_t i = 0; i < spec.omega_meV.size(); ++i) {
        const double w = rate_from_meV(spec.omega_meV[i]);
        // trapezoid DTFT of the causal half; Hermitian extension doubles Re
        cd acc = 0.5 * work[0];
        for (std::size_t m = 1; m + 1 < n; ++m)
            acc += work[m] * std::exp(cd(0.0, w * dt_ps * static_cast<double>(m)));
        acc += 0.5 * work[n - 1] * std::exp(cd(0.0, w * dt_ps * static_cast<double>(n - 1)));
        double value = 2.0 * std::real(acc) * dt_ps;
        if (opts.render_plateau_linewidth_meV > 0.0) {
            const double eps = rate_from_meV(opts.render_plateau_linewidth_meV) / 2.0;
            value += 2.0 * std::abs(plateau) * eps / (eps * eps + w * w);
        }
        spec.values[i] = value / opts.normalization;
    }
    spec.meta.method = opts.method;
    spec.meta.normalization = opts.normalization;
    spec.meta.coherent_weight = std::abs(plateau);
    spec.meta.window_fwhm_meV = 2.0 * opts.window_alpha_ps * constants::hbar_meV_ps;
    return spec;
}

double rmse(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b) {
    if (a.size() != b.size() || a.empty())
        throw ValidationError("rmse: series must be non-empty and equally sized");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i]) - std::abs(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw ValidationError("rmse: series must be non-empty and equally sized");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i]) - std::abs(b[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

std::vector<std::complex<double>> g1_tls_exact(const VibronicSystem& system,
                                               std::span<const double> tau_grid_ps) {
    const auto dq = derive(system);
    auto atom = tls_regression_exact(system.emitter, dq.omega_renorm_meV, tau_grid_ps);
    for (std::size_t i = 0; i < atom.size(); ++i)
        atom[i] *= phonon_correlation(system.modes, tau_grid_ps[i]);
    return atom;
}

ValidityScan validity_scan(const VibronicSystem& base, std::span<const double> eta_over_nu_grid,
                           std::span<const double> omega_over_eta_grid, const ScanOptions& opts) {
    if (base.modes.size() != 1)
        throw ValidationError("validity_scan: base system must have exactly one mode");

    ValidityScan scan;
    scan.eta_over_nu_grid.assign(eta_over_nu_grid.begin(), eta_over_nu_grid.end());
    scan.omega_over_eta_grid.assign(omega_over_eta_grid.begin(), omega_over_eta_grid.end());
    scan.cutoff = opts.cutoff;

    std::vector<double> taus;
    for (double t = 0.0; t <= opts.tau_max_ps + 1e-12; t += opts.dt_ps) taus.push_back(t);

    for (const double x : eta_over_nu_grid) {
        for (const double y : omega_over_eta_grid) {
            ValidityPoint pt;
            pt.eta_over_nu = x;
            pt.omega_over_eta = y;
            VibronicSystem sys = base;
            sys.modes[0].eta_meV = x * sys.modes[0].nu_meV;
            sys.drive = DriveConfig::from_meV(y * sys.modes[0].eta_meV);
            int fock = default_fock_levels(huang_rhys(sys.modes[0]));
            for (int attempt = 0; attempt < 3; ++attempt) {
                if (2 * fock > opts.max_system_dim) {
                    pt.error = "dimension budget exceeded";
                    break;
                }
                try {
                    TruncationConfig trunc;
                    trunc.fock_levels = {fock};
                    trunc.tau_max_ps = opts.tau_max_ps;
                    trunc.max_system_dim = opts.max_system_dim;
                    auto ws = build_workspace(sys, trunc);
                    const auto num = g1_numeric(ws, taus);
                    const auto ana = g1_tls_exact(sys, taus);
                    std::vector<cd> num_n(num), ana_n(ana);
                    const double n0 = std::abs(num[0]), a0 = std::abs(ana[0]);
                    if (n0 == 0.0 || a0 == 0.0) throw NumericalError("zero correlation at tau=0");
                    for (auto& v : num_n) v /= n0;
                    for (auto& v : ana_n) v /= a0;
                    pt.rmse = rmse(std::span<const cd>(ana_n), std::span<const cd>(num_n));
                    pt.fock_levels = fock;
                    pt.ok = true;
                    break;
                } catch (const NumericalError& e) {
                    pt.error = e.what();
                    fock += 4;
                }
            }
            scan.points.push_back(std::move(pt));
        }
    }
    return scan;
}

} // namespace vmt
