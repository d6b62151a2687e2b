#include "strobo/homodyne.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "strobo/errors.hpp"
#include "strobo/numeric.hpp"
#include "strobo/ode.hpp"

namespace strobo {

namespace {

using namespace std::complex_literals;

// J_k(x) for any integer k and real x.
double bessel_j(int k, double x) {
    const int ak = std::abs(k);
    double v = std::cyl_bessel_j(static_cast<double>(ak), std::abs(x));
    const bool odd = (ak % 2) != 0;
    if (odd && k < 0) v = -v;
    if (odd && x < 0.0) v = -v;
    return v;
}

}  // namespace

int bessel_cutoff(double beta) {
    int k = 0;
    while (std::abs(bessel_j(k, beta)) >= 1e-16) {
        ++k;
        if (k > 10000) throw NumericalError("bessel_cutoff: series does not converge");
    }
    return std::max(5, k);
}

Complex mean_output_field(double t, const SystemParams& p, int sigma_z, int k_max) {
    if (sigma_z != 1 && sigma_z != -1) {
        throw std::invalid_argument("mean_output_field: sigma_z must be +1 or -1");
    }
    const double bz = p.beta() * sigma_z;
    if (k_max <= 0) k_max = bessel_cutoff(bz);
    const double w = p.omega_r;
    const double k = p.kappa;
    auto term = [&](int m) {
        return std::exp(Complex(0.0, m * w * t)) / Complex(k, 2.0 * m * w);
    };
    Complex sum = 0.0;
    for (int j = -k_max; j <= k_max; ++j) {
        sum += bessel_j(j, bz) * (term(j - 2) + 2.0 * term(j) + term(j + 2));
    }
    return 1i * std::sqrt(k) * bz * w * p.a_bar0 * std::exp(Complex(0.0, -bz * std::sin(w * t))) *
           sum;
}

Complex mean_cavity_field(double t, const SystemParams& p, int sigma_z, int k_max) {
    return -mean_output_field(t, p, sigma_z, k_max) / std::sqrt(p.kappa);
}

Complex cavity_field_from(double t, const SystemParams& p, int sigma_z, Complex d0) {
    const double bz = p.beta() * sigma_z;
    const Complex homogeneous =
        std::exp(-0.5 * p.kappa * t) * std::exp(Complex(0.0, -bz * std::sin(p.omega_r * t)));
    return mean_cavity_field(t, p, sigma_z) + homogeneous * (d0 - mean_cavity_field(0.0, p, sigma_z));
}

TimeSeries langevin_mean_trajectory(const SystemParams& p, int sigma_z, double t_start,
                                    double t_end, std::size_t n_samples, Complex d0, double rtol,
                                    double atol) {
    if (n_samples < 2 || !(t_end > t_start)) {
        throw std::invalid_argument("langevin_mean_trajectory: bad time grid");
    }
    const double s = sigma_z;
    const double w = p.omega_r;
    auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.resize(1);
        dy(0) = -1i * p.chi * p.a_bar0 * (1.0 + std::cos(2.0 * w * t)) * s -
                1i * p.chi * std::cos(w * t) * s * y(0) - 0.5 * p.kappa * y(0);
    };
    std::vector<double> grid(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        grid[i] = t_start + (t_end - t_start) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    }
    grid.back() = t_end;

    TimeSeries ts;
    ts.add_column("d");
    ts.add_column("d_out");
    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = atol;
    opt.max_step = 2.0 * std::numbers::pi / w / 20.0;
    Eigen::VectorXcd y(1);
    y(0) = d0;
    const double sk = std::sqrt(p.kappa);
    integrate_dopri5(rhs, y, grid, opt, [](Eigen::VectorXcd&) { return false; },
                     [&](double t, const Eigen::VectorXcd& v) {
                         ts.times.push_back(t);
                         ts.columns[0].push_back(v(0));
                         ts.columns[1].push_back(-sk * v(0));
                         return true;
                     });
    return ts;
}

double signal_f0(double tau, const SystemParams& p) {
    const double k = p.kappa;
    const double w = p.omega_r;
    const double s = std::sin(w * tau);
    const double c = std::cos(w * tau);
    return tau / k + s / (k * k + 16.0 * w * w) * (4.0 * s + k / w * c);
}

double signal_r(double tau, const SystemParams& p) {
    const double k = p.kappa;
    const double w = p.omega_r;
    const double k2 = k * k;
    const double w2 = w * w;
    const double s = std::sin(w * tau);
    const double c = std::cos(w * tau);
    const double s2 = std::sin(2.0 * w * tau);
    const double c2 = std::cos(2.0 * w * tau);
    return -3.0 * tau / (4.0 * k) + k * tau / (4.0 * (k2 + 16.0 * w2)) +
           k * tau / (2.0 * (k2 + 4.0 * w2)) + s2 / (4.0 * k * w) -
           s / (k2 + 4.0 * w2) * (s + k / (2.0 * w) * c) -
           s * s / (k2 + 36.0 * w2) * (3.0 * c2 - k / (2.0 * w) * s2) -
           s / (k2 + 16.0 * w2) * (2.0 * s * s * s + k / (2.0 * w) * c - k / (4.0 * w) * c * c2) +
           s2 / (k2 + 64.0 * w2) * (s2 + k / (8.0 * w) * c2);
}

double integrated_signal_sq(double tau, const SystemParams& p) {
    if (!(tau > 0.0)) throw std::domain_error("integrated_signal_sq: tau must be > 0");
    const double b = p.beta();
    const double f0 = signal_f0(tau, p);
    return 64.0 * p.kappa * p.kappa * p.chi * p.chi * p.a_bar0 * p.a_bar0 *
           (f0 * f0 + b * b * f0 * signal_r(tau, p));
}

double integrated_noise_sq(double tau, const SystemParams& p, const SqueezeSpec& sq) {
    if (!(tau > 0.0)) throw std::domain_error("integrated_noise_sq: tau must be > 0");
    const double k = p.kappa;
    const double w = p.omega_r;
    const double k2 = k * k;
    const double w2 = w * w;
    const double b = p.beta();
    const double ch = std::cosh(2.0 * sq.r);
    const double sh = std::sinh(2.0 * sq.r);
    const double c2t = std::cos(2.0 * sq.phi);

    const double den1 = k2 + w2;
    const double den4 = k2 + 4.0 * w2;
    const double den16 = k2 + 16.0 * w2;
    const double brace =
        32.0 * w2 / den4 * k * tau -
        16.0 * w2 * (5.0 * k2 * k2 + 16.0 * w2 * w2) / (den4 * den4 * den1) +
        16.0 * k2 * w *
            (w * (-7.0 * k2 + 8.0 * w2) * std::cos(2.0 * w * tau) +
             k * (k2 - 14.0 * w2) * std::sin(2.0 * w * tau)) /
            (den1 * den4 * den16) +
        16.0 * std::exp(-0.5 * k * tau) *
            (4.0 * w2 * (2.0 * k2 * k2 + 3.0 * k2 * w2 + 16.0 * w2 * w2) / (den1 * den4 * den16) +
             2.0 * k2 * w * (k2 - 2.0 * w2) *
                 (2.0 * w * std::cos(w * tau) + k * std::sin(2.0 * w * tau)) /
                 (den4 * den4 * den1));
    return 2.0 * (ch - c2t * sh) * k * tau + b * b * sh * c2t * brace;
}

SnrBreakdown snr(double tau, const SystemParams& p, const SqueezeSpec& sq) {
    SnrBreakdown out;
    out.tau = tau;
    out.signal_sq = integrated_signal_sq(tau, p);
    out.noise_sq = integrated_noise_sq(tau, p, sq);
    if (!(out.noise_sq > 0.0)) {
        throw NumericalError("snr: integrated noise is not positive");
    }
    out.snr = out.signal_sq / out.noise_sq;
    return out;
}

double snr_ratio_longtime(double r, const SystemParams& p) {
    if (r < 0.0) throw std::domain_error("snr_ratio_longtime: r must be >= 0");
    const double b = p.beta();
    const double g = p.gamma();
    const double poly = 1.0 - g * g / 4.0 + g * g * g * g / 16.0;
    return std::exp(2.0 * r) / (1.0 + 2.0 * b * b * poly * (std::exp(4.0 * r) - 1.0));
}

OptimalSqueezing optimal_squeezing(const SystemParams& p) {
    const double b2 = p.beta() * p.beta();
    const double g2 = p.gamma() * p.gamma();
    const double c = 16.0 - 4.0 * g2 + g2 * g2;
    const double arg = (8.0 - b2 * c) / (b2 * c);
    if (!(arg > 0.0) || !std::isfinite(arg)) {
        throw std::domain_error("optimal_squeezing: no interior optimum for these beta, gamma");
    }
    OptimalSqueezing o;
    o.e2r = std::sqrt(arg);
    o.r = 0.5 * std::log(o.e2r);
    o.gain_db = 10.0 * std::log10(o.e2r);
    o.peak_ratio = snr_ratio_longtime(std::max(o.r, 0.0), p);
    return o;
}

RateModel RateModel::experiment() {
    RateModel rm;
    rm.gamma_phi_vac = 0.54;
    rm.gamma_meas_vac = 0.41;
    rm.eff.eps_in = 0.48;
    rm.eff.eps_out = 0.38;
    return rm;
}

void RateModel::validate() const {
    if (!(gamma_phi_vac > 0.0) || !(gamma_meas_vac > 0.0)) {
        throw std::invalid_argument("RateModel: vacuum rates must be > 0");
    }
    eff.validate();
}

double dephasing_rate(double phi, const SqueezeSpec& sq, const RateModel& rm) {
    const double factor = 1.0 + 2.0 * rm.eff.eps_in *
                                    (sq.n_photons +
                                     sq.m_coherence * std::cos(2.0 * (phi + rm.eff.global_phase)));
    if (!(factor > 0.0)) {
        throw std::domain_error("dephasing_rate: non-positive rate for these eps_in, N, M");
    }
    return rm.gamma_phi_vac * factor;
}

double measurement_rate(double phi, const SqueezeSpec& sq, const RateModel& rm) {
    const double phi_tilde = phi + rm.eff.global_phase + rm.eff.delta_align;
    const double denom = 1.0 + 2.0 * rm.eff.eps_in * rm.eff.eps_out *
                                   (sq.n_photons - sq.m_coherence * std::cos(2.0 * phi_tilde));
    if (!(denom > 0.0)) {
        throw std::domain_error("measurement_rate: non-positive noise factor");
    }
    return rm.gamma_meas_vac / denom;
}

double efficiency(double phi, const SqueezeSpec& sq, const RateModel& rm) {
    return rm.eff.eps_out * (rm.gamma_phi_vac / dephasing_rate(phi, sq, rm)) *
           (measurement_rate(phi, sq, rm) / rm.gamma_meas_vac);
}

double thermal_dephasing_rate(double n_th, double chi, double kappa) {
    const Complex a = 1.0 + 2i * chi / kappa;
    return 0.5 * kappa * (std::sqrt(a * a + 8i * chi * n_th / kappa) - 1.0).real();
}

double thermal_photon_bound(double t2, double chi, double kappa) {
    if (!(t2 > 0.0)) throw std::domain_error("thermal_photon_bound: T2 must be > 0");
    if (std::isinf(t2)) return 0.0;
    const double target = 1.0 / t2;
    auto f = [&](double n) { return thermal_dephasing_rate(n, chi, kappa) - target; };
    if (f(10.0) < 0.0) {
        throw NumericalError("thermal_photon_bound: no root for n_th in [0, 10]");
    }
    return bisect(f, 0.0, 10.0, 1e-12);
}

double gamma_phi_vac_from_params(double a_bar0, double chi, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("gamma_phi_vac_from_params: kappa must be > 0");
    return 2.0 * a_bar0 * a_bar0 * chi * chi / kappa;
}

double a_bar0_for_gamma_phi(double gamma_phi, double chi, double kappa) {
    if (!(kappa > 0.0) || chi == 0.0 || gamma_phi < 0.0) {
        throw std::domain_error("a_bar0_for_gamma_phi: need kappa > 0, chi != 0, rate >= 0");
    }
    return std::sqrt(gamma_phi * kappa / 2.0) / std::abs(chi);
}

double readout_fidelity(double snr_value) {
    if (snr_value < 0.0) throw std::domain_error("readout_fidelity: SNR must be >= 0");
    return 1.0 - std::erfc(0.5 * std::sqrt(snr_value));
}

double snr_for_fidelity(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity < 1.0)) {
        throw std::domain_error("snr_for_fidelity: fidelity must lie in [0, 1)");
    }
    double hi = 1.0;
    while (readout_fidelity(hi) < fidelity) hi *= 2.0;
    return bisect([&](double s) { return readout_fidelity(s) - fidelity; }, 0.0, hi, 1e-12);
}

double fidelity_time(const SystemParams& p, const SqueezeSpec& sq, double fidelity, double t_max) {
    const double need = snr_for_fidelity(fidelity);
    auto f = [&](double tau) { return snr(tau, p, sq).snr - need; };
    // coarse scan for the first crossing, then bisection inside it
    const int n = 4000;
    double prev = 1e-6;
    for (int i = 1; i <= n; ++i) {
        const double tau = t_max * static_cast<double>(i) / n;
        if (f(tau) >= 0.0) return bisect(f, prev, tau, 1e-12);
        prev = tau;
    }
    throw NumericalError("fidelity_time: target fidelity not reached before t_max");
}

}  // namespace strobo
