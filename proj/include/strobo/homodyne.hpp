#pragma once

// Closed-form homodyne analytics for the longitudinal readout with the qubit
// treated as a classical sigma_z = +-1.
//
// Conventions: beta = chi/Omega_R, gamma = kappa/Omega_R, the squeezing angle
// of the integrated-noise expression is the input squeezing angle Phi, and the
// signal prefactor uses n = a0^2. SNR is a power ratio throughout.

#include <cstddef>

#include "strobo/params.hpp"
#include "strobo/timeseries.hpp"

namespace strobo {

/// max(5, first k with |J_k(beta)| < 1e-16).
int bessel_cutoff(double beta);

/// <d_out>(t) in steady state, Jacobi-Anger series truncated at |k| <= k_max
/// (k_max <= 0 selects bessel_cutoff).
Complex mean_output_field(double t, const SystemParams& p, int sigma_z, int k_max = 0);

/// Steady cavity mean <d>(t) = -<d_out>(t)/sqrt(kappa).
Complex mean_cavity_field(double t, const SystemParams& p, int sigma_z, int k_max = 0);

/// Exact mean field from <d>(0) = d0: steady part plus the homogeneous solution
/// e^{-kappa t/2} e^{-i beta_z sin(Omega t)} (d0 - d_ss(0)).
Complex cavity_field_from(double t, const SystemParams& p, int sigma_z, Complex d0 = 0.0);

/// Integrates the noise-free Langevin equation for <d> from d0 at t_start.
/// Columns "d" and "d_out" (= -sqrt(kappa) d).
TimeSeries langevin_mean_trajectory(const SystemParams& p, int sigma_z, double t_start,
                                    double t_end, std::size_t n_samples, Complex d0 = 0.0,
                                    double rtol = 1e-11, double atol = 1e-13);

double signal_f0(double tau, const SystemParams& p);
double signal_r(double tau, const SystemParams& p);

/// |Qbar_up - Qbar_down|^2 = 64 kappa^2 chi^2 a0^2 (F0^2 + beta^2 F0 R).
double integrated_signal_sq(double tau, const SystemParams& p);
/// Qbar^2_up + Qbar^2_down for squeezing (r, Phi).
double integrated_noise_sq(double tau, const SystemParams& p, const SqueezeSpec& sq);

struct SnrBreakdown {
    double signal_sq = 0.0;
    double noise_sq = 0.0;
    double snr = 0.0;
    double tau = 0.0;
};

SnrBreakdown snr(double tau, const SystemParams& p, const SqueezeSpec& sq);

/// Long-time SNR(r)/SNR(0) = e^{2r} / (1 + 2 beta^2 (1 - g^2/4 + g^4/16)(e^{4r} - 1)).
double snr_ratio_longtime(double r, const SystemParams& p);

struct OptimalSqueezing {
    double r = 0.0;
    double e2r = 0.0;
    double gain_db = 0.0;  // 10 log10 e^{2 r_opt}
    double peak_ratio = 0.0;
};

/// Closed-form maximizer of snr_ratio_longtime. Throws std::domain_error when
/// the square-root argument is not positive.
OptimalSqueezing optimal_squeezing(const SystemParams& p);

struct RateModel {
    double gamma_phi_vac = 0.0;   // 1/us
    double gamma_meas_vac = 0.0;  // 1/us
    EfficiencyParams eff;

    /// 0.54 and 0.41 per us, eps_in 0.48, eps_out 0.38, no misalignment.
    static RateModel experiment();
    void validate() const;
};

/// Gamma_phi,vac (1 + 2 eps_in (N + M cos 2(Phi + phi0))).
double dephasing_rate(double phi, const SqueezeSpec& sq, const RateModel& rm);
/// Gamma_meas,vac / (1 + 2 eps_in eps_out (N - M cos 2(Phi + phi0 + delta))).
double measurement_rate(double phi, const SqueezeSpec& sq, const RateModel& rm);
/// eta = eps_out (Gamma_phi,vac / Gamma_phi)(Gamma_meas / Gamma_meas,vac).
double efficiency(double phi, const SqueezeSpec& sq, const RateModel& rm);

/// Echo dephasing from residual thermal photons:
/// (kappa/2) Re[sqrt((1 + 2i chi/kappa)^2 + 8i chi n/kappa) - 1].
double thermal_dephasing_rate(double n_th, double chi, double kappa);
/// Inverts thermal_dephasing_rate(n) = 1/t2 on n in [0, 10].
double thermal_photon_bound(double t2, double chi, double kappa);

/// 2 a0^2 chi^2 / kappa.
double gamma_phi_vac_from_params(double a_bar0, double chi, double kappa);
double a_bar0_for_gamma_phi(double gamma_phi, double chi, double kappa);

/// Two-state discrimination fidelity 1 - erfc(sqrt(SNR)/2) for equal Gaussian widths.
double readout_fidelity(double snr_value);
double snr_for_fidelity(double fidelity);
/// First integration time at which snr() reaches the target fidelity.
double fidelity_time(const SystemParams& p, const SqueezeSpec& sq, double fidelity = 0.999,
                     double t_max = 100.0);

}  // namespace strobo
