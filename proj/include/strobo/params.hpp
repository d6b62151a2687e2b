#pragma once

// Parameter model for the stroboscopic readout setup.
//
// Unit system: angular frequencies in rad/us, times in us, rates in 1/us.
// Frequencies quoted as omega/2pi in MHz are converted exactly once, at the
// API edge (JSON loading and the mhz() helper).

#include <array>
#include <complex>
#include <numbers>
#include <optional>

#include <json.hpp>

namespace strobo {

using Complex = std::complex<double>;

/// omega/2pi in MHz -> omega in rad/us.
constexpr double mhz(double f_mhz) { return 2.0 * std::numbers::pi * f_mhz; }

/// omega in rad/us -> omega/2pi in MHz.
constexpr double to_mhz(double omega) { return omega / (2.0 * std::numbers::pi); }

double chi_from_g_delta(double g, double delta);

/// Inputs for SystemParams::build. Angular units; optional fields are derived.
struct SystemInputs {
    double omega_q = 0.0;
    double omega_c = 0.0;
    double g = 0.0;
    std::optional<double> chi;     // default g^2/delta
    double kappa = 0.0;
    double omega_r = 0.0;
    double a_bar0 = 0.0;
    double kappa_sqz = 0.0;
    std::optional<Complex> eps_plus;   // default: steady sideband response
    std::optional<Complex> eps_minus;
};

struct SystemParams {
    double omega_q = 0.0;
    double omega_c = 0.0;
    double g = 0.0;
    double delta = 0.0;  // omega_q - omega_c
    double chi = 0.0;
    double kappa = 0.0;
    double omega_r = 0.0;
    double a_bar0 = 0.0;
    double kappa_sqz = 0.0;
    Complex eps_plus;
    Complex eps_minus;

    /// Derives delta, and chi / eps_+- when absent, then checks invariants.
    static SystemParams build(const SystemInputs& in);

    /// Experimental values: qubit 3.898 GHz, cavity 6.694 GHz, g 45.2 MHz,
    /// chi 0.73 MHz, kappa 5.9 MHz, Rabi 40 MHz, a0 0.35, squeezer 26 MHz.
    static SystemParams experiment();

    /// Qubit drive frequency that cancels the static shifts,
    /// omega_q + chi + 4 chi a0^2.
    double drive_frequency() const;

    /// chi / Omega_R.
    double beta() const { return chi / omega_r; }
    /// kappa / Omega_R.
    double gamma() const { return kappa / omega_r; }

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

/// Sideband amplitudes that hold the classical cavity field at
/// 2 a0 cos(Omega_R t) in the frame rotating at omega_c.
std::array<Complex, 2> sideband_amplitudes(double a_bar0, double omega_r, double kappa);

/// Squeezed-vacuum description. Ideal squeezing: M = sqrt(N(N+1)), N = G - 1,
/// N = sinh^2 r, quadrature variances (1/2 + N +- M)/2 = e^{+-2r}/4.
struct SqueezeSpec {
    double r = 0.0;
    double phi = 0.0;
    double n_photons = 0.0;
    double m_coherence = 0.0;
    double gain_db = 0.0;

    static SqueezeSpec from_r(double r, double phi);
    static SqueezeSpec off() { return {}; }
};

/// Phase-preserving squeezer gain (dB) -> ideal squeezed state.
SqueezeSpec gain_to_squeeze(double gain_db, double phi);
double squeeze_to_gain(const SqueezeSpec& sq);

struct EfficiencyParams {
    double eps_in = 0.0;
    double eps_out = 1.0;
    double delta_align = 0.0;   // quadrature misalignment of the amplifier
    double global_phase = 0.0;

    void validate() const;
};

struct ValidityReport {
    std::array<double, 4> ratios{};
    std::array<bool, 4> pass{};
    double threshold = 0.0;

    bool all_pass() const { return pass[0] && pass[1] && pass[2] && pass[3]; }
};

/// Dispersive-regime conditions g Omega/Delta^2, g Omega/(Delta(Delta+2 omega_c)),
/// (g/Delta)|eps_+|/|Omega - Delta|, (g/Delta)|eps_-|/|Omega + Delta| (magnitudes).
ValidityReport validate_dispersive(const SystemParams& p, double threshold = 0.01);

// JSON: keys match the field names, frequencies as omega/2pi in MHz.
// Unknown keys are rejected.
SystemParams system_params_from_json(const nlohmann::json& j);
nlohmann::json system_params_to_json(const SystemParams& p);
EfficiencyParams efficiency_from_json(const nlohmann::json& j);

}  // namespace strobo
