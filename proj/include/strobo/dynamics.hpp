#pragma once

#include <functional>
#include <string>
#include <vector>

#include "strobo/hamiltonians.hpp"
#include "strobo/operators.hpp"
#include "strobo/params.hpp"
#include "strobo/timeseries.hpp"

namespace strobo {

struct NamedOperator {
    std::string name;
    Operator op;
};

struct EvolutionConfig {
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t n_samples = 101;  // uniform grid including both ends
    double rtol = 1e-8;
    double atol = 1e-10;
    /// 0 selects the cap; larger values are clamped to (2 pi / w_max) / 10,
    /// i.e. a twentieth of the Rabi period when 2 Omega_R envelopes are present.
    double max_step = 0.0;
    std::vector<NamedOperator> observables;
    double truncation_threshold = 1e-6;
    bool truncation_is_error = false;
    /// End the run at the first sample where the threshold is exceeded.
    bool stop_on_truncation = false;
    /// Evaluated at each sample after recording; returning true ends the run.
    std::function<bool(double t, const TimeSeries& so_far)> stop;

    std::vector<double> grid() const;
};

struct EvolutionResult {
    TimeSeries series;
    DensityMatrix final_state;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::vector<std::string> warnings;
};

/// Integrates d rho/dt = -i[H(t), rho] + sum_k D[L_k] rho.
EvolutionResult evolve(const DensityMatrix& rho0, const TimeDependentHamiltonian& h,
                       const std::vector<Operator>& collapse, const EvolutionConfig& cfg);

struct SteadyStateConfig {
    std::vector<NamedOperator> observables;
    double chunk = 0.1;      // us between convergence checks; use 1/kappa
    double tolerance = 1e-8; // max observable change per chunk
    double t_max = 100.0;
    double rtol = 1e-9;
    double atol = 1e-11;
    double truncation_threshold = 1e-6;
    /// End the run early once a top-level population exceeds the threshold.
    bool stop_on_truncation = false;
};

struct SteadyStateResult {
    DensityMatrix state;
    std::vector<Complex> values;  // observables at the end
    double time = 0.0;
    bool converged = false;
    double max_top_population = 0.0;
    std::vector<double> top_populations;  // per bosonic slot, max over the run
};

SteadyStateResult evolve_to_steady(const DensityMatrix& rho0, const TimeDependentHamiltonian& h,
                                   const std::vector<Operator>& collapse,
                                   const SteadyStateConfig& cfg);

/// sqrt(kappa)(sqrt(Ns + 1) d - e^{2i phi} sqrt(Ns) d^dag) on slot "cavity".
/// In a squeezed frame d is replaced by frame_annihilation.
std::vector<Operator> broadband_squeezed_dissipators(double ns, double phi, double kappa,
                                                     const HilbertSpec& spec,
                                                     const ModeFrame& cavity = {});

/// sqrt(kappa_sqz) b + sqrt(kappa) d.
std::vector<Operator> cascaded_dissipators(const SystemParams& p, const HilbertSpec& spec,
                                           const ModeFrame& cavity = {},
                                           const ModeFrame& dpa = {});

/// Frame in which a Gaussian mode with <a^dag a> = n and <a a> = m is thermal.
ModeFrame frame_for_moments(double n, Complex m);

/// Steady Gaussian second moments of the source-cavity cascade without the qubit.
struct CascadeMoments {
    double n_dpa = 0.0;
    Complex m_dpa = 0.0;   // <b b>
    double n_cavity = 0.0;
    Complex m_cavity = 0.0;  // <d d>
    Complex bd = 0.0;        // <b d>
};
CascadeMoments cascade_moments(const SystemParams& p, double lambda, double phi);

/// Closed-form steady intracavity photon number of the cascaded source.
double cascaded_photon_number(double lambda, double kappa_sqz, double kappa);

/// Parametric drive giving the requested steady photon number (bisection).
double dpa_drive_for_target(double ns_target, const SystemParams& p);

/// DPA power gain (dB) as phase-sensitive gain e^{2r}: Ns = sinh^2 r.
double ns_from_dpa_gain(double gain_db);
/// The ideal squeezed vacuum with that Ns, for the analytic SNR at equal Ns.
SqueezeSpec squeeze_from_dpa_gain(double gain_db, double phi);

struct LifetimeFit {
    double t_eff = 0.0;
    double std_error = 0.0;
    double window = 0.0;
    std::size_t n_points = 0;
    double rms_residual = 0.0;  // of log<sigma_z>
};

/// Fits log<sigma_z>(t) = -2t/T_eff through the origin. window <= 0 selects
/// [0, first time <sigma_z> <= 0.8], or the full series when it never gets there.
LifetimeFit effective_lifetime(const TimeSeries& ts, double window = 0.0,
                               const std::string& column = "sigma_z");

enum class SqueezeSource { Broadband, Cascaded };

struct DecayConfig {
    double t_max = 10.0;
    double sample_dt = 0.005;
    std::size_t cavity_dim = 8;  // starting truncations in the frame; raised as needed
    std::size_t dpa_dim = 8;
    double rtol = 1e-8;
    double atol = 1e-10;
    RabiFrameTerms terms = RabiFrameTerms::Full;
    int max_raises = 6;
    /// Stop once <sigma_z> falls below this value (the fit window ends at 0.8).
    double stop_below = 0.78;
    /// Truncate in the squeezed frame of the reservoir's steady state. The modes
    /// then start in that frame's vacuum, i.e. with the squeezing already built
    /// up; without it they start in the Fock vacuum.
    bool squeezed_frame = true;
};

struct DecayResult {
    TimeSeries series;
    LifetimeFit fit;
    HilbertSpec spec;
    double ns = 0.0;
    double lambda = 0.0;  // cascaded only
    int raises = 0;
    ModeFrame cavity_frame, dpa_frame;
};

/// Qubit starts in |e>, cavity (and DPA) in the frame vacuum (see DecayConfig);
/// records <sigma_z> and <d^dag d>. Truncations grow while the top-level
/// population exceeds 1e-6.
DecayResult simulate_sigma_z_decay(const SystemParams& p, SqueezeSource source, double ns,
                                   double phi, const DecayConfig& cfg = {});

struct CascadedSteadyResult {
    double photon_number = 0.0;
    double target = 0.0;
    double lambda = 0.0;
    HilbertSpec spec;
    int raises = 0;
    bool converged = false;
    bool truncation_ok = false;
    ModeFrame cavity_frame, dpa_frame;
};

/// Steady <d^dag d> of the DPA-cavity cascade with the measurement drive off.
/// The qubit is decoupled in that case and is left out of the simulation.
///
/// With squeezed_frame each mode is expanded in the Fock basis of a locally
/// squeezed frame, rho' = S^dag rho S, chosen so the steady state is close to
/// thermal there; the master equation is the same, only the truncation differs.
/// The frame comes from the Gaussian second moments of the linear cascade.
/// Without it the cavity starts at max(cavity_dim, squeezed-vacuum estimate).
/// Truncations grow until the two top levels of each mode hold below 1e-6.
CascadedSteadyResult cascaded_steady_photons(const SystemParams& p, double ns_target,
                                             std::size_t cavity_dim, std::size_t dpa_dim,
                                             int max_raises = 10, bool squeezed_frame = true);

/// Smallest cavity truncation holding a squeezed vacuum of mean photon number
/// ns with tail population below tol.
std::size_t squeezed_vacuum_dim(double ns, double tol = 1e-7);

}  // namespace strobo
