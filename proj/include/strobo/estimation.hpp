#pragma once

// Synthetic homodyne records and the estimators applied to them.
//
// Record model (Gaussian steady state): each sample adds
//   +-s dt + sqrt(F dt) xi,   s^2 = 2 Gamma_phi,vac eps_out,
//   F = 1 + 2 eps_in eps_out (N - M cos 2 Phi~),
// scaled to detector units by a0 chi / kappa. The power SNR of the integrated
// voltage after time t is 8 Gamma_phi,vac eps_out t / F = 4 Gamma_meas t.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "strobo/homodyne.hpp"
#include "strobo/levmar.hpp"
#include "strobo/params.hpp"
#include "strobo/timeseries.hpp"

namespace strobo {

enum class QubitState { Ground, Excited };

struct RecordOptions {
    double sample_rate = 20.0;  // samples per us
    double p_relax = 0.02;      // excited preparations that are actually ground
    unsigned threads = 1;
};

struct RecordBatch {
    /// Cumulative integrated voltage, one shot per row, sample k at t = (k+1) dt.
    Eigen::MatrixXd voltage;
    std::vector<QubitState> labels;  // prepared state per shot
    double dt = 0.05;
    std::uint64_t seed = 0;

    std::size_t n_shots() const { return static_cast<std::size_t>(voltage.rows()); }
    std::size_t n_samples() const { return static_cast<std::size_t>(voltage.cols()); }
    std::vector<double> times() const;
    /// Integrated voltage divided by the integration time, per shot.
    std::vector<double> mean_voltage(std::size_t sample) const;
    std::vector<double> final_mean_voltage() const { return mean_voltage(n_samples() - 1); }

    /// "# dt=..,seed=.." line, header "shot,label,v1..vn", one shot per row.
    void write_csv(std::ostream& os) const;
    static RecordBatch read_csv(std::istream& is);
};

double record_signal_rate(const RateModel& rm);
double record_noise_factor(double phi, const SqueezeSpec& sq, const RateModel& rm);

/// Deterministic in (seed, shot index) regardless of thread count.
RecordBatch synth_records(const SystemParams& p, const SqueezeSpec& sq, const RateModel& rm,
                          QubitState state, std::size_t n_shots, double t_int,
                          std::uint64_t seed, const RecordOptions& opt = {});

/// Power SNR (2 (Ve - Vg) / (sd_e + sd_g))^2 at every sample time; column "snr".
TimeSeries snr_vs_time(const RecordBatch& ground, const RecordBatch& excited);

struct RateFit {
    double gamma = 0.0;
    double gamma_se = 0.0;
    double slope = 0.0;  // raw fitted slope (SNR per us, or decay rate)
    double slope_se = 0.0;
    double intercept = 0.0;
    std::size_t n_points = 0;
    double window = 0.0;
};

/// Least-squares line through the origin SNR = 4 Gamma_meas t over t <= window
/// (window <= 0: all points). Needs >= 5 points.
RateFit fit_measurement_rate(const TimeSeries& snr_ts, double window = 0.0,
                             const std::string& column = "snr");

/// Same estimator with a delete-one-group jackknife error over shot groups; the
/// SNR(t) samples of one ensemble are correlated, so the line-fit error is not usable.
RateFit jackknife_measurement_rate(const RecordBatch& ground, const RecordBatch& excited,
                                   std::size_t groups = 20, double window = 0.0);

/// Exponential decay fit of column/column(t0): log-linear with free intercept over
/// t >= t_min. Returns Gamma_phi = 1/T_phi.
RateFit fit_ramsey(const TimeSeries& ts, const std::string& column = "sigma_x", double t_min = 0.0);

struct SweepPoint {
    double phi = 0.0;
    double gain_db = 0.0;
    double value = 0.0;
};
using Sweep = std::vector<SweepPoint>;

Sweep dephase_sweep(const std::vector<double>& phis, const std::vector<double>& gains_db,
                    const RateModel& rm);
Sweep meas_sweep(const std::vector<double>& phis, const std::vector<double>& gains_db,
                 const RateModel& rm);
/// Multiplies every value by (1 + noise_frac * xi), xi standard normal.
Sweep with_noise(Sweep s, double noise_frac, std::uint64_t seed);

struct JointFitOptions {
    int delta_starts = 6;
    int phase_starts = 6;
    LevMarOptions lm;
};

/// Fits (eps_in, delta, phi0) to both sweeps at once with Gamma_phi,vac,
/// Gamma_meas,vac and eps_out held at rm_fixed. Relative residuals. Angles are
/// reported in (-pi/2, pi/2].
FitResult joint_fit(const Sweep& dephase, const Sweep& meas, const RateModel& rm_fixed,
                    const JointFitOptions& opt = {});

struct Histogram {
    std::vector<double> edges;   // n_bins + 1
    std::vector<double> counts;  // n_bins
    double total = 0.0;

    std::size_t bins() const { return counts.size(); }
    double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
    double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    double density(std::size_t i) const { return counts[i] / (total * width(i)); }
};

/// 2 IQR n^{-1/3}.
double freedman_diaconis_width(std::vector<double> values);
Histogram histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);
/// Freedman-Diaconis bins over [lo, hi] (defaults to the data range).
Histogram histogram_fd(const std::vector<double>& values);
Histogram histogram_fd(const std::vector<double>& values, double lo, double hi);

double gaussian_pdf(double x, double mu, double sigma);

/// Normal density fit to a histogram; parameters "mu", "sigma".
FitResult fit_gaussian(const Histogram& h);
/// (1 - w) N(mu, sigma) + w N(mu2, sigma) with w in [0, 0.1]; parameters
/// "mu", "sigma", "mu2", "weight". mu2_guess seeds the contamination peak.
FitResult fit_double_gaussian(const Histogram& h, double mu2_guess);

/// Integral of min(N(mu1, s1), N(mu2, s2)).
double gaussian_overlap(double mu1, double s1, double mu2, double s2);

nlohmann::json fit_report(const FitResult& fit);

}  // namespace strobo
