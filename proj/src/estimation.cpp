#include "strobo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "strobo/errors.hpp"
#include "strobo/numeric.hpp"

namespace strobo {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, index).
std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 1)));
}

// Wraps an angle into (-pi/2, pi/2].
double wrap_half(double a) {
    double w = std::remainder(a, kPi);
    if (w <= -kPi / 2) w += kPi;
    return w;
}

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

}  // namespace

std::vector<double> RecordBatch::times() const {
    std::vector<double> t(n_samples());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k + 1) * dt;
    return t;
}

std::vector<double> RecordBatch::mean_voltage(std::size_t sample) const {
    if (sample >= n_samples()) throw std::out_of_range("RecordBatch::mean_voltage: sample index");
    const double t = static_cast<double>(sample + 1) * dt;
    std::vector<double> v(n_shots());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(sample)) / t;
    return v;
}

void RecordBatch::write_csv(std::ostream& os) const {
    std::ostringstream line;
    line.precision(17);
    line << "# dt=" << dt << ",seed=" << seed << '\n';
    line << "shot,label";
    for (std::size_t k = 0; k < n_samples(); ++k) line << ",v" << (k + 1);
    line << '\n';
    for (std::size_t i = 0; i < n_shots(); ++i) {
        line << i << ',' << (labels[i] == QubitState::Excited ? 'e' : 'g');
        for (std::size_t k = 0; k < n_samples(); ++k)
            line << ',' << voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        line << '\n';
    }
    os << line.str();
}

RecordBatch RecordBatch::read_csv(std::istream& is) {
    RecordBatch b;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# dt=", 0) != 0)
        throw std::invalid_argument("record CSV: missing '# dt=...,seed=...' line");
    {
        const auto comma = line.find(",seed=");
        if (comma == std::string::npos) throw std::invalid_argument("record CSV: missing seed");
        b.dt = std::stod(line.substr(5, comma - 5));
        b.seed = std::stoull(line.substr(comma + 6));
    }
    if (!std::getline(is, line) || line.rfind("shot,label", 0) != 0)
        throw std::invalid_argument("record CSV: missing header");
    const std::size_t n_samples = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 1;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // shot index
        std::getline(ss, cell, ',');
        if (cell == "e") b.labels.push_back(QubitState::Excited);
        else if (cell == "g") b.labels.push_back(QubitState::Ground);
        else throw std::invalid_argument("record CSV line " + std::to_string(lineno) + ": bad label");
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != n_samples)
            throw std::invalid_argument("record CSV line " + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    b.voltage.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_samples));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < n_samples; ++k)
            b.voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return b;
}

double record_signal_rate(const RateModel& rm) {
    return std::sqrt(2.0 * rm.gamma_phi_vac * rm.eff.eps_out);
}

double record_noise_factor(double phi, const SqueezeSpec& sq, const RateModel& rm) {
    const double phase = phi + rm.eff.global_phase + rm.eff.delta_align;
    return 1.0 + 2.0 * rm.eff.eps_in * rm.eff.eps_out *
                     (sq.n_photons - sq.m_coherence * std::cos(2.0 * phase));
}

RecordBatch synth_records(const SystemParams& p, const SqueezeSpec& sq, const RateModel& rm,
                          QubitState state, std::size_t n_shots, double t_int,
                          std::uint64_t seed, const RecordOptions& opt) {
    if (n_shots < 1) throw std::invalid_argument("synth_records: n_shots must be >= 1");
    if (!(t_int > 0.0) || !(opt.sample_rate > 0.0))
        throw std::invalid_argument("synth_records: t_int and sample_rate must be positive");
    if (opt.p_relax < 0.0 || opt.p_relax > 1.0)
        throw std::invalid_argument("synth_records: p_relax must be in [0, 1]");
    rm.validate();

    const double dt = 1.0 / opt.sample_rate;
    const auto n_samples = static_cast<std::size_t>(std::llround(t_int * opt.sample_rate));
    if (n_samples < 1) throw std::invalid_argument("synth_records: t_int shorter than one sample");

    const double v_scale = p.a_bar0 * p.chi / p.kappa;
    const double step_mean = v_scale * record_signal_rate(rm) * dt;
    const double step_sd = v_scale * std::sqrt(record_noise_factor(sq.phi, sq, rm) * dt);

    RecordBatch b;
    b.dt = dt;
    b.seed = seed;
    b.voltage.resize(static_cast<Eigen::Index>(n_shots), static_cast<Eigen::Index>(n_samples));
    b.labels.assign(n_shots, state);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = stream_for(seed, i);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const bool relaxed = state == QubitState::Excited && uni(rng) < opt.p_relax;
            const double mean = (state == QubitState::Excited && !relaxed) ? step_mean : -step_mean;
            double v = 0.0;
            for (std::size_t k = 0; k < n_samples; ++k) {
                v += mean + step_sd * gauss(rng);
                b.voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
            }
        }
    };

    unsigned threads = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_shots));
    if (threads <= 1) {
        work(0, n_shots);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_shots + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(n_shots, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return b;
}

TimeSeries snr_vs_time(const RecordBatch& ground, const RecordBatch& excited) {
    if (ground.n_shots() < 2 || excited.n_shots() < 2)
        throw std::invalid_argument("snr_vs_time: each batch needs at least two shots");
    if (ground.n_samples() != excited.n_samples() || ground.dt != excited.dt)
        throw std::invalid_argument("snr_vs_time: batches differ in sampling");
    TimeSeries ts;
    ts.times = ground.times();
    ts.add_column("snr");
    auto& col = ts.columns[0];
    col.resize(ts.times.size());
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const Eigen::VectorXd g = ground.voltage.col(kk);
        const Eigen::VectorXd e = excited.voltage.col(kk);
        const double mg = g.mean(), me = e.mean();
        const double sg = std::sqrt((g.array() - mg).square().sum() / static_cast<double>(g.size() - 1));
        const double se = std::sqrt((e.array() - me).square().sum() / static_cast<double>(e.size() - 1));
        if (!(sg + se > 0.0)) throw NumericalError("snr_vs_time: degenerate ensemble spread");
        const double ratio = 2.0 * (me - mg) / (sg + se);
        col[k] = ratio * ratio;
    }
    return ts;
}

RateFit fit_measurement_rate(const TimeSeries& snr_ts, double window, const std::string& column) {
    const auto y_all = snr_ts.real(column);
    require_finite(snr_ts.times, "fit_measurement_rate");
    require_finite(y_all, "fit_measurement_rate");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < snr_ts.size(); ++i) {
        if (window > 0.0 && snr_ts.times[i] > window) break;
        x.push_back(snr_ts.times[i]);
        y.push_back(y_all[i]);
    }
    if (x.size() < 5) throw std::invalid_argument("fit_measurement_rate: need at least 5 points");
    const LineFit lf = fit_line_through_origin(x, y);
    RateFit r;
    r.slope = lf.slope;
    r.slope_se = lf.slope_se;
    r.gamma = lf.slope / 4.0;
    r.gamma_se = lf.slope_se / 4.0;
    r.n_points = x.size();
    r.window = x.back();
    return r;
}

RateFit jackknife_measurement_rate(const RecordBatch& ground, const RecordBatch& excited,
                                   std::size_t groups, double window) {
    if (groups < 2) throw std::invalid_argument("jackknife_measurement_rate: need >= 2 groups");
    const std::size_t n = std::min(ground.n_shots(), excited.n_shots());
    if (n < 2 * groups) throw std::invalid_argument("jackknife_measurement_rate: too few shots");

    RateFit full = fit_measurement_rate(snr_vs_time(ground, excited), window);

    auto drop_group = [&](const RecordBatch& b, std::size_t gidx) {
        const std::size_t size = b.n_shots();
        const std::size_t lo = gidx * size / groups, hi = (gidx + 1) * size / groups;
        RecordBatch out;
        out.dt = b.dt;
        out.seed = b.seed;
        out.voltage.resize(static_cast<Eigen::Index>(size - (hi - lo)), b.voltage.cols());
        out.voltage.topRows(static_cast<Eigen::Index>(lo)) = b.voltage.topRows(static_cast<Eigen::Index>(lo));
        out.voltage.bottomRows(static_cast<Eigen::Index>(size - hi)) =
            b.voltage.bottomRows(static_cast<Eigen::Index>(size - hi));
        out.labels.assign(size - (hi - lo), b.labels.empty() ? QubitState::Ground : b.labels.front());
        return out;
    };

    std::vector<double> slopes(groups);
    for (std::size_t gi = 0; gi < groups; ++gi)
        slopes[gi] = fit_measurement_rate(snr_vs_time(drop_group(ground, gi), drop_group(excited, gi)), window).slope;
    const double avg = mean(slopes);
    double ss = 0.0;
    for (double s : slopes) ss += (s - avg) * (s - avg);
    const double g = static_cast<double>(groups);
    full.slope_se = std::sqrt((g - 1.0) / g * ss);
    full.gamma_se = full.slope_se / 4.0;
    return full;
}

RateFit fit_ramsey(const TimeSeries& ts, const std::string& column, double t_min) {
    const auto y = ts.real(column);
    require_finite(y, "fit_ramsey");
    if (y.empty() || !(y.front() > 0.0)) throw std::invalid_argument("fit_ramsey: initial amplitude must be positive");
    std::vector<double> x, ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts.times[i] < t_min) continue;
        const double v = y[i] / y.front();
        if (!(v > 0.0)) break;  // decayed into the noise floor
        x.push_back(ts.times[i]);
        ly.push_back(std::log(v));
    }
    if (x.size() < 3) throw std::invalid_argument("fit_ramsey: need at least 3 positive points");
    const LineFit lf = fit_line(x, ly);
    const double span = x.back() - x.front();
    // A decay that changes the amplitude by less than 1e-9 over the window is flat.
    if (!(-lf.slope * span > 1e-9)) throw NumericalError("fit_ramsey: input does not decay");
    RateFit r;
    r.slope = lf.slope;
    r.slope_se = lf.slope_se;
    r.intercept = lf.intercept;
    r.gamma = -lf.slope;
    r.gamma_se = lf.slope_se;
    r.n_points = x.size();
    r.window = span;
    return r;
}

namespace {

Sweep make_sweep(const std::vector<double>& phis, const std::vector<double>& gains_db,
                 const RateModel& rm, double (*rate)(double, const SqueezeSpec&, const RateModel&)) {
    Sweep s;
    s.reserve(phis.size() * gains_db.size());
    for (double gdb : gains_db)
        for (double phi : phis) {
            const SqueezeSpec sq = gain_to_squeeze(gdb, phi);
            s.push_back({phi, gdb, rate(phi, sq, rm)});
        }
    return s;
}

double phase_span(const Sweep& s) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& pt : s) {
        lo = std::min(lo, pt.phi);
        hi = std::max(hi, pt.phi);
    }
    return hi - lo;
}

}  // namespace

Sweep dephase_sweep(const std::vector<double>& phis, const std::vector<double>& gains_db,
                    const RateModel& rm) {
    return make_sweep(phis, gains_db, rm, &dephasing_rate);
}

Sweep meas_sweep(const std::vector<double>& phis, const std::vector<double>& gains_db,
                 const RateModel& rm) {
    return make_sweep(phis, gains_db, rm, &measurement_rate);
}

Sweep with_noise(Sweep s, double noise_frac, std::uint64_t seed) {
    auto rng = stream_for(seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& pt : s) pt.value *= 1.0 + noise_frac * gauss(rng);
    return s;
}

FitResult joint_fit(const Sweep& dephase, const Sweep& meas, const RateModel& rm_fixed,
                    const JointFitOptions& opt) {
    if (dephase.empty() || meas.empty()) throw std::invalid_argument("joint_fit: empty sweep");
    // Both rates are pi-periodic in Phi, so half a period is the least that pins the phases.
    if (phase_span(dephase) < kPi / 2 - 1e-12 || phase_span(meas) < kPi / 2 - 1e-12)
        throw std::invalid_argument("joint_fit: each sweep must span at least pi/2 in phase");
    for (const auto* s : {&dephase, &meas})
        for (const auto& pt : *s)
            if (!(pt.value > 0.0) || !std::isfinite(pt.value))
                throw std::invalid_argument("joint_fit: rates must be positive and finite");

    std::vector<SqueezeSpec> sq_d, sq_m;
    for (const auto& pt : dephase) sq_d.push_back(gain_to_squeeze(pt.gain_db, pt.phi));
    for (const auto& pt : meas) sq_m.push_back(gain_to_squeeze(pt.gain_db, pt.phi));

    auto residuals = [&](const Eigen::VectorXd& x) {
        RateModel rm = rm_fixed;
        rm.eff.eps_in = x[0];
        rm.eff.delta_align = x[1];
        rm.eff.global_phase = x[2];
        Eigen::VectorXd r(static_cast<Eigen::Index>(dephase.size() + meas.size()));
        Eigen::Index k = 0;
        for (std::size_t i = 0; i < dephase.size(); ++i)
            r[k++] = dephasing_rate(dephase[i].phi, sq_d[i], rm) / dephase[i].value - 1.0;
        for (std::size_t i = 0; i < meas.size(); ++i)
            r[k++] = measurement_rate(meas[i].phi, sq_m[i], rm) / meas[i].value - 1.0;
        return r;
    };

    LevMarOptions lm = opt.lm;
    if (lm.lower.size() == 0) {
        lm.lower = Eigen::Vector3d(0.0, -kPi, -kPi);
        lm.upper = Eigen::Vector3d(1.0, kPi, kPi);
    }
    const std::vector<std::string> names{"eps_in", "delta", "phi0"};

    FitResult best;
    best.residual_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < opt.phase_starts; ++i)
        for (int j = 0; j < opt.delta_starts; ++j) {
            const double phi0 = -kPi / 2 + kPi * (i + 0.5) / opt.phase_starts;
            const double delta = -kPi / 2 + kPi * (j + 0.5) / opt.delta_starts;
            FitResult f = levenberg_marquardt(residuals, Eigen::Vector3d(0.5, delta, phi0), names, lm);
            if (f.residual_norm < best.residual_norm) best = std::move(f);
        }
    best.values[1] = wrap_half(best.values[1]);
    best.values[2] = wrap_half(best.values[2]);
    return best;
}

double freedman_diaconis_width(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("freedman_diaconis_width: need >= 2 values");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    return 2.0 * iqr * std::pow(static_cast<double>(values.size()), -1.0 / 3.0);
}

Histogram histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
    if (!(hi > lo) || bins == 0) throw std::invalid_argument("histogram: need hi > lo and bins >= 1");
    require_finite(values, "histogram");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0.0);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (double v : values) {
        if (v < lo || v > hi) continue;
        const auto idx = std::min(bins - 1, static_cast<std::size_t>((v - lo) / w));
        h.counts[idx] += 1.0;
        h.total += 1.0;
    }
    return h;
}

Histogram histogram_fd(const std::vector<double>& values, double lo, double hi) {
    const double w = freedman_diaconis_width(values);
    const std::size_t bins = w > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / w))) : 1;
    return histogram(values, lo, hi, bins);
}

Histogram histogram_fd(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("histogram_fd: no values");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    return histogram_fd(values, lo, hi);
}

double gaussian_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

namespace {

struct HistMoments {
    double mean = 0.0;
    double sd = 0.0;
};

HistMoments moments(const Histogram& h) {
    HistMoments m;
    if (!(h.total > 0.0)) throw std::invalid_argument("histogram fit: empty histogram");
    for (std::size_t i = 0; i < h.bins(); ++i) m.mean += h.counts[i] * h.center(i);
    m.mean /= h.total;
    double var = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) var += h.counts[i] * std::pow(h.center(i) - m.mean, 2);
    m.sd = std::sqrt(var / h.total);
    if (!(m.sd > 0.0)) m.sd = h.width(0);
    return m;
}

// Pearson-weighted residuals of bin counts against a bin-integrated model.
Eigen::VectorXd count_residuals(const Histogram& h, const std::function<double(double, double)>& mass) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(h.bins()));
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double expected = h.total * mass(h.edges[i], h.edges[i + 1]);
        r[static_cast<Eigen::Index>(i)] = (expected - h.counts[i]) / std::sqrt(std::max(h.counts[i], 1.0));
    }
    return r;
}

}  // namespace

FitResult fit_gaussian(const Histogram& h) {
    const HistMoments m = moments(h);
    const double range = h.edges.back() - h.edges.front();
    auto residuals = [&](const Eigen::VectorXd& x) {
        return count_residuals(h, [&](double a, double b) {
            return normal_cdf(b, x[0], x[1]) - normal_cdf(a, x[0], x[1]);
        });
    };
    LevMarOptions lm;
    lm.lower = Eigen::Vector2d(h.edges.front() - range, 1e-9 * range);
    lm.upper = Eigen::Vector2d(h.edges.back() + range, 10.0 * range);
    return levenberg_marquardt(residuals, Eigen::Vector2d(m.mean, m.sd), {"mu", "sigma"}, lm);
}

FitResult fit_double_gaussian(const Histogram& h, double mu2_guess) {
    const FitResult single = fit_gaussian(h);
    const double range = h.edges.back() - h.edges.front();
    auto residuals = [&](const Eigen::VectorXd& x) {
        return count_residuals(h, [&](double a, double b) {
            return (1.0 - x[3]) * (normal_cdf(b, x[0], x[1]) - normal_cdf(a, x[0], x[1])) +
                   x[3] * (normal_cdf(b, x[2], x[1]) - normal_cdf(a, x[2], x[1]));
        });
    };
    LevMarOptions lm;
    lm.lower = Eigen::Vector4d(h.edges.front() - range, 1e-9 * range, h.edges.front() - range, 0.0);
    lm.upper = Eigen::Vector4d(h.edges.back() + range, 10.0 * range, h.edges.back() + range, 0.1);
    FitResult best;
    best.residual_norm = std::numeric_limits<double>::infinity();
    for (double w0 : {0.0, 0.02, 0.05}) {
        Eigen::Vector4d x0(single.values[0], single.values[1], mu2_guess, w0);
        FitResult f = levenberg_marquardt(residuals, x0, {"mu", "sigma", "mu2", "weight"}, lm);
        if (f.residual_norm < best.residual_norm) best = std::move(f);
    }
    return best;
}

double gaussian_overlap(double mu1, double s1, double mu2, double s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw std::invalid_argument("gaussian_overlap: widths must be positive");
    // Crossings solve log N1 = log N2, a quadratic in x (linear when s1 == s2).
    const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
    const double b = mu1 / (s1 * s1) - mu2 / (s2 * s2);
    const double c = 0.5 * mu2 * mu2 / (s2 * s2) - 0.5 * mu1 * mu1 / (s1 * s1) + std::log(s2 / s1);
    std::vector<double> cuts;
    if (std::abs(a) < 1e-14 * (1.0 / (s1 * s1))) {
        if (std::abs(b) > 0.0) cuts.push_back(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
            if (q != 0.0) cuts.push_back(q / a);
            if (q != 0.0) cuts.push_back(c / q);
            else cuts.push_back(-b / (2.0 * a));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> edges{-std::numeric_limits<double>::infinity()};
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(std::numeric_limits<double>::infinity());

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = edges[i], hi = edges[i + 1];
        double probe;
        if (std::isinf(lo) && std::isinf(hi)) probe = 0.5 * (mu1 + mu2);
        else if (std::isinf(lo)) probe = hi - std::max(s1, s2);
        else if (std::isinf(hi)) probe = lo + std::max(s1, s2);
        else probe = 0.5 * (lo + hi);
        auto log_pdf = [](double x, double mu, double s) {
            return -0.5 * std::pow((x - mu) / s, 2) - std::log(s);
        };
        const bool first_lower = log_pdf(probe, mu1, s1) <= log_pdf(probe, mu2, s2);
        const double mu = first_lower ? mu1 : mu2, s = first_lower ? s1 : s2;
        area += normal_cdf(hi, mu, s) - normal_cdf(lo, mu, s);
    }
    return area;
}

nlohmann::json fit_report(const FitResult& fit) {
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        params[fit.names[i]] = {{"value", fit.values[k]}, {"std_error", fit.std_errors[k]}};
    }
    return {{"parameters", params},
            {"residual_norm", fit.residual_norm},
            {"gradient_norm", fit.gradient_norm},
            {"iterations", fit.iterations},
            {"converged", fit.converged}};
}

}  // namespace strobo
