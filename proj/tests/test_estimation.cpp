#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "strobo/errors.hpp"
#include "strobo/estimation.hpp"
#include "strobo/numeric.hpp"

using namespace strobo;
using Catch::Approx;

namespace {

RecordOptions no_relax(unsigned threads = 1) {
    RecordOptions o;
    o.p_relax = 0.0;
    o.threads = threads;
    return o;
}

std::vector<double> normal_sample(std::size_t n, double mu, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mu, sigma);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double overlap_by_quadrature(double m1, double s1, double m2, double s2) {
    auto f = [&](double x) { return std::min(gaussian_pdf(x, m1, s1), gaussian_pdf(x, m2, s2)); };
    const double lo = std::min(m1 - 12 * s1, m2 - 12 * s2), hi = std::max(m1 + 12 * s1, m2 + 12 * s2);
    // split at a fine grid so the kinks of min() fall near panel edges
    double acc = 0.0;
    const int panels = 400;
    for (int i = 0; i < panels; ++i) {
        const double a = lo + (hi - lo) * i / panels, b = lo + (hi - lo) * (i + 1) / panels;
        acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-14);
    }
    return acc;
}

}  // namespace

TEST_CASE("record synthesis is deterministic and thread independent", "[estimation]") {
    const SystemParams p = SystemParams::experiment();
    const RateModel rm = RateModel::experiment();
    const auto sq = SqueezeSpec::off();
    const auto a = synth_records(p, sq, rm, QubitState::Excited, 300, 1.0, 42, no_relax(1));
    const auto b = synth_records(p, sq, rm, QubitState::Excited, 300, 1.0, 42, no_relax(4));
    const auto c = synth_records(p, sq, rm, QubitState::Excited, 300, 1.0, 43, no_relax(1));
    CHECK(a.voltage == b.voltage);
    CHECK(a.voltage != c.voltage);
    CHECK(a.n_samples() == 20);
    CHECK(a.times().back() == Approx(1.0));
    CHECK(a.dt == Approx(0.05));
}

TEST_CASE("record statistics follow the model", "[estimation]") {
    const SystemParams p = SystemParams::experiment();
    const RateModel rm = RateModel::experiment();
    const double v = p.a_bar0 * p.chi / p.kappa;
    for (double phi : {0.0, std::numbers::pi / 2}) {
        const auto sq = gain_to_squeeze(3.8, phi);
        const auto e = synth_records(p, sq, rm, QubitState::Excited, 20000, 1.0, 5, no_relax());
        const auto g = synth_records(p, sq, rm, QubitState::Ground, 20000, 1.0, 6, no_relax());
        const std::size_t last = e.n_samples() - 1;
        std::vector<double> ve(e.n_shots()), vg(g.n_shots());
        for (std::size_t i = 0; i < e.n_shots(); ++i) ve[i] = e.voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(last));
        for (std::size_t i = 0; i < g.n_shots(); ++i) vg[i] = g.voltage(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(last));
        const double s = record_signal_rate(rm), f = record_noise_factor(phi, sq, rm);
        // 20000 shots: 4 standard errors of the mean and of the sd
        CHECK(std::abs(mean(ve) - s * v) < 4 * v * std::sqrt(f / 20000));
        CHECK(std::abs(mean(vg) + s * v) < 4 * v * std::sqrt(f / 20000));
        CHECK(stddev(ve) == Approx(v * std::sqrt(f)).epsilon(0.02));
    }
    // the Phi = 0 records are the narrow ones
    const auto sq0 = gain_to_squeeze(3.8, 0.0);
    CHECK(record_noise_factor(0.0, sq0, rm) < 1.0);
    CHECK(record_noise_factor(std::numbers::pi / 2, sq0, rm) > 1.0);
    CHECK(record_noise_factor(0.3, SqueezeSpec::off(), rm) == 1.0);
}

TEST_CASE("Monte Carlo SNR reproduces the linear law", "[estimation]") {
    const SystemParams p = SystemParams::experiment();
    const RateModel rm = RateModel::experiment();
    const auto off = SqueezeSpec::off();
    const auto g = synth_records(p, off, rm, QubitState::Ground, 20000, 2.0, 11, no_relax());
    const auto e = synth_records(p, off, rm, QubitState::Excited, 20000, 2.0, 12, no_relax());
    const auto fit = fit_measurement_rate(snr_vs_time(g, e));
    CHECK(fit.slope == Approx(8 * rm.gamma_phi_vac * rm.eff.eps_out).epsilon(0.03));
    CHECK(fit.gamma == Approx(fit.slope / 4));

    // squeezing at Phi = 0 raises the slope by 1/F
    const auto sq = gain_to_squeeze(3.8, 0.0);
    const auto gs = synth_records(p, sq, rm, QubitState::Ground, 20000, 2.0, 13, no_relax());
    const auto es = synth_records(p, sq, rm, QubitState::Excited, 20000, 2.0, 14, no_relax());
    const auto fs = fit_measurement_rate(snr_vs_time(gs, es));
    CHECK(fs.gamma == Approx(measurement_rate(0.0, sq, rm)).epsilon(0.03));
}

TEST_CASE("measurement-rate line fit", "[estimation]") {
    TimeSeries ts;
    ts.add_column("snr");
    for (int i = 1; i <= 20; ++i) {
        ts.times.push_back(0.1 * i);
        ts.columns[0].push_back(4 * 0.51 * 0.1 * i);
    }
    const auto f = fit_measurement_rate(ts);
    CHECK(f.gamma == Approx(0.51).epsilon(1e-12));
    CHECK(f.slope == Approx(2.04).epsilon(1e-12));
    CHECK(f.n_points == 20);
    const auto w = fit_measurement_rate(ts, 1.0);
    CHECK(w.n_points == 10);
    CHECK_THROWS_AS(fit_measurement_rate(ts, 0.45), std::invalid_argument);
}

TEST_CASE("jackknife errors have nominal coverage", "[estimation]") {
    const SystemParams p = SystemParams::experiment();
    const RateModel rm = RateModel::experiment();
    const auto off = SqueezeSpec::off();
    RecordOptions o = no_relax();
    o.sample_rate = 10.0;
    const double truth = 2 * rm.gamma_phi_vac * rm.eff.eps_out;  // slope / 4
    int covered = 0;
    const int trials = 100;
    for (int s = 0; s < trials; ++s) {
        const auto g = synth_records(p, off, rm, QubitState::Ground, 2000, 1.0, 1000 + 2 * s, o);
        const auto e = synth_records(p, off, rm, QubitState::Excited, 2000, 1.0, 1001 + 2 * s, o);
        const auto f = jackknife_measurement_rate(g, e, 20);
        if (std::abs(f.gamma - truth) < f.gamma_se) ++covered;
    }
    // one sigma covers 68%; the binomial spread over 100 trials is about 5
    CHECK(covered >= 58);
    CHECK(covered <= 78);
}

TEST_CASE("Ramsey fit", "[estimation]") {
    TimeSeries ts;
    ts.add_column("sigma_x");
    for (int i = 0; i <= 50; ++i) {
        ts.times.push_back(0.04 * i);
        ts.columns[0].push_back(0.9 * std::exp(-0.04 * i / 1.7));
    }
    const auto f = fit_ramsey(ts);
    CHECK(f.gamma == Approx(1 / 1.7).epsilon(1e-10));

    TimeSeries flat = ts;
    for (auto& v : flat.columns[0]) v = 0.9;
    CHECK_THROWS_AS(fit_ramsey(flat), NumericalError);
    TimeSeries neg = ts;
    neg.columns[0][0] = 0.0;
    CHECK_THROWS_AS(fit_ramsey(neg), std::invalid_argument);
}

TEST_CASE("joint fit of the two sweeps", "[estimation]") {
    RateModel truth = RateModel::experiment();
    truth.eff.eps_in = 0.48;
    truth.eff.delta_align = 14.0 * std::numbers::pi / 180;
    truth.eff.global_phase = -0.1;
    std::vector<double> phis;
    for (int i = 0; i < 19; ++i) phis.push_back(std::numbers::pi * i / 18);
    const std::vector<double> gains{1.0, 2.0, 3.8};
    const Sweep d = dephase_sweep(phis, gains, truth);
    const Sweep m = meas_sweep(phis, gains, truth);
    REQUIRE(d.size() == phis.size() * gains.size());
    CHECK(d[5].value == Approx(dephasing_rate(d[5].phi, gain_to_squeeze(d[5].gain_db, d[5].phi), truth)));

    RateModel start = truth;
    start.eff.eps_in = 0.2;
    start.eff.delta_align = 0.0;
    start.eff.global_phase = 0.0;
    const FitResult f = joint_fit(d, m, start);
    CHECK(f.converged);
    CHECK(f.value("eps_in") == Approx(0.48).margin(1e-6));
    CHECK(f.value("delta") == Approx(truth.eff.delta_align).margin(1e-6));
    CHECK(f.value("phi0") == Approx(-0.1).margin(1e-6));

    const Sweep noisy = with_noise(d, 0.03, 7);
    CHECK(noisy.size() == d.size());
    CHECK(with_noise(d, 0.03, 7)[3].value == noisy[3].value);
    const FitResult fn = joint_fit(noisy, with_noise(m, 0.03, 8), start);
    CHECK(fn.value("eps_in") == Approx(0.48).margin(0.05));
    CHECK(fn.error("eps_in") > 0.0);

    // a narrow phase span cannot separate delta from phi0
    const Sweep narrow = dephase_sweep({0.0, 0.2, 0.4}, gains, truth);
    CHECK_THROWS_AS(joint_fit(narrow, meas_sweep({0.0, 0.2, 0.4}, gains, truth), start), std::invalid_argument);
}

TEST_CASE("histograms", "[estimation]") {
    const auto v = normal_sample(5000, 1.0, 0.5, 3);
    const Histogram h = histogram(v, -1.0, 3.0, 40);
    CHECK(h.bins() == 40);
    double sum = 0.0, integral = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) sum += h.counts[i], integral += h.density(i) * h.width(i);
    CHECK(sum <= 5000);
    CHECK(integral == Approx(sum / h.total));

    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = sorted[3749] - sorted[1249];
    CHECK(freedman_diaconis_width(v) == Approx(2 * iqr / std::cbrt(5000.0)).epsilon(0.01));
    const Histogram fd = histogram_fd(v);
    CHECK(fd.total == 5000);
    CHECK_THROWS_AS(histogram(v, 1.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("Gaussian and double-Gaussian fits", "[estimation]") {
    const auto v = normal_sample(40000, 0.3, 0.8, 21);
    const auto g = fit_gaussian(histogram_fd(v));
    CHECK(g.value("mu") == Approx(0.3).margin(0.02));
    CHECK(g.value("sigma") == Approx(0.8).epsilon(0.02));

    // 5% of the shots sit in the other peak
    auto mixed = normal_sample(38000, 1.0, 0.4, 22);
    const auto other = normal_sample(2000, -1.0, 0.4, 23);
    mixed.insert(mixed.end(), other.begin(), other.end());
    const auto d = fit_double_gaussian(histogram_fd(mixed), -1.0);
    CHECK(d.value("weight") == Approx(0.05).margin(0.01));
    CHECK(d.value("mu") == Approx(1.0).margin(0.02));
    CHECK(d.value("mu2") == Approx(-1.0).margin(0.05));
    CHECK(d.value("sigma") == Approx(0.4).epsilon(0.03));

    // without contamination the mixture collapses onto the single Gaussian
    const auto clean = normal_sample(40000, 1.0, 0.4, 24);
    const Histogram hc = histogram_fd(clean);
    const auto single = fit_gaussian(hc);
    const auto dbl = fit_double_gaussian(hc, -1.0);
    CHECK(dbl.value("weight") < 0.003);
    CHECK(dbl.value("mu") == Approx(single.value("mu")).margin(0.01));
    CHECK(dbl.value("sigma") == Approx(single.value("sigma")).epsilon(0.01));
}

TEST_CASE("Gaussian overlap", "[estimation][oracle]") {
    CHECK(gaussian_overlap(0.0, 1.0, 0.0, 1.0) == Approx(1.0).epsilon(1e-12));
    CHECK(gaussian_overlap(-10.0, 1.0, 10.0, 1.0) < 1e-20);
    // equal widths: 2 Phi(-|d| / 2 sigma) = erfc(|d| / (2 sqrt 2 sigma))
    CHECK(gaussian_overlap(0.0, 0.7, 1.3, 0.7) == Approx(std::erfc(1.3 / (2 * std::sqrt(2.0) * 0.7))).epsilon(1e-12));
    for (auto [m1, s1, m2, s2] : {std::array<double, 4>{0.0, 1.0, 1.5, 0.5}, {0.2, 0.3, -0.4, 0.9}, {0.0, 1.0, 0.1, 1.01}})
        CHECK(gaussian_overlap(m1, s1, m2, s2) == Approx(overlap_by_quadrature(m1, s1, m2, s2)).epsilon(1e-8));
    // narrower histograms at fixed separation overlap less
    double prev = 1.0;
    for (double s : {1.0, 0.8, 0.6, 0.4}) {
        const double o = gaussian_overlap(-1.0, s, 1.0, s);
        CHECK(o < prev);
        prev = o;
    }
}

TEST_CASE("record CSV round trip", "[estimation]") {
    const SystemParams p = SystemParams::experiment();
    const auto b = synth_records(p, SqueezeSpec::off(), RateModel::experiment(), QubitState::Excited, 50, 0.5, 9);
    std::stringstream ss;
    b.write_csv(ss);
    const auto r = RecordBatch::read_csv(ss);
    CHECK(r.voltage == b.voltage);
    CHECK(r.labels == b.labels);
    CHECK(r.seed == 9);
    CHECK(r.dt == b.dt);

    std::stringstream bad("shot,label,v1\n0,g,1\n");
    CHECK_THROWS_AS(RecordBatch::read_csv(bad), std::invalid_argument);
}

TEST_CASE("fit report", "[estimation]") {
    const auto g = fit_gaussian(histogram_fd(normal_sample(2000, 0.0, 1.0, 1)));
    const auto j = fit_report(g);
    CHECK(j.at("parameters").contains("mu"));
    CHECK(j.at("parameters").at("sigma").contains("std_error"));
    CHECK(j.at("converged").get<bool>() == g.converged);
    CHECK(j.at("iterations").get<int>() == g.iterations);
}
