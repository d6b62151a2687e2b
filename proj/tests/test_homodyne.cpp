#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles/oracles.hpp"
#include "strobo/dynamics.hpp"
#include "strobo/homodyne.hpp"

using namespace strobo;
using namespace std::complex_literals;
using Catch::Approx;

namespace {

// Qbar_z = int_0^tau i sqrt(k) (conj(<d_out>) - <d_out>) dt by Gauss-Kronrod per Rabi period.
double integrated_q(double tau, const SystemParams& p, int sz) {
    auto f = [&](double t) {
        const Complex o = mean_output_field(t, p, sz);
        return (1i * std::sqrt(p.kappa) * (std::conj(o) - o)).real();
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double period = 2 * std::numbers::pi / p.omega_r;
    double acc = 0.0;
    for (double lo = 0.0; lo < tau; lo += period) acc += GK::integrate(f, lo, std::min(lo + period, tau), 8, 1e-13);
    return acc;
}

SystemParams scaled_beta(const SystemParams& p, double factor) {
    SystemParams q = p;
    q.chi *= factor;
    return q;
}

}  // namespace

TEST_CASE("mean output field", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    CHECK(bessel_cutoff(p.beta()) >= 5);
    CHECK(bessel_cutoff(0.0) == 5);

    SystemParams off = p;
    off.chi = 0.0;
    for (double t : {0.0, 0.3, 1.0}) CHECK(mean_output_field(t, off, 1) == Complex(0.0));

    SECTION("series agrees with direct quadrature of the Green's function") {
        for (int sz : {1, -1}) {
            for (double t : {1.0, 1.0123}) {
                const Complex series = mean_cavity_field(t, p, sz);
                const Complex quad = oracle::mean_cavity_field(t, p, sz);
                CHECK(std::abs(series - quad) < 1e-8 * std::abs(quad));
            }
        }
    }

    SECTION("magnitude is even in sigma_z") {
        for (double t : {0.1, 0.37, 1.9})
            CHECK(std::abs(mean_output_field(t, p, 1)) == Approx(std::abs(mean_output_field(t, p, -1))).epsilon(1e-12));
    }

    SECTION("steady displacement scales with a0 chi / kappa") {
        SystemParams q = p;
        q.a_bar0 *= 2;
        for (double t : {0.2, 0.9}) CHECK(std::abs(mean_cavity_field(t, q, 1)) == Approx(2 * std::abs(mean_cavity_field(t, p, 1))).epsilon(1e-12));
        // period average of <d> is about -2 i chi a0 sz / kappa
        Complex avg = 0.0;
        const int n = 400;
        const double period = 2 * std::numbers::pi / p.omega_r;
        for (int k = 0; k < n; ++k) avg += mean_cavity_field(period * k / n, p, 1);
        avg /= static_cast<double>(n);
        CHECK(std::abs(avg - Complex(0.0, -2 * p.chi * p.a_bar0 / p.kappa)) < 0.01 * 2 * p.chi * p.a_bar0 / p.kappa);
    }

    CHECK_THROWS_AS(mean_output_field(0.0, p, 0), std::invalid_argument);
}

TEST_CASE("Langevin mean trajectory", "[homodyne][oracle]") {
    const SystemParams p = SystemParams::experiment();
    const auto ts = langevin_mean_trajectory(p, 1, 0.0, 2.0, 201);
    const auto d = ts.column("d");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts.times[i];
        CHECK(std::abs(d[i] - cavity_field_from(t, p, 1)) < 1e-9);
        // the vacuum start relaxes as e^{-kappa t / 2}
        if (t > 30.0 / p.kappa) CHECK(std::abs(ts.column("d_out")[i] - mean_output_field(t, p, 1)) < 1e-6);
    }

    // from a displaced start the homogeneous part carries the transient
    const auto ts2 = langevin_mean_trajectory(p, -1, 0.0, 0.3, 31, Complex(0.2, -0.1));
    for (std::size_t i = 0; i < ts2.size(); ++i)
        CHECK(std::abs(ts2.column("d")[i] - cavity_field_from(ts2.times[i], p, -1, Complex(0.2, -0.1))) < 1e-9);

    // very fast cavity follows the drive adiabatically
    SystemParams fast = p;
    fast.kappa = 100 * p.omega_r;
    const double g = 0.5 * fast.kappa, w2 = 2 * fast.omega_r;
    const double scale = 2 * fast.chi * fast.a_bar0 / g;
    for (double t : {0.0131, 0.0207}) {
        // d = f/g - f'/g^2 + O((2 Omega / g)^2)
        const Complex f = -1i * fast.chi * fast.a_bar0 * (1.0 + std::cos(w2 * t));
        const Complex df = 1i * fast.chi * fast.a_bar0 * w2 * std::sin(w2 * t);
        const Complex follow = f / g - df / (g * g);
        CHECK(std::abs(mean_cavity_field(t, fast, 1) - follow) < 0.01 * scale);
        CHECK(std::abs(mean_cavity_field(t, fast, 1) - f / g) > 0.002 * scale);  // the lag is resolved
    }
}

TEST_CASE("three-way mean-field agreement with the Lindblad evolution", "[homodyne][oracle]") {
    const SystemParams p = SystemParams::experiment();
    const HilbertSpec s = HilbertSpec::qubit_cavity(6);
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    cfg.n_samples = 201;
    cfg.observables = {{"d", embed(annihilation(6), 1, s)}};
    // the sigma_z parts of A and B supply the cos(W t) and cos(2 W t) terms of the Langevin drift
    const auto res = evolve(DensityMatrix::basis({0, 0}, s), h_rabi_frame(p, s, RabiFrameTerms::Longitudinal),
                            {std::sqrt(p.kappa) * embed(annihilation(6), 1, s)}, cfg);
    const auto lang = langevin_mean_trajectory(p, 1, 0.0, 1.0, 201);
    for (std::size_t i = 0; i < res.series.size(); ++i) {
        const double t = res.series.times[i];
        const Complex me = res.series.column("d")[i];
        // same vacuum start: agreement throughout
        CHECK(std::abs(me - lang.column("d")[i]) < 1e-4);
        // the closed form is the periodic orbit, reached once e^{-kappa t / 2} is negligible
        if (t > 25.0 / p.kappa) CHECK(std::abs(me - mean_cavity_field(t, p, 1)) < 1e-4);
    }
}

TEST_CASE("integrated signal", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    CHECK(integrated_signal_sq(1e-9, p) < 1e-12);
    CHECK_THROWS_AS(integrated_signal_sq(0.0, p), std::domain_error);
    const double tl = 200.0 / p.kappa;
    CHECK(integrated_signal_sq(2 * tl, p) / integrated_signal_sq(tl, p) == Approx(4.0).epsilon(0.01));

    for (double tau : {0.4, 1.8}) {
        const double brute = std::pow(integrated_q(tau, p, 1) - integrated_q(tau, p, -1), 2);
        CHECK(integrated_signal_sq(tau, p) == Approx(brute).epsilon(0.005));
    }
}

TEST_CASE("integrated noise", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    for (double tau : {0.1, 1.0, 5.0}) {
        CHECK(integrated_noise_sq(tau, p, SqueezeSpec::off()) == Approx(2 * p.kappa * tau).epsilon(1e-12));
        const auto sq = SqueezeSpec::from_r(0.7, std::numbers::pi / 4);
        CHECK(integrated_noise_sq(tau, p, sq) == Approx(2 * std::cosh(1.4) * p.kappa * tau).epsilon(1e-12));
    }

    SECTION("matches the exact Gaussian-kernel integral") {
        for (double r : {0.3, 1.0}) {
            for (double phi : {0.0, 0.6}) {
                const double tau = 30.0 / p.kappa;
                const double exact = oracle::exact_noise(tau, p, r, phi, 1) + oracle::exact_noise(tau, p, r, phi, -1);
                CHECK(integrated_noise_sq(tau, p, SqueezeSpec::from_r(r, phi)) == Approx(exact).epsilon(1e-3));
            }
        }
    }
}

TEST_CASE("SNR and its long-time ratio", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    const auto off = SqueezeSpec::off();

    double prev = 0.0;
    for (double tau = 0.05; tau < 5.0; tau += 0.05) {
        const auto s = snr(tau, p, off);
        CHECK(s.snr == Approx(s.signal_sq / s.noise_sq));
        CHECK(s.snr > prev);
        prev = s.snr;
    }
    const double tl = 200.0 / p.kappa;
    CHECK(snr(2 * tl, p, off).snr / snr(tl, p, off).snr == Approx(2.0).epsilon(0.01));

    CHECK(snr_ratio_longtime(0.0, p) == 1.0);
    CHECK(snr_ratio_longtime(8.0, p) < 1e-3);
    CHECK_THROWS_AS(snr_ratio_longtime(-0.1, p), std::domain_error);

    SECTION("the full expressions approach the long-time ratio") {
        const OptimalSqueezing opt = optimal_squeezing(p);
        // corrections fall off as 1/(kappa tau)
        for (auto [kt, tol] : {std::pair{200.0, 0.01}, {1000.0, 2e-3}, {10000.0, 2e-4}}) {
            const double tau = kt / p.kappa;
            for (double r = 0.0; r <= opt.r + 0.5; r += 0.25) {
                const double full = snr(tau, p, SqueezeSpec::from_r(r, 0.0)).snr / snr(tau, p, off).snr;
                CHECK(full == Approx(snr_ratio_longtime(r, p)).epsilon(tol));
            }
        }
    }
}

TEST_CASE("optimal squeezing", "[homodyne][oracle]") {
    const SystemParams p = SystemParams::experiment();
    const OptimalSqueezing o = optimal_squeezing(p);
    CHECK(o.gain_db == Approx(15.9).margin(0.1));
    CHECK(o.peak_ratio == Approx(19.4).epsilon(0.02));
    const double numeric = oracle::brent_argmax([&](double r) { return snr_ratio_longtime(r, p); }, 0.0, 5.0);
    CHECK(std::abs(numeric - o.r) < 1e-6);

    // smaller beta pushes the optimum out and the improvement up roughly as 1/beta
    const OptimalSqueezing small = optimal_squeezing(scaled_beta(p, 0.5));
    CHECK(small.r > o.r);
    CHECK(small.peak_ratio / o.peak_ratio == Approx(2.0).epsilon(0.05));

    SystemParams bad = p;
    bad.chi = p.omega_r;  // beta = 1 leaves no interior optimum
    CHECK_THROWS_AS(optimal_squeezing(bad), std::domain_error);
}

TEST_CASE("dephasing, measurement rate and efficiency models", "[homodyne]") {
    const RateModel rm = RateModel::experiment();
    const auto off = SqueezeSpec::off();
    const double pi = std::numbers::pi;
    CHECK(dephasing_rate(0.3, off, rm) == 0.54);
    CHECK(measurement_rate(0.3, off, rm) == 0.41);
    CHECK(efficiency(0.3, off, rm) == Approx(0.38));

    const auto g38 = gain_to_squeeze(3.8, 0.0);
    CHECK(rm.gamma_phi_vac / dephasing_rate(pi / 2, g38, rm) == Approx(1.8).epsilon(0.1));
    CHECK(dephasing_rate(0.0, g38, rm) / rm.gamma_phi_vac == Approx(3.9).epsilon(0.1));

    const auto g4 = gain_to_squeeze(4.0, 0.0);
    CHECK(measurement_rate(0.0, g4, rm) / rm.gamma_meas_vac == Approx(1.19).margin(0.01));

    const auto g1 = gain_to_squeeze(1.0, 0.0);
    CHECK(efficiency(pi / 2, g1, rm) == Approx(0.416).margin(0.002));
    CHECK(efficiency(pi / 2, g1, rm) == Approx(0.42).margin(0.02));

    SECTION("periodicity and extremal phases") {
        RateModel shifted = rm;
        shifted.eff.delta_align = 0.2;
        for (double phi : {0.0, 0.4, 1.1}) {
            CHECK(dephasing_rate(phi + pi, g38, rm) == Approx(dephasing_rate(phi, g38, rm)).epsilon(1e-12));
            CHECK(measurement_rate(phi + pi, g38, shifted) == Approx(measurement_rate(phi, g38, shifted)).epsilon(1e-12));
        }
        double best_phi = 0.0, best_meas = 0.0, best_deph = 0.0, deph_phi = 0.0;
        for (int i = 0; i < 3600; ++i) {
            const double phi = pi * i / 3600;
            if (measurement_rate(phi, g38, shifted) > best_meas) best_meas = measurement_rate(phi, g38, shifted), best_phi = phi;
            if (dephasing_rate(phi, g38, rm) > best_deph) best_deph = dephasing_rate(phi, g38, rm), deph_phi = phi;
        }
        CHECK(deph_phi == Approx(0.0).margin(1e-3));
        // both rates peak where cos 2(Phi + offsets) = 1
        CHECK(std::remainder(best_phi + 0.2, pi) == Approx(0.0).margin(1e-3));
    }

    SECTION("efficiency recovery needs a lossy but finite input path") {
        for (double eps_in : {0.0, 0.1, 0.48, 0.9}) {
            RateModel m = rm;
            m.eff.eps_in = eps_in;
            double best = 0.0;
            for (double g = 0.05; g <= 2.0; g += 0.05) best = std::max(best, efficiency(pi / 2, gain_to_squeeze(g, 0.0), m));
            if (eps_in == 0.0) CHECK(best == Approx(m.eff.eps_out).epsilon(1e-12));
            else CHECK(best > m.eff.eps_out);
        }
        // interior maximum in gain at Phi = pi/2
        double peak = 0.0, at = 0.0;
        for (double g = 0.0; g <= 10.0; g += 0.01) {
            const double e = efficiency(pi / 2, gain_to_squeeze(g, 0.0), rm);
            if (e > peak) peak = e, at = g;
        }
        CHECK(at > 0.0);
        CHECK(at < 10.0);
        CHECK(efficiency(pi / 2, gain_to_squeeze(10.0, 0.0), rm) < peak);
    }

    // lossless input at the squeezed phase: 1 + 2(N - M) = e^{-2r}, positive at any gain
    RateModel lossless = rm;
    lossless.eff.eps_in = 1.0;
    const auto g30 = gain_to_squeeze(30.0, 0.0);
    CHECK(dephasing_rate(pi / 2, g30, lossless) == Approx(rm.gamma_phi_vac * std::exp(-2 * g30.r)).epsilon(1e-6));
}

TEST_CASE("thermal photon bound", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    const double n = thermal_photon_bound(64.0, p.chi, p.kappa);
    CHECK(n == Approx(0.00727).margin(2e-4));
    CHECK(n <= 0.01);
    CHECK(thermal_dephasing_rate(n, p.chi, p.kappa) == Approx(1.0 / 64.0).epsilon(1e-10));
    CHECK(thermal_photon_bound(std::numeric_limits<double>::infinity(), p.chi, p.kappa) == 0.0);
    CHECK(thermal_photon_bound(1e9, p.chi, p.kappa) < 1e-8);
    CHECK(thermal_dephasing_rate(0.0, p.chi, p.kappa) == Approx(0.0).margin(1e-14));
    CHECK_THROWS_AS(thermal_photon_bound(0.0, p.chi, p.kappa), std::domain_error);
}

TEST_CASE("vacuum dephasing rate from drive parameters", "[homodyne]") {
    const SystemParams p = SystemParams::experiment();
    CHECK(gamma_phi_vac_from_params(0.0, p.chi, p.kappa) == 0.0);
    CHECK(gamma_phi_vac_from_params(0.35, p.chi, p.kappa) == Approx(0.139).margin(0.001));
    CHECK(a_bar0_for_gamma_phi(0.54, p.chi, p.kappa) == Approx(0.69).margin(0.005));
    CHECK(gamma_phi_vac_from_params(a_bar0_for_gamma_phi(0.54, p.chi, p.kappa), p.chi, p.kappa) == Approx(0.54));
}

TEST_CASE("readout fidelity", "[homodyne]") {
    CHECK(readout_fidelity(0.0) == 0.0);
    const double s = snr_for_fidelity(0.999);
    CHECK(readout_fidelity(s) == Approx(0.999).epsilon(1e-10));
    const SystemParams p = SystemParams::experiment();
    const auto sq = gain_to_squeeze(10.0, 0.0);
    const double t = fidelity_time(p, sq);
    CHECK(snr(t, p, sq).snr == Approx(s).epsilon(1e-8));
    CHECK(snr(0.99 * t, p, sq).snr < s);
    CHECK(fidelity_time(p, SqueezeSpec::off()) > fidelity_time(p, gain_to_squeeze(6.0, 0.0)));
}
