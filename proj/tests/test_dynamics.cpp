#include <catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "oracles/oracles.hpp"
#include "strobo/dynamics.hpp"
#include "strobo/errors.hpp"

using namespace strobo;
using namespace std::complex_literals;
using Catch::Approx;

namespace {

struct Quadratures {
    double x2, y2, n;
};

// Cavity alone under the broadband squeezed reservoir, evolved to steady state.
Quadratures squeezed_cavity_steady(double ns, double phi, std::size_t dim) {
    const HilbertSpec s = HilbertSpec::mode(dim, "cavity");
    const double kappa = 1.0;
    const Operator d = annihilation(dim);
    const Operator x = 0.5 * (d + d.adjoint()), y = -0.5i * (d - d.adjoint());
    SteadyStateConfig cfg;
    cfg.observables = {{"x2", x * x}, {"y2", y * y}, {"n", d.adjoint() * d}};
    cfg.chunk = 1.0 / kappa;
    cfg.t_max = 200.0 / kappa;
    const auto st = evolve_to_steady(DensityMatrix::basis({0}, s), TimeDependentHamiltonian(s),
                                     broadband_squeezed_dissipators(ns, phi, kappa, s), cfg);
    REQUIRE(st.converged);
    return {st.values[0].real(), st.values[1].real(), st.values[2].real()};
}

}  // namespace

TEST_CASE("plain photon loss decays exponentially", "[dynamics]") {
    const HilbertSpec s = HilbertSpec::mode(4, "cavity");
    const double kappa = 2.3;
    EvolutionConfig cfg;
    cfg.t_end = 2.0;
    cfg.n_samples = 41;
    cfg.observables = {{"n", number_op(4)}};
    const auto res = evolve(DensityMatrix::basis({1}, s), TimeDependentHamiltonian(s),
                            {std::sqrt(kappa) * annihilation(4)}, cfg);
    const auto n = res.series.real("n");
    for (std::size_t i = 0; i < n.size(); ++i) CHECK(std::abs(n[i] - std::exp(-kappa * res.series.times[i])) < 1e-6);
    CHECK(res.series.truncation_ok);
    CHECK(res.warnings.empty());
}

TEST_CASE("QND Hamiltonian preserves sigma_z under cavity loss", "[dynamics]") {
    const SystemParams p = SystemParams::experiment();
    const HilbertSpec s = HilbertSpec::qubit_cavity(8);
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    cfg.n_samples = 21;
    cfg.observables = {{"sz", embed(pauli(Pauli::Z), 0, s)}};
    const Operator d = embed(annihilation(8), 1, s);
    const auto res = evolve(DensityMatrix::basis({0, 0}, s), h_rabi_frame(p, s, false),
                            {std::sqrt(p.kappa) * d}, cfg);
    for (double v : res.series.real("sz")) CHECK(std::abs(v - 1.0) < 1e-9);
}

TEST_CASE("broadband squeezed reservoir steady state", "[dynamics]") {
    CHECK(broadband_squeezed_dissipators(0.0, 0.3, 4.0, HilbertSpec::mode(5, "cavity"))[0].matrix() ==
          (2.0 * annihilation(5)).matrix());
    CHECK_THROWS_AS(broadband_squeezed_dissipators(-0.1, 0.0, 1.0, HilbertSpec::mode(5, "cavity")),
                    std::domain_error);

    const double r = std::asinh(std::sqrt(0.5));
    const Quadratures q0 = squeezed_cavity_steady(0.5, 0.0, 40);
    // the literal dissipator leaves <d^2> = +M: X anti-squeezed, Y squeezed
    CHECK(q0.x2 == Approx(std::exp(2 * r) / 4).epsilon(2e-3));
    CHECK(q0.y2 == Approx(std::exp(-2 * r) / 4).epsilon(2e-3));
    CHECK(q0.n == Approx(0.5).epsilon(1e-3));

    const Quadratures q90 = squeezed_cavity_steady(0.5, std::numbers::pi / 2, 40);
    CHECK(q90.x2 == Approx(q0.y2).epsilon(1e-6));
    CHECK(q90.y2 == Approx(q0.x2).epsilon(1e-6));

    CHECK(squeezed_cavity_steady(1.0, 0.0, 30).n == Approx(1.0).epsilon(0.01));
}

TEST_CASE("trajectory stays a valid state", "[dynamics][property]") {
    const SystemParams p = SystemParams::experiment();
    const double ns = ns_from_dpa_gain(6.0);
    DecayConfig cfg;
    cfg.t_max = 0.2;
    for (auto src : {SqueezeSource::Broadband, SqueezeSource::Cascaded}) {
        const HilbertSpec s = src == SqueezeSource::Broadband ? HilbertSpec::qubit_cavity(8)
                                                              : HilbertSpec::qubit_cavity_dpa(6, 6);
        const double lambda = src == SqueezeSource::Cascaded ? dpa_drive_for_target(ns, p) : 0.0;
        const auto h = src == SqueezeSource::Broadband ? h_rabi_frame(p, s, RabiFrameTerms::Full)
                                                       : h_cascaded(p, s, lambda, 0.0);
        const auto ls = src == SqueezeSource::Broadband ? broadband_squeezed_dissipators(ns, 0.0, p.kappa, s)
                                                        : cascaded_dissipators(p, s);
        EvolutionConfig ec;
        ec.t_end = 0.2;
        ec.n_samples = 5;
        const auto res = evolve(DensityMatrix::basis(std::vector<std::size_t>(s.size(), 0), s), h, ls, ec);
        const Matrix& rho = res.final_state.matrix();
        CHECK(std::abs(rho.trace() - 1.0) < 1e-7);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(rho).eigenvalues();
        CHECK(ev.minCoeff() > -1e-6);
    }
}

TEST_CASE("halving tolerances barely moves observables", "[dynamics][property]") {
    const SystemParams p = SystemParams::experiment();
    DecayConfig a;
    a.t_max = 0.3;
    DecayConfig b = a;
    b.rtol /= 2;
    b.atol /= 2;
    const double ns = ns_from_dpa_gain(6.0);
    const auto ra = simulate_sigma_z_decay(p, SqueezeSource::Broadband, ns, 0.0, a);
    const auto rb = simulate_sigma_z_decay(p, SqueezeSource::Broadband, ns, 0.0, b);
    const auto za = ra.series.real("sigma_z"), zb = rb.series.real("sigma_z");
    REQUIRE(za.size() == zb.size());
    for (std::size_t i = 0; i < za.size(); ++i) CHECK(std::abs(za[i] - zb[i]) < 1e-5 * std::abs(za[i]));
}

TEST_CASE("truncation check", "[dynamics]") {
    // a coherent drive pushes a 4-level cavity far past its top level
    const HilbertSpec s = HilbertSpec::mode(4, "cavity");
    TimeDependentHamiltonian h(s);
    h.add_with_conjugate(annihilation(4), Envelope::constant(5.0));
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    cfg.n_samples = 3;
    const auto res = evolve(DensityMatrix::basis({0}, s), h, {annihilation(4)}, cfg);
    CHECK_FALSE(res.series.truncation_ok);
    CHECK_FALSE(res.warnings.empty());
    cfg.truncation_is_error = true;
    CHECK_THROWS_AS(evolve(DensityMatrix::basis({0}, s), h, {annihilation(4)}, cfg), TruncationError);
}

TEST_CASE("step cap and grid", "[dynamics]") {
    EvolutionConfig cfg;
    cfg.t_end = 1.0;
    cfg.n_samples = 1;
    CHECK_THROWS_AS(cfg.grid(), std::invalid_argument);
    cfg.n_samples = 11;
    const auto g = cfg.grid();
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    const HilbertSpec a = HilbertSpec::mode(3), b = HilbertSpec::mode(4);
    CHECK_THROWS_AS(evolve(DensityMatrix::basis({0}, a), TimeDependentHamiltonian(b), {}, cfg),
                    std::invalid_argument);
}

TEST_CASE("DPA drive inversion", "[dynamics]") {
    const SystemParams p = SystemParams::experiment();
    CHECK(dpa_drive_for_target(0.0, p) == 0.0);
    const double l = dpa_drive_for_target(1.5, p);
    CHECK(cascaded_photon_number(l, p.kappa_sqz, p.kappa) == Approx(1.5).epsilon(1e-8));
    CHECK(l < p.kappa_sqz / 4);
    CHECK_THROWS_AS(dpa_drive_for_target(-1.0, p), std::domain_error);
    CHECK_THROWS_AS(cascaded_photon_number(p.kappa_sqz / 4, p.kappa_sqz, p.kappa), std::domain_error);

    CHECK(ns_from_dpa_gain(0.0) == 0.0);
    CHECK(ns_from_dpa_gain(10.0) == Approx(std::pow(std::sinh(0.5 * std::log(10.0)), 2)));
    for (double g : {0.0, 3.0, 10.0}) CHECK(squeeze_from_dpa_gain(g, 0.2).n_photons == Approx(ns_from_dpa_gain(g)).margin(1e-14));
}

TEST_CASE("Gaussian moments of the cascade agree with the photon-number formula", "[dynamics]") {
    const SystemParams p = SystemParams::experiment();
    for (double ns : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double l = dpa_drive_for_target(ns, p);
        const CascadeMoments m = cascade_moments(p, l, 0.0);
        CHECK(m.n_cavity == Approx(ns).epsilon(1e-9));
        CHECK(std::norm(m.m_cavity) <= m.n_cavity * (m.n_cavity + 1) + 1e-12);
        CHECK(std::norm(m.m_dpa) <= m.n_dpa * (m.n_dpa + 1) + 1e-12);
        // the phase of the pump rotates <d d> by 2 phi
        const CascadeMoments r = cascade_moments(p, l, 0.4);
        CHECK(std::abs(r.m_cavity - m.m_cavity * std::exp(0.8i)) < 1e-9 * std::abs(m.m_cavity));
        CHECK(r.n_cavity == Approx(m.n_cavity).epsilon(1e-12));
    }
}

TEST_CASE("effective lifetime fit", "[dynamics]") {
    TimeSeries ts;
    ts.add_column("sigma_z");
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.02 * i;
        ts.times.push_back(t);
        ts.columns[0].push_back(std::exp(-2 * t / 10.0));
    }
    const auto f = effective_lifetime(ts);
    CHECK(f.t_eff == Approx(10.0).epsilon(1e-12));
    CHECK(f.std_error < 1e-9);
    // e^{-t/5} first drops to 0.8 at the sample after t = 5 ln 1.25
    CHECK(f.window == Approx(1.12));

    TimeSeries slow = ts;
    for (std::size_t i = 0; i < slow.size(); ++i) slow.columns[0][i] = std::exp(-2 * slow.times[i] / 100.0);
    CHECK(effective_lifetime(slow).window == Approx(2.0));

    // window ends where sigma_z first reaches 0.8
    TimeSeries fast = ts;
    for (std::size_t i = 0; i < fast.size(); ++i) fast.columns[0][i] = std::exp(-2 * fast.times[i] / 1.0);
    const auto ff = effective_lifetime(fast);
    CHECK(ff.t_eff == Approx(1.0).epsilon(1e-12));
    CHECK(ff.window <= 0.13);

    TimeSeries bad = ts;
    bad.columns[0][3] = -0.1;
    CHECK_THROWS(effective_lifetime(bad, 1.0));
}

TEST_CASE("squeezed vacuum truncation estimate", "[dynamics]") {
    CHECK(squeezed_vacuum_dim(0.0) == 2);
    std::size_t prev = 0;
    for (double ns : {0.1, 0.5, 1.0, 2.0}) {
        const std::size_t d = squeezed_vacuum_dim(ns, 1e-6);
        CHECK(d > prev);
        prev = d;
    }
    CHECK_THROWS_AS(squeezed_vacuum_dim(-1.0), std::domain_error);
}

TEST_CASE("Y-quadrature squeezing shortens the lifetime", "[dynamics]") {
    const SystemParams p = SystemParams::experiment();
    const double ns = ns_from_dpa_gain(6.0);
    DecayConfig cfg;
    cfg.t_max = 2.0;
    const auto x = simulate_sigma_z_decay(p, SqueezeSource::Broadband, ns, 0.0, cfg);
    const auto y = simulate_sigma_z_decay(p, SqueezeSource::Broadband, ns, std::numbers::pi / 2, cfg);
    CHECK(y.fit.t_eff < x.fit.t_eff);
    CHECK(x.series.truncation_ok);
    CHECK(y.series.truncation_ok);
}

TEST_CASE("zero squeezing leaves only the counter-rotating baseline", "[dynamics][slow]") {
    const SystemParams p = SystemParams::experiment();
    DecayConfig cfg;
    cfg.t_max = 0.5;
    const auto bb = simulate_sigma_z_decay(p, SqueezeSource::Broadband, 0.0, 0.0, cfg);
    const auto cas = simulate_sigma_z_decay(p, SqueezeSource::Cascaded, 0.0, 0.0, cfg);
    CHECK(cas.fit.t_eff == Approx(bb.fit.t_eff).epsilon(1e-4));
    const auto zb = bb.series.real("sigma_z"), zc = cas.series.real("sigma_z");
    for (std::size_t i = 0; i < std::min(zb.size(), zc.size()); ++i) CHECK(std::abs(zb[i] - zc[i]) < 1e-7);
}

TEST_CASE("cascaded steady photon number in both truncation frames", "[dynamics][slow]") {
    const SystemParams p = SystemParams::experiment();
    const auto framed = cascaded_steady_photons(p, 0.5, 8, 12);
    const auto fock = cascaded_steady_photons(p, 0.5, 8, 12, 10, false);
    CHECK(framed.converged);
    CHECK(fock.converged);
    CHECK(framed.truncation_ok);
    CHECK(fock.truncation_ok);
    CHECK(framed.photon_number == Approx(0.5).epsilon(0.02));
    CHECK(fock.photon_number == Approx(framed.photon_number).epsilon(1e-3));
    CHECK(framed.spec.total_dim() < fock.spec.total_dim());
}
