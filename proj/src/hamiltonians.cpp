#include "strobo/hamiltonians.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace strobo {

using namespace std::complex_literals;

Complex Envelope::operator()(double t) const {
    if (custom) return custom(t);
    if (angular_frequency == 0.0) return amplitude;
    return amplitude * std::exp(Complex(0.0, angular_frequency * t));
}

Envelope Envelope::conjugate() const {
    if (custom) {
        auto f = custom;
        return {1.0, 0.0, [f](double t) { return std::conj(f(t)); }};
    }
    return {std::conj(amplitude), -angular_frequency, {}};
}

void TimeDependentHamiltonian::add(Operator op, Envelope env) {
    if (!op.spec().compatible(spec_)) {
        throw std::invalid_argument("TimeDependentHamiltonian: term lives on a different space");
    }
    terms_.push_back({std::move(op), std::move(env)});
}

void TimeDependentHamiltonian::add_with_conjugate(const Operator& op, const Envelope& env) {
    add(op, env);
    add(op.adjoint(), env.conjugate());
}

Operator TimeDependentHamiltonian::at(double t) const {
    Operator h = Operator::zero(spec_);
    for (const auto& term : terms_) {
        h += term.envelope(t) * term.op;
    }
    return h;
}

double TimeDependentHamiltonian::max_angular_frequency() const {
    double w = 0.0;
    for (const auto& term : terms_) {
        if (!term.envelope.custom) w = std::max(w, std::abs(term.envelope.angular_frequency));
    }
    return w;
}

bool TimeDependentHamiltonian::has_custom_envelopes() const {
    for (const auto& term : terms_) {
        if (term.envelope.custom) return true;
    }
    return false;
}

Operator frame_annihilation(std::size_t dim, const ModeFrame& f) {
    const Operator a = annihilation(dim);
    if (f.r == 0.0) return a;
    return std::cosh(f.r) * a + (std::exp(Complex(0.0, f.theta)) * std::sinh(f.r)) * a.adjoint();
}

Operator h_jaynes_cummings(const SystemParams& p, const HilbertSpec& spec) {
    const std::size_t q = spec.slot("qubit");
    const std::size_t c = spec.slot("cavity");
    const Operator a = annihilation(spec[c].dim);
    const Operator hq = embed(0.5 * p.omega_q * pauli(Pauli::Z), q, spec);
    const Operator hc = embed(p.omega_c * (a.adjoint() * a), c, spec);
    const Operator coupling = embed_product({{q, pauli(Pauli::Plus)}, {c, a}}, spec);
    return hq + hc + p.g * (coupling + coupling.adjoint());
}

TimeDependentHamiltonian h_dispersive_effective(const SystemParams& p, const HilbertSpec& spec) {
    const std::size_t q = spec.slot("qubit");
    const std::size_t c = spec.slot("cavity");
    const std::size_t nc = spec[c].dim;
    const Operator a = annihilation(nc);
    const Operator half = 0.5 * Operator::identity(HilbertSpec::mode(nc));
    const double chi = chi_from_g_delta(p.g, p.delta);

    TimeDependentHamiltonian h(spec);
    h.add(chi * embed_product({{c, a.adjoint() * a + half}, {q, pauli(Pauli::Z)}}, spec));

    // 1/2 Omega_R (e^{i wd t} + e^{-i wd t}) e^{i wq t} sigma_+ + h.c.
    const Operator sp = embed(pauli(Pauli::Plus), q, spec);
    const double wd = p.drive_frequency();
    h.add_with_conjugate(sp, Envelope::rotating(p.omega_q + wd, 0.5 * p.omega_r));
    h.add_with_conjugate(sp, Envelope::rotating(p.omega_q - wd, 0.5 * p.omega_r));

    const Operator ad = embed(a.adjoint(), c, spec);
    h.add_with_conjugate(ad, Envelope::rotating(-p.omega_r, p.eps_plus));
    h.add_with_conjugate(ad, Envelope::rotating(p.omega_r, p.eps_minus));

    const ValidityReport rep = validate_dispersive(p);
    static const char* names[] = {"g*Omega/Delta^2", "g*Omega/(Delta(Delta+2wc))",
                                  "(g/Delta)|eps+|/|Omega-Delta|", "(g/Delta)|eps-|/|Omega+Delta|"};
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
        if (!rep.pass[i]) {
            std::ostringstream os;
            os << "dispersive condition " << names[i] << " = " << rep.ratios[i]
               << " not below " << rep.threshold;
            h.add_warning(os.str());
        }
    }
    return h;
}

TimeDependentHamiltonian h_rabi_frame(const SystemParams& p, const HilbertSpec& spec,
                                      RabiFrameTerms terms, const ModeFrame& cavity) {
    const std::size_t q = spec.slot("qubit");
    const std::size_t c = spec.slot("cavity");
    const Operator d = frame_annihilation(spec[c].dim, cavity);
    const Operator x = d + d.adjoint();
    const Operator n = d.adjoint() * d;
    const Operator sz = pauli(Pauli::Z);

    TimeDependentHamiltonian h(spec);
    h.add(p.chi * p.a_bar0 * embed_product({{q, sz}, {c, x}}, spec));
    if (terms == RabiFrameTerms::QndOnly) return h;

    const Operator qubit_part =
        terms == RabiFrameTerms::Full ? sz - Complex(0.0, 1.0) * pauli(Pauli::Y) : sz;
    const Operator A = 0.5 * p.chi * embed_product({{c, n}, {q, qubit_part}}, spec);
    const Operator B = 0.5 * p.chi * p.a_bar0 * embed_product({{c, x}, {q, qubit_part}}, spec);
    h.add_with_conjugate(A, Envelope::rotating(p.omega_r));
    h.add_with_conjugate(B, Envelope::rotating(2.0 * p.omega_r));
    return h;
}

TimeDependentHamiltonian h_rabi_frame(const SystemParams& p, const HilbertSpec& spec,
                                      bool include_counter_rotating) {
    return h_rabi_frame(p, spec,
                        include_counter_rotating ? RabiFrameTerms::Full : RabiFrameTerms::QndOnly);
}

TimeDependentHamiltonian h_cascaded(const SystemParams& p, const HilbertSpec& spec, double lambda,
                                    double phi, RabiFrameTerms terms, const ModeFrame& cavity,
                                    const ModeFrame& dpa) {
    if (lambda < 0.0) {
        throw std::domain_error("h_cascaded: parametric drive must be >= 0");
    }
    if (lambda >= p.kappa_sqz / 4.0) {
        throw std::domain_error("h_cascaded: parametric drive at or above threshold kappa_sqz/4");
    }
    TimeDependentHamiltonian h = h_rabi_frame(p, spec, terms, cavity);
    const std::size_t c = spec.slot("cavity");
    const std::size_t s = spec.slot("dpa");
    const Operator b = frame_annihilation(spec[s].dim, dpa);
    const Operator d = frame_annihilation(spec[c].dim, cavity);

    // i lambda e^{2i phi} b^dag^2 + h.c.
    const Operator bd2 = embed(b.adjoint() * b.adjoint(), s, spec);
    h.add_with_conjugate(bd2, Envelope::constant(1i * lambda * std::exp(2i * phi)));

    // i (sqrt(k_s k)/2) d b^dag + h.c.
    const Operator dbd = embed_product({{c, d}, {s, b.adjoint()}}, spec);
    h.add_with_conjugate(dbd, Envelope::constant(0.5i * std::sqrt(p.kappa_sqz * p.kappa)));
    return h;
}

}  // namespace strobo
