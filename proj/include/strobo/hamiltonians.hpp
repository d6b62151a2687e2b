#pragma once

#include <functional>
#include <string>
#include <vector>

#include "strobo/operators.hpp"
#include "strobo/params.hpp"

namespace strobo {

/// Scalar time dependence of one Hamiltonian term:
/// amplitude * exp(i * angular_frequency * t), or `custom(t)` when set.
struct Envelope {
    Complex amplitude{1.0, 0.0};
    double angular_frequency = 0.0;
    std::function<Complex(double)> custom;

    Complex operator()(double t) const;
    bool is_static() const { return !custom && angular_frequency == 0.0; }

    static Envelope constant(Complex c = 1.0) { return {c, 0.0, {}}; }
    static Envelope rotating(double omega, Complex amp = 1.0) { return {amp, omega, {}}; }
    Envelope conjugate() const;
};

struct HamiltonianTerm {
    Operator op;
    Envelope envelope;
};

/// H(t) = sum_j envelope_j(t) op_j. Builders add Hermitian-conjugate partners
/// explicitly, so H(t) is Hermitian for every t.
class TimeDependentHamiltonian {
public:
    explicit TimeDependentHamiltonian(HilbertSpec spec) : spec_(std::move(spec)) {}

    void add(Operator op, Envelope env = Envelope::constant());
    /// Adds env(t) op + conj(env(t)) op^dag.
    void add_with_conjugate(const Operator& op, const Envelope& env);
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

    Operator at(double t) const;

    const HilbertSpec& spec() const { return spec_; }
    const std::vector<HamiltonianTerm>& terms() const { return terms_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    /// Largest |angular_frequency| among the envelopes; custom envelopes are ignored.
    double max_angular_frequency() const;
    bool has_custom_envelopes() const;

private:
    HilbertSpec spec_;
    std::vector<HamiltonianTerm> terms_;
    std::vector<std::string> warnings_;
};

/// 1/2 omega_q sigma_z + omega_c a^dag a + g(a sigma_+ + a^dag sigma_-).
/// Needs slots "qubit" and "cavity".
Operator h_jaynes_cummings(const SystemParams& p, const HilbertSpec& spec);

/// Dispersive frame, interaction picture w.r.t. the bare qubit and cavity:
/// (g^2/Delta)(a^dag a + 1/2) sigma_z, the qubit drive at drive_frequency()
/// and the two-tone cavity drive at +-Omega_R. Validity failures become warnings.
TimeDependentHamiltonian h_dispersive_effective(const SystemParams& p, const HilbertSpec& spec);

/// Locally squeezed simulation basis for one mode: the state is stored as
/// rho' = S^dag rho S and the mode's annihilation operator becomes
/// S^dag a S = a cosh r + e^{i theta} a^dag sinh r. r = 0 is the Fock basis.
/// Truncating in a frame matched to the state's squeezing keeps it near vacuum.
struct ModeFrame {
    double r = 0.0;
    double theta = 0.0;
};

Operator frame_annihilation(std::size_t dim, const ModeFrame& f);

enum class RabiFrameTerms {
    QndOnly,       // chi a0 sigma_z (d + d^dag)
    Longitudinal,  // plus the sigma_z parts of A and B; sigma_z stays conserved
    Full,          // plus the sigma_y parts (spin flips)
};

/// Rabi-frame Hamiltonian chi a0 sz (d + d^dag) + (e^{iWt} A + e^{2iWt} B + h.c.),
/// A = (chi/2) d^dag d (sz - i sy), B = (chi a0/2)(d + d^dag)(sz - i sy).
TimeDependentHamiltonian h_rabi_frame(const SystemParams& p, const HilbertSpec& spec,
                                      RabiFrameTerms terms, const ModeFrame& cavity = {});
TimeDependentHamiltonian h_rabi_frame(const SystemParams& p, const HilbertSpec& spec,
                                      bool include_counter_rotating);

/// Rabi-frame Hamiltonian plus a degenerate parametric source b cascaded into
/// the cavity: i lambda(e^{2i phi} b^dag^2 - h.c.) + i(sqrt(k_sqz k)/2)(d b^dag - d^dag b).
/// Throws std::domain_error at or above threshold lambda >= kappa_sqz/4.
TimeDependentHamiltonian h_cascaded(const SystemParams& p, const HilbertSpec& spec,
                                    double lambda, double phi,
                                    RabiFrameTerms terms = RabiFrameTerms::Full,
                                    const ModeFrame& cavity = {}, const ModeFrame& dpa = {});

}  // namespace strobo
