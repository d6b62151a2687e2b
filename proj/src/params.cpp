#include "strobo/params.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace strobo {

double chi_from_g_delta(double g, double delta) {
    if (delta == 0.0) {
        throw std::domain_error("chi_from_g_delta: zero detuning");
    }
    return g * g / delta;
}

std::array<Complex, 2> sideband_amplitudes(double a_bar0, double omega_r, double kappa) {
    // a(t) = a0 e^{-i W t} + a0 e^{+i W t} solves da/dt = -(k/2) a - i(eps_+ e^{-iWt} + eps_- e^{iWt})
    const Complex half_kappa{0.0, 0.5 * kappa};
    return {a_bar0 * (omega_r + half_kappa), a_bar0 * (-omega_r + half_kappa)};
}

SystemParams SystemParams::build(const SystemInputs& in) {
    SystemParams p;
    p.omega_q = in.omega_q;
    p.omega_c = in.omega_c;
    p.g = in.g;
    p.delta = in.omega_q - in.omega_c;
    p.chi = in.chi ? *in.chi : chi_from_g_delta(in.g, p.delta);
    p.kappa = in.kappa;
    p.omega_r = in.omega_r;
    p.a_bar0 = in.a_bar0;
    p.kappa_sqz = in.kappa_sqz;
    const auto sb = sideband_amplitudes(in.a_bar0, in.omega_r, in.kappa);
    p.eps_plus = in.eps_plus.value_or(sb[0]);
    p.eps_minus = in.eps_minus.value_or(sb[1]);
    p.validate();
    return p;
}

SystemParams SystemParams::experiment() {
    SystemInputs in;
    in.omega_q = mhz(3898.0);
    in.omega_c = mhz(6694.0);
    in.g = mhz(45.2);
    // measured dispersive shift; g^2/|Delta| = 0.7307 MHz
    in.chi = mhz(0.73);
    in.kappa = mhz(5.9);
    in.omega_r = mhz(40.0);
    in.a_bar0 = 0.35;
    in.kappa_sqz = mhz(26.0);
    return build(in);
}

double SystemParams::drive_frequency() const {
    return omega_q + chi + 4.0 * chi * a_bar0 * a_bar0;
}

void SystemParams::validate() const {
    if (delta != omega_q - omega_c) {
        throw std::invalid_argument("SystemParams: delta must equal omega_q - omega_c");
    }
    if (kappa < 0.0 || kappa_sqz < 0.0) {
        throw std::invalid_argument("SystemParams: negative linewidth");
    }
    if (a_bar0 < 0.0) {
        throw std::invalid_argument("SystemParams: negative cavity amplitude a_bar0");
    }
    if (!(omega_r > 0.0)) {
        throw std::invalid_argument("SystemParams: Rabi frequency must be positive");
    }
    for (double v : {omega_q, omega_c, g, chi, kappa, omega_r, a_bar0, kappa_sqz}) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("SystemParams: non-finite value");
        }
    }
}

SqueezeSpec SqueezeSpec::from_r(double r, double phi) {
    if (r < 0.0 || !std::isfinite(r)) {
        throw std::domain_error("SqueezeSpec: squeezing parameter must be >= 0");
    }
    SqueezeSpec s;
    s.r = r;
    s.phi = phi;
    const double sh = std::sinh(r);
    const double ch = std::cosh(r);
    s.n_photons = sh * sh;
    s.m_coherence = sh * ch;
    s.gain_db = 10.0 * std::log10(ch * ch);
    return s;
}

SqueezeSpec gain_to_squeeze(double gain_db, double phi) {
    if (gain_db < 0.0 || !std::isfinite(gain_db)) {
        throw std::domain_error("gain_to_squeeze: gain must be >= 0 dB");
    }
    const double g = std::pow(10.0, gain_db / 10.0);
    const double n = g - 1.0;
    SqueezeSpec s;
    s.r = std::log(std::sqrt(g) + std::sqrt(n));
    s.phi = phi;
    s.n_photons = n;
    s.m_coherence = std::sqrt(n * g);
    s.gain_db = gain_db;
    return s;
}

double squeeze_to_gain(const SqueezeSpec& sq) {
    const double ch = std::cosh(sq.r);
    return 10.0 * std::log10(ch * ch);
}

void EfficiencyParams::validate() const {
    if (!(eps_in >= 0.0 && eps_in <= 1.0) || !(eps_out >= 0.0 && eps_out <= 1.0)) {
        throw std::invalid_argument("EfficiencyParams: efficiencies must lie in [0, 1]");
    }
}

ValidityReport validate_dispersive(const SystemParams& p, double threshold) {
    const double d = p.delta;
    if (d == 0.0) {
        throw std::domain_error("validate_dispersive: zero detuning");
    }
    if (std::abs(p.omega_r) == std::abs(d)) {
        throw std::domain_error("validate_dispersive: Omega_R == |Delta| sideband resonance");
    }
    const double denom2 = d * (d + 2.0 * p.omega_c);
    if (denom2 == 0.0) {
        throw std::domain_error("validate_dispersive: Delta + 2 omega_c == 0");
    }
    ValidityReport rep;
    rep.threshold = threshold;
    const double gd = std::abs(p.g / d);
    rep.ratios[0] = std::abs(p.g * p.omega_r / (d * d));
    rep.ratios[1] = std::abs(p.g * p.omega_r / denom2);
    rep.ratios[2] = gd * std::abs(p.eps_plus) / std::abs(p.omega_r - d);
    rep.ratios[3] = gd * std::abs(p.eps_minus) / std::abs(p.omega_r + d);
    for (std::size_t i = 0; i < 4; ++i) {
        rep.pass[i] = rep.ratios[i] < threshold;
    }
    return rep;
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const char* section) {
    if (!j.is_object()) {
        throw std::invalid_argument(std::string(section) + ": expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw std::invalid_argument(std::string(section) + ": unknown key '" + key + "'");
        }
    }
}

Complex complex_from_json(const nlohmann::json& j, const char* key) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw std::invalid_argument(std::string("system.") + key + ": expected number or [re, im]");
}

}  // namespace

SystemParams system_params_from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"omega_q", "omega_c", "g", "delta", "chi", "kappa", "omega_r", "a_bar0",
                    "kappa_sqz", "eps_plus", "eps_minus"},
                   "system");
    const SystemParams def = SystemParams::experiment();
    auto freq = [&](const char* key, double fallback) {
        return j.contains(key) ? mhz(j.at(key).get<double>()) : fallback;
    };
    SystemInputs in;
    in.omega_q = freq("omega_q", def.omega_q);
    in.omega_c = freq("omega_c", def.omega_c);
    in.g = freq("g", def.g);
    if (j.contains("chi")) {
        in.chi = mhz(j.at("chi").get<double>());
    } else if (!j.contains("g") && !j.contains("omega_q") && !j.contains("omega_c")) {
        in.chi = def.chi;
    }
    in.kappa = freq("kappa", def.kappa);
    in.omega_r = freq("omega_r", def.omega_r);
    in.a_bar0 = j.contains("a_bar0") ? j.at("a_bar0").get<double>() : def.a_bar0;
    in.kappa_sqz = freq("kappa_sqz", def.kappa_sqz);
    if (j.contains("eps_plus")) {
        in.eps_plus = mhz(1.0) * complex_from_json(j.at("eps_plus"), "eps_plus");
    }
    if (j.contains("eps_minus")) {
        in.eps_minus = mhz(1.0) * complex_from_json(j.at("eps_minus"), "eps_minus");
    }
    SystemParams p = SystemParams::build(in);
    if (j.contains("delta")) {
        const double given = mhz(j.at("delta").get<double>());
        if (std::abs(given - p.delta) > 1e-9 * std::max(1.0, std::abs(p.delta))) {
            throw std::invalid_argument("system.delta: must equal omega_q - omega_c");
        }
    }
    return p;
}

nlohmann::json system_params_to_json(const SystemParams& p) {
    auto c = [](Complex z) { return nlohmann::json::array({to_mhz(z.real()), to_mhz(z.imag())}); };
    return {
        {"omega_q", to_mhz(p.omega_q)},   {"omega_c", to_mhz(p.omega_c)},
        {"g", to_mhz(p.g)},               {"delta", to_mhz(p.delta)},
        {"chi", to_mhz(p.chi)},           {"kappa", to_mhz(p.kappa)},
        {"omega_r", to_mhz(p.omega_r)},   {"a_bar0", p.a_bar0},
        {"kappa_sqz", to_mhz(p.kappa_sqz)}, {"eps_plus", c(p.eps_plus)},
        {"eps_minus", c(p.eps_minus)},
    };
}

EfficiencyParams efficiency_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"eps_in", "eps_out", "delta_align", "global_phase"}, "efficiency");
    EfficiencyParams e;
    e.eps_in = j.value("eps_in", 0.48);
    e.eps_out = j.value("eps_out", 0.38);
    e.delta_align = j.value("delta_align", 0.0);
    e.global_phase = j.value("global_phase", 0.0);
    e.validate();
    return e;
}

}  // namespace strobo
