#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace strobo::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// Either an explicit array or {"start", "stop", "count"}.
std::vector<double> grid(const json& j, const std::string& where) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError(where + ": expected numbers");
            v.push_back(x.get<double>());
        }
        if (v.empty()) throw ConfigError(where + ": empty grid");
        return v;
    }
    reject_unknown(j, {"start", "stop", "count"}, where);
    if (!j.contains("start") || !j.contains("stop") || !j.contains("count"))
        throw ConfigError(where + ": range needs start, stop and count");
    const auto n = j.at("count").get<long long>();
    if (n < 1) throw ConfigError(where + ".count: must be >= 1");
    return linspace(j.at("start").get<double>(), j.at("stop").get<double>(), static_cast<std::size_t>(n));
}

double positive(const json& j, const char* key, double fallback, const std::string& where) {
    const double v = j.value(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + "." + key + ": must be positive");
    return v;
}

RateModel rates_from(const json& j, const EfficiencyParams& eff) {
    reject_unknown(j, {"gamma_phi_vac", "gamma_meas_vac"}, "rates");
    RateModel rm = RateModel::experiment();
    rm.gamma_phi_vac = positive(j, "gamma_phi_vac", rm.gamma_phi_vac, "rates");
    rm.gamma_meas_vac = positive(j, "gamma_meas_vac", rm.gamma_meas_vac, "rates");
    rm.eff = eff;
    rm.validate();
    return rm;
}

SweepSection sweep_from(const json& j) {
    reject_unknown(j, {"phi_rad", "gain_db"}, "sweep");
    SweepSection s;
    s.phis = j.contains("phi_rad") ? grid(j.at("phi_rad"), "sweep.phi_rad")
                                   : linspace(0.0, std::numbers::pi, 37);
    s.gains_db = j.contains("gain_db") ? grid(j.at("gain_db"), "sweep.gain_db")
                                       : std::vector<double>{0.0, 1.0, 2.0, 3.8};
    for (double g : s.gains_db)
        if (g < 0.0) throw ConfigError("sweep.gain_db: gains must be >= 0");
    return s;
}

SnrCurveSection snr_curve_from(const json& j) {
    reject_unknown(j, {"tau_us", "gain_db", "phi_rad", "ratio_r"}, "snr_curve");
    SnrCurveSection s;
    s.taus = j.contains("tau_us") ? grid(j.at("tau_us"), "snr_curve.tau_us") : linspace(0.1, 20.0, 200);
    for (double t : s.taus)
        if (!(t > 0.0)) throw ConfigError("snr_curve.tau_us: integration times must be positive");
    s.gains_db = j.contains("gain_db") ? grid(j.at("gain_db"), "snr_curve.gain_db")
                                       : std::vector<double>{0.0, 3.0, 6.0, 10.0};
    s.phi = j.value("phi_rad", 0.0);
    s.ratio_r = j.contains("ratio_r") ? grid(j.at("ratio_r"), "snr_curve.ratio_r") : linspace(0.0, 2.5, 251);
    return s;
}

LifetimeSection lifetime_from(const json& j) {
    reject_unknown(j,
                   {"gain_db", "models", "phi_rad", "fidelity", "t_max_us", "sample_dt_us",
                    "cavity_dim", "dpa_dim", "rtol", "atol", "max_raises"},
                   "lifetime");
    LifetimeSection s;
    s.gains_db = j.contains("gain_db") ? grid(j.at("gain_db"), "lifetime.gain_db")
                                       : std::vector<double>{3.0, 6.0, 10.0};
    std::vector<std::string> models{"broadband", "cascaded"};
    if (j.contains("models")) models = j.at("models").get<std::vector<std::string>>();
    for (const auto& m : models) {
        if (m == "broadband") s.models.push_back(SqueezeSource::Broadband);
        else if (m == "cascaded") s.models.push_back(SqueezeSource::Cascaded);
        else throw ConfigError("lifetime.models: unknown model '" + m + "'");
    }
    s.phi = j.value("phi_rad", 0.0);
    s.fidelity = j.value("fidelity", 0.999);
    if (!(s.fidelity > 0.5 && s.fidelity < 1.0)) throw ConfigError("lifetime.fidelity: must be in (0.5, 1)");
    s.decay.t_max = positive(j, "t_max_us", 2.0, "lifetime");
    s.decay.sample_dt = positive(j, "sample_dt_us", s.decay.sample_dt, "lifetime");
    s.decay.cavity_dim = j.value("cavity_dim", s.decay.cavity_dim);
    s.decay.dpa_dim = j.value("dpa_dim", s.decay.dpa_dim);
    s.decay.rtol = positive(j, "rtol", s.decay.rtol, "lifetime");
    s.decay.atol = positive(j, "atol", s.decay.atol, "lifetime");
    s.decay.max_raises = j.value("max_raises", s.decay.max_raises);
    if (s.decay.cavity_dim < 2 || s.decay.dpa_dim < 2) throw ConfigError("lifetime: dims must be >= 2");
    return s;
}

HistogramsSection histograms_from(const json& j) {
    reject_unknown(j, {"shots", "t_int_us", "sample_rate_per_us", "p_relax", "settings"}, "histograms");
    HistogramsSection s;
    const long long shots = j.value("shots", 20000LL);
    if (shots < 2) throw ConfigError("histograms.shots: must be >= 2");
    s.shots = static_cast<std::size_t>(shots);
    s.t_int = positive(j, "t_int_us", s.t_int, "histograms");
    s.sample_rate = positive(j, "sample_rate_per_us", s.sample_rate, "histograms");
    s.p_relax = j.value("p_relax", s.p_relax);
    if (s.p_relax < 0.0 || s.p_relax > 0.1) throw ConfigError("histograms.p_relax: must be in [0, 0.1]");
    if (j.contains("settings")) {
        for (const auto& item : j.at("settings")) {
            reject_unknown(item, {"label", "gain_db", "phi_rad"}, "histograms.settings[]");
            HistogramSetting h;
            h.label = item.at("label").get<std::string>();
            h.gain_db = item.value("gain_db", 0.0);
            h.phi = item.value("phi_rad", 0.0);
            if (h.gain_db < 0.0) throw ConfigError("histograms.settings[].gain_db: must be >= 0");
            s.settings.push_back(h);
        }
        if (s.settings.empty()) throw ConfigError("histograms.settings: empty");
    } else {
        // Record noise is lowest at Phi = 0 and highest at pi/2.
        s.settings = {{"unsqueezed", 0.0, 0.0},
                      {"squeezed", 3.8, 0.0},
                      {"antisqueezed", 3.8, std::numbers::pi / 2}};
    }
    return s;
}

}  // namespace

Config config_from_json(const json& j) {
    reject_unknown(j, {"system", "efficiency", "rates", "sweep", "snr_curve", "lifetime", "histograms"},
                   "config");
    const json empty = json::object();
    auto section = [&](const char* key) -> const json& { return j.contains(key) ? j.at(key) : empty; };
    Config c;
    try {
        c.system = system_params_from_json(section("system"));
        c.rates = rates_from(section("rates"), efficiency_from_json(section("efficiency")));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    c.sweep = sweep_from(section("sweep"));
    c.snr_curve = snr_curve_from(section("snr_curve"));
    c.lifetime = lifetime_from(section("lifetime"));
    c.histograms = histograms_from(section("histograms"));
    return c;
}

Config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace strobo::cli
