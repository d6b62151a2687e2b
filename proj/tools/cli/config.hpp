#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "strobo/dynamics.hpp"
#include "strobo/homodyne.hpp"
#include "strobo/params.hpp"

namespace strobo::cli {

/// Malformed or inconsistent configuration (exit code 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSection {
    std::vector<double> phis{};      // rad
    std::vector<double> gains_db{};
};

struct SnrCurveSection {
    std::vector<double> taus{};      // us
    std::vector<double> gains_db{};  // one SNR(tau) curve per gain
    double phi = 0.0;
    std::vector<double> ratio_r{};   // squeezing parameters for the long-time ratio
};

struct LifetimeSection {
    std::vector<double> gains_db{};
    std::vector<SqueezeSource> models{};
    double phi = 0.0;
    double fidelity = 0.999;
    DecayConfig decay{};
};

struct HistogramSetting {
    std::string label;
    double gain_db = 0.0;
    double phi = 0.0;
};

struct HistogramsSection {
    std::size_t shots = 20000;
    double t_int = 1.8;       // us
    double sample_rate = 20;  // per us
    double p_relax = 0.02;
    std::vector<HistogramSetting> settings{};
};

struct Config {
    SystemParams system;
    RateModel rates;
    SweepSection sweep;
    SnrCurveSection snr_curve;
    LifetimeSection lifetime;
    HistogramsSection histograms;
};

/// Every section is optional and falls back to the experimental defaults.
/// Unknown keys anywhere are errors.
Config config_from_json(const nlohmann::json& j);
/// Parse errors carry the line and column of the offending character.
Config load_config(const std::string& path);
Config parse_config(const std::string& text);

}  // namespace strobo::cli
