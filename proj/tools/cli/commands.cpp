#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "cli/pool.hpp"
#include "strobo/errors.hpp"
#include "strobo/estimation.hpp"

namespace strobo::cli {

namespace {

constexpr double kPi = std::numbers::pi;

// Rows of comma-separated cells at 17 significant digits.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        os_.precision(17);
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    Csv& cell(double v) { sep(); os_ << v; return *this; }
    Csv& cell(std::size_t v) { sep(); os_ << v; return *this; }
    Csv& cell(const std::string& v) { sep(); os_ << v; return *this; }
    void end() { os_ << '\n'; first_ = true; }
    std::string str() const { return os_.str(); }

private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }
    std::ostringstream os_;
    bool first_ = true;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

CheckResult check(std::string name, bool pass, const std::string& detail) {
    return {std::move(name), pass, detail};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Shared checks for the two rate sweeps.
void periodicity_and_baseline(CommandResult& res, const Config& c,
                              double (*rate)(double, const SqueezeSpec&, const RateModel&),
                              double vac, const std::string& what) {
    double worst_base = 0.0, worst_period = 0.0;
    for (double phi : c.sweep.phis) {
        worst_base = std::max(worst_base, rel_diff(rate(phi, gain_to_squeeze(0.0, phi), c.rates), vac));
        for (double g : c.sweep.gains_db)
            worst_period = std::max(worst_period, rel_diff(rate(phi + kPi, gain_to_squeeze(g, phi + kPi), c.rates),
                                                           rate(phi, gain_to_squeeze(g, phi), c.rates)));
    }
    res.checks.push_back(check(what + " squeezer-off equals vacuum rate", worst_base < 1e-12, "max rel diff " + fmt(worst_base)));
    res.checks.push_back(check(what + " pi-periodic in phase", worst_period < 1e-12, "max rel diff " + fmt(worst_period)));
}

void joint_fit_round_trip(CommandResult& res, const Config& c) {
    const Sweep d = dephase_sweep(c.sweep.phis, c.sweep.gains_db, c.rates);
    const Sweep m = meas_sweep(c.sweep.phis, c.sweep.gains_db, c.rates);
    try {
        const FitResult f = joint_fit(d, m, c.rates);
        const double de = std::abs(f.value("eps_in") - c.rates.eff.eps_in);
        const double dd = std::abs(std::remainder(f.value("delta") - c.rates.eff.delta_align, kPi));
        const double dp = std::abs(std::remainder(f.value("phi0") - c.rates.eff.global_phase, kPi));
        res.checks.push_back(check("zero-noise joint fit recovers eps_in, delta, phi0",
                                   de < 1e-6 && dd < 1e-6 && dp < 1e-6,
                                   "errors " + fmt(de) + ", " + fmt(dd) + ", " + fmt(dp)));
    } catch (const std::exception& e) {
        res.checks.push_back(check("zero-noise joint fit recovers eps_in, delta, phi0", false, e.what()));
    }
}

double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double inv = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv * (b - a), x2 = a + inv * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-12) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv * (b - a); f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

bool CommandResult::checks_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

CommandResult cmd_dephase_sweep(const Config& c, const Options& o) {
    CommandResult res;
    Csv csv({"phi_rad", "gain_db", "gamma_phi_per_us"});
    for (const auto& pt : dephase_sweep(c.sweep.phis, c.sweep.gains_db, c.rates)) {
        csv.cell(pt.phi).cell(pt.gain_db).cell(pt.value);
        csv.end();
    }
    res.outputs.push_back({"", csv.str()});
    if (o.check) {
        periodicity_and_baseline(res, c, &dephasing_rate, c.rates.gamma_phi_vac, "dephasing");
        // Extremes over phase follow 1 + 2 eps_in (N +- M).
        double worst = 0.0;
        for (double g : c.sweep.gains_db) {
            const SqueezeSpec sq = gain_to_squeeze(g, 0.0);
            double lo = INFINITY, hi = 0.0;
            for (int i = 0; i < 3600; ++i) {
                const double v = dephasing_rate(kPi * i / 3600.0, sq, c.rates);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double e = c.rates.eff.eps_in;
            const double expect = (1 + 2 * e * (sq.n_photons + sq.m_coherence)) /
                                  (1 + 2 * e * (sq.n_photons - sq.m_coherence));
            worst = std::max(worst, rel_diff(hi / lo, expect));
        }
        res.checks.push_back(check("dephasing max/min ratio over phase", worst < 1e-5, "max rel diff " + fmt(worst)));
    }
    return res;
}

CommandResult cmd_meas_sweep(const Config& c, const Options& o) {
    CommandResult res;
    Csv csv({"phi_rad", "gain_db", "gamma_meas_per_us"});
    for (const auto& pt : meas_sweep(c.sweep.phis, c.sweep.gains_db, c.rates)) {
        csv.cell(pt.phi).cell(pt.gain_db).cell(pt.value);
        csv.end();
    }
    res.outputs.push_back({"", csv.str()});
    if (o.check) {
        periodicity_and_baseline(res, c, &measurement_rate, c.rates.gamma_meas_vac, "measurement");
        joint_fit_round_trip(res, c);
    }
    return res;
}

CommandResult cmd_eta(const Config& c, const Options& o) {
    CommandResult res;
    Csv csv({"phi_rad", "gain_db", "gamma_phi_per_us", "gamma_meas_per_us", "eta"});
    double worst_pointwise = 0.0;
    for (double g : c.sweep.gains_db)
        for (double phi : c.sweep.phis) {
            const SqueezeSpec sq = gain_to_squeeze(g, phi);
            const double gp = dephasing_rate(phi, sq, c.rates);
            const double gm = measurement_rate(phi, sq, c.rates);
            const double eta = efficiency(phi, sq, c.rates);
            const double pointwise = c.rates.eff.eps_out * (c.rates.gamma_phi_vac / gp) * (gm / c.rates.gamma_meas_vac);
            worst_pointwise = std::max(worst_pointwise, rel_diff(eta, pointwise));
            csv.cell(phi).cell(g).cell(gp).cell(gm).cell(eta);
            csv.end();
        }
    res.outputs.push_back({"", csv.str()});
    if (o.check) {
        double worst_off = 0.0;
        for (double phi : c.sweep.phis)
            worst_off = std::max(worst_off, rel_diff(efficiency(phi, gain_to_squeeze(0.0, phi), c.rates), c.rates.eff.eps_out));
        res.checks.push_back(check("squeezer-off efficiency equals eps_out", worst_off < 1e-12, "max rel diff " + fmt(worst_off)));
        res.checks.push_back(check("eta equals pointwise ratio of the sweeps", worst_pointwise < 1e-12,
                                   "max rel diff " + fmt(worst_pointwise)));
    }
    return res;
}

CommandResult cmd_snr_curve(const Config& c, const Options& o) {
    CommandResult res;
    const auto& s = c.snr_curve;
    struct Row { double tau, gain, r, snr, sig, noise; };
    const auto curves = parallel_map(s.gains_db.size(), o.threads, [&](std::size_t gi) {
        const SqueezeSpec sq = gain_to_squeeze(s.gains_db[gi], s.phi);
        std::vector<Row> rows;
        for (double tau : s.taus) {
            const SnrBreakdown b = snr(tau, c.system, sq);
            rows.push_back({tau, s.gains_db[gi], sq.r, b.snr, b.signal_sq, b.noise_sq});
        }
        return rows;
    });
    Csv csv({"gain_db", "r", "phi_rad", "tau_us", "snr", "signal_sq", "noise_sq"});
    for (const auto& rows : curves)
        for (const auto& r : rows) {
            csv.cell(r.gain).cell(r.r).cell(s.phi).cell(r.tau).cell(r.snr).cell(r.sig).cell(r.noise);
            csv.end();
        }
    res.outputs.push_back({"", csv.str()});

    Csv ratio({"r", "gain_db", "snr_ratio_longtime"});
    for (double r : s.ratio_r) {
        ratio.cell(r).cell(10.0 * std::log10(std::exp(2.0 * r))).cell(snr_ratio_longtime(r, c.system));
        ratio.end();
    }
    res.outputs.push_back({"_ratio.csv", ratio.str()});

    const OptimalSqueezing opt = optimal_squeezing(c.system);
    res.outputs.push_back({"_optimal.json", dump({{"r_opt", opt.r},
                                                  {"e2r_opt", opt.e2r},
                                                  {"gain_db_opt", opt.gain_db},
                                                  {"peak_ratio", opt.peak_ratio}})});
    if (o.check) {
        const double r_num = golden_max([&](double r) { return snr_ratio_longtime(r, c.system); }, 0.0, 5.0);
        res.checks.push_back(check("closed-form optimum matches numeric maximization", std::abs(r_num - opt.r) < 1e-6,
                                   "r_opt " + fmt(opt.r) + " numeric " + fmt(r_num)));
        const double tau_hi = *std::max_element(s.taus.begin(), s.taus.end());
        if (c.system.kappa * tau_hi >= 100.0) {
            const SqueezeSpec off = SqueezeSpec::off();
            const double t1 = tau_hi / 2, t2 = tau_hi;
            const double s1 = snr(t1, c.system, off).snr, s2 = snr(t2, c.system, off).snr;
            const double local = (s2 - s1) / (t2 - t1);
            const double dev = rel_diff(local, s2 / t2);
            res.checks.push_back(check("unsqueezed SNR linear at long times", dev < 0.02, "slope mismatch " + fmt(dev)));
        }
    }
    return res;
}

CommandResult cmd_lifetime(const Config& c, const Options& o) {
    CommandResult res;
    const auto& s = c.lifetime;
    struct Point { double gain; SqueezeSource model; };
    std::vector<Point> points;
    for (double g : s.gains_db)
        for (auto m : s.models) points.push_back({g, m});
    const auto results = parallel_map(points.size(), o.threads, [&](std::size_t i) {
        return simulate_sigma_z_decay(c.system, points[i].model, ns_from_dpa_gain(points[i].gain), s.phi, s.decay);
    });
    const auto fid_times = parallel_map(s.gains_db.size(), o.threads, [&](std::size_t i) {
        return fidelity_time(c.system, squeeze_from_dpa_gain(s.gains_db[i], s.phi), s.fidelity);
    });

    Csv csv({"gain_db", "ns", "model", "t_eff_us", "t_eff_se_us", "fit_window_us", "fit_points",
             "fidelity_time_us", "cavity_dim", "dpa_dim", "truncation_ok"});
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& r = results[i];
        const std::size_t gi = i / s.models.size();
        const bool cas = points[i].model == SqueezeSource::Cascaded;
        csv.cell(points[i].gain).cell(r.ns).cell(std::string(cas ? "cascaded" : "broadband"))
            .cell(r.fit.t_eff).cell(r.fit.std_error).cell(r.fit.window).cell(r.fit.n_points)
            .cell(fid_times[gi]).cell(r.spec.dims()[r.spec.slot("cavity")])
            .cell(cas ? r.spec.dims()[r.spec.slot("dpa")] : std::size_t{0})
            .cell(std::string(r.series.truncation_ok ? "true" : "false"));
        csv.end();
    }
    res.outputs.push_back({"", csv.str()});

    if (o.check) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& r = results[i];
            const std::size_t gi = i / s.models.size();
            const std::string tag = (points[i].model == SqueezeSource::Cascaded ? "cascaded " : "broadband ") +
                                    fmt(points[i].gain) + " dB";
            res.checks.push_back(check(tag + " lifetime exceeds fidelity time",
                                       std::isfinite(r.fit.t_eff) && r.fit.t_eff > fid_times[gi],
                                       "T_eff " + fmt(r.fit.t_eff) + " vs " + fmt(fid_times[gi])));
            res.checks.push_back(check(tag + " truncation converged", r.series.truncation_ok, ""));
        }
        if (s.models.size() == 2)
            for (std::size_t gi = 0; gi < s.gains_db.size(); ++gi) {
                const double a = results[2 * gi].fit.t_eff, b = results[2 * gi + 1].fit.t_eff;
                const bool first_bb = s.models[0] == SqueezeSource::Broadband;
                const double bb = first_bb ? a : b, cas = first_bb ? b : a;
                res.checks.push_back(check("cascaded outlives broadband at " + fmt(s.gains_db[gi]) + " dB", cas > bb,
                                           fmt(cas) + " vs " + fmt(bb)));
            }
    }
    return res;
}

CommandResult cmd_histograms(const Config& c, const Options& o) {
    CommandResult res;
    const auto& s = c.histograms;
    RecordOptions ropt;
    ropt.sample_rate = s.sample_rate;
    ropt.p_relax = s.p_relax;
    ropt.threads = o.threads;

    Csv csv({"setting", "state", "bin_lo", "bin_hi", "count", "density"});
    nlohmann::json settings = nlohmann::json::array();
    for (std::size_t i = 0; i < s.settings.size(); ++i) {
        const auto& set = s.settings[i];
        const SqueezeSpec sq = gain_to_squeeze(set.gain_db, set.phi);
        const RecordBatch g = synth_records(c.system, sq, c.rates, QubitState::Ground, s.shots, s.t_int, mix(o.seed, 2 * i), ropt);
        const RecordBatch e = synth_records(c.system, sq, c.rates, QubitState::Excited, s.shots, s.t_int, mix(o.seed, 2 * i + 1), ropt);
        const auto vg = g.final_mean_voltage(), ve = e.final_mean_voltage();
        std::vector<double> all(vg);
        all.insert(all.end(), ve.begin(), ve.end());
        const auto [mn, mx] = std::minmax_element(all.begin(), all.end());
        const Histogram layout = histogram_fd(all, *mn, *mx);
        const Histogram hg = histogram(vg, *mn, *mx, layout.bins());
        const Histogram he = histogram(ve, *mn, *mx, layout.bins());
        for (const auto* h : {&hg, &he})
            for (std::size_t b = 0; b < h->bins(); ++b) {
                csv.cell(set.label).cell(std::string(h == &hg ? "g" : "e")).cell(h->edges[b]).cell(h->edges[b + 1])
                    .cell(h->counts[b]).cell(h->density(b));
                csv.end();
            }
        const FitResult fg = fit_gaussian(hg);
        const FitResult fe = fit_double_gaussian(he, fg.value("mu"));
        const TimeSeries snr_ts = snr_vs_time(g, e);
        settings.push_back({{"label", set.label},
                            {"gain_db", set.gain_db},
                            {"phi_rad", set.phi},
                            {"snr", snr_ts.columns[0].back().real()},
                            {"overlap", gaussian_overlap(fg.value("mu"), fg.value("sigma"), fe.value("mu"), fe.value("sigma"))},
                            {"ground", fit_report(fg)},
                            {"excited", fit_report(fe)}});

        if (o.check && i == 0) {
            const RecordBatch again = synth_records(c.system, sq, c.rates, QubitState::Ground, s.shots, s.t_int, mix(o.seed, 0), ropt);
            res.checks.push_back(check("records reproducible from seed", again.voltage == g.voltage, ""));
        }
        if (o.check) {
            // Ground shots carry no contamination, so their spread is the bare noise model.
            const double v_scale = c.system.a_bar0 * c.system.chi / c.system.kappa;
            const double t = static_cast<double>(g.n_samples()) * g.dt;
            const double expect = v_scale * std::sqrt(record_noise_factor(sq.phi, sq, c.rates) / t);
            const double sd = fg.value("sigma");
            const double tol = 5.0 / std::sqrt(2.0 * static_cast<double>(s.shots)) + 0.02;
            res.checks.push_back(check(set.label + " ground width matches noise model", rel_diff(sd, expect) < tol,
                                       "fit " + fmt(sd) + " model " + fmt(expect)));
        }
    }
    res.outputs.push_back({"", csv.str()});
    res.outputs.push_back({"_fits.json", dump({{"shots", s.shots},
                                               {"t_int_us", s.t_int},
                                               {"p_relax", s.p_relax},
                                               {"seed", o.seed},
                                               {"settings", settings}})});
    return res;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"dephase-sweep", "meas-sweep", "eta",
                                                "snr-curve",     "lifetime",   "histograms"};
    return names;
}

CommandResult run_command(const std::string& name, const Config& c, const Options& o) {
    if (name == "dephase-sweep") return cmd_dephase_sweep(c, o);
    if (name == "meas-sweep") return cmd_meas_sweep(c, o);
    if (name == "eta") return cmd_eta(c, o);
    if (name == "snr-curve") return cmd_snr_curve(c, o);
    if (name == "lifetime") return cmd_lifetime(c, o);
    if (name == "histograms") return cmd_histograms(c, o);
    throw ConfigError("unknown command '" + name + "'");
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    const std::string stem = has_ext ? out.substr(0, dot) : out;
    return stem + suffix;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Stroboscopic squeezed-readout simulation and analysis"};
    app.require_subcommand(1);
    std::string config_path;
    Options opt;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment config (defaults when omitted)");
        sub->add_option("--out", opt.out, "output path (stdout when omitted)");
        sub->add_option("--seed", opt.seed, "RNG seed");
        sub->add_flag("--check", opt.check, "run oracle cross-checks");
        sub->add_option("--threads", opt.threads, "worker threads (0: all cores)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    CommandResult res;
    try {
        const Config cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
        res = run_command(name, cfg, opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }

    for (std::size_t i = 0; i < res.outputs.size(); ++i) {
        const auto& out = res.outputs[i];
        if (opt.out.empty()) {
            if (i) std::cout << "\n# " << out.suffix << '\n';
            std::cout << out.content;
            continue;
        }
        const std::string path = i == 0 ? opt.out : sibling_path(opt.out, out.suffix);
        std::ofstream f(path, std::ios::binary);
        f << out.content;
        if (!f) {
            std::cerr << "cannot write " << path << '\n';
            return 1;
        }
    }
    for (const auto& ch : res.checks)
        std::cerr << "check " << (ch.pass ? "pass" : "FAIL") << ": " << ch.name
                  << (ch.detail.empty() ? "" : " (" + ch.detail + ")") << '\n';
    return res.checks_pass() ? 0 : 3;
}

}  // namespace strobo::cli
