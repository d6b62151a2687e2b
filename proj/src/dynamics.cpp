#include "strobo/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCore>

#include "strobo/errors.hpp"
#include "strobo/numeric.hpp"
#include "strobo/ode.hpp"

namespace strobo {

namespace {

using namespace std::complex_literals;
using Sparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

Sparse to_sparse(const Matrix& m) {
    std::vector<Eigen::Triplet<Complex>> trip;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (m(i, j) != 0.0) trip.emplace_back(i, j, m(i, j));
        }
    }
    Sparse s(m.rows(), m.cols());
    s.setFromTriplets(trip.begin(), trip.end());
    s.makeCompressed();
    return s;
}

// Tr(op rho) for sparse op.
Complex sparse_expect(const Sparse& op, const Matrix& rho) {
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < op.outerSize(); ++j) {
        for (Sparse::InnerIterator it(op, j); it; ++it) {
            acc += it.value() * rho(it.col(), it.row());
        }
    }
    return acc;
}

// Matrix-free Lindblad right-hand side. With G = -iH - (1/2) sum L^dag L,
// d rho/dt = G rho + (G rho)^dag + sum L rho L^dag.
// G(t) shares one sparsity pattern across all terms; only values change in time.
class LindbladRhs {
public:
    LindbladRhs(const TimeDependentHamiltonian& h, const std::vector<Operator>& collapse) {
        const auto n = static_cast<Eigen::Index>(h.spec().total_dim());
        Matrix static_part = Matrix::Zero(n, n);
        std::vector<std::pair<Envelope, const Matrix*>> dynamic;
        for (const auto& term : h.terms()) {
            if (term.envelope.is_static()) {
                static_part += (-1i * term.envelope(0.0)) * term.op.matrix();
            } else {
                dynamic.emplace_back(term.envelope, &term.op.matrix());
            }
        }
        for (const auto& L : collapse) {
            if (!L.spec().compatible(h.spec())) {
                throw std::invalid_argument("evolve: collapse operator on a different space");
            }
            static_part -= 0.5 * (L.matrix().adjoint() * L.matrix());
            collapse_.push_back(to_sparse(L.matrix()));
        }

        std::vector<Eigen::Triplet<Complex>> trip;
        auto mark = [&](const Matrix& m) {
            for (Eigen::Index j = 0; j < n; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (m(i, j) != 0.0) trip.emplace_back(i, j, 1.0);
                }
            }
        };
        mark(static_part);
        for (const auto& [env, m] : dynamic) mark(*m);
        g_.resize(n, n);
        g_.setFromTriplets(trip.begin(), trip.end());
        g_.makeCompressed();

        auto values_of = [&](const Matrix& m, Complex scale) {
            std::vector<Complex> v;
            v.reserve(static_cast<std::size_t>(g_.nonZeros()));
            for (Eigen::Index j = 0; j < g_.outerSize(); ++j) {
                for (Sparse::InnerIterator it(g_, j); it; ++it) {
                    v.push_back(scale * m(it.row(), it.col()));
                }
            }
            return v;
        };
        static_values_ = values_of(static_part, 1.0);
        for (const auto& [env, m] : dynamic) {
            dynamic_.push_back({env, values_of(*m, -1i)});
        }
        set_time(0.0);
    }

    void operator()(double t, const Matrix& rho, Matrix& out) {
        set_time(t);
        k_.noalias() = g_ * rho;
        out = k_ + k_.adjoint();
        for (const auto& L : collapse_) {
            x_.noalias() = L * rho;
            xa_ = x_.adjoint();
            out.noalias() += L * xa_;
        }
    }

private:
    struct DynamicTerm {
        Envelope envelope;
        std::vector<Complex> values;
    };

    void set_time(double t) {
        if (dynamic_.empty() && time_set_) return;
        Complex* v = g_.valuePtr();
        const std::size_t nnz = static_values_.size();
        std::copy(static_values_.begin(), static_values_.end(), v);
        for (const auto& term : dynamic_) {
            const Complex c = term.envelope(t);
            for (std::size_t k = 0; k < nnz; ++k) v[k] += c * term.values[k];
        }
        time_set_ = true;
    }

    Sparse g_;
    std::vector<Complex> static_values_;
    std::vector<DynamicTerm> dynamic_;
    std::vector<Sparse> collapse_;
    Matrix k_, x_, xa_;
    bool time_set_ = false;
};

// Flat indices at the two highest levels of each bosonic slot. Squeezed states
// occupy even levels only, so checking one level would miss half of them.
std::vector<std::vector<Eigen::Index>> top_level_indices(const HilbertSpec& spec) {
    std::vector<std::vector<Eigen::Index>> out;
    const auto dims = spec.dims();
    const std::size_t total = spec.total_dim();
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (!spec[s].bosonic) continue;
        std::size_t inner = 1;
        for (std::size_t i = s + 1; i < dims.size(); ++i) inner *= dims[i];
        std::vector<Eigen::Index> idx;
        for (std::size_t k = 0; k < total; ++k) {
            const std::size_t level = (k / inner) % dims[s];
            if (level + 2 >= dims[s]) idx.push_back(static_cast<Eigen::Index>(k));
        }
        out.push_back(std::move(idx));
    }
    return out;
}

class Propagator {
public:
    Propagator(const TimeDependentHamiltonian& h, const std::vector<Operator>& collapse,
               const std::vector<NamedOperator>& observables)
        : rhs_(h, collapse), top_(top_level_indices(h.spec())) {
        for (const auto& o : observables) {
            if (!o.op.spec().compatible(h.spec())) {
                throw std::invalid_argument("evolve: observable '" + o.name +
                                            "' on a different space");
            }
            names_.push_back(o.name);
            obs_.push_back(to_sparse(o.op.matrix()));
        }
        top_max_.assign(top_.size(), 0.0);
    }

    std::vector<Complex> measure(const Matrix& rho) const {
        std::vector<Complex> v;
        v.reserve(obs_.size());
        for (const auto& o : obs_) v.push_back(sparse_expect(o, rho));
        return v;
    }

    void track_truncation(const Matrix& rho) {
        for (std::size_t s = 0; s < top_.size(); ++s) {
            // combined population of the two highest levels
            double pop = 0.0;
            for (Eigen::Index k : top_[s]) pop += rho(k, k).real();
            top_max_[s] = std::max(top_max_[s], pop);
        }
    }

    template <class Observe>
    OdeStats run(Matrix& rho, const std::vector<double>& grid, const OdeOptions& opt,
                 Observe&& observe) {
        track_truncation(rho);
        return integrate_dopri5(
            rhs_, rho, grid, opt,
            [this](Matrix& y) {
                y = (0.5 * (y + y.adjoint())).eval();
                track_truncation(y);
                return false;
            },
            std::forward<Observe>(observe));
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& top_max() const { return top_max_; }
    double worst_top() const {
        return top_max_.empty() ? 0.0 : *std::max_element(top_max_.begin(), top_max_.end());
    }

private:
    LindbladRhs rhs_;
    std::vector<std::vector<Eigen::Index>> top_;
    std::vector<double> top_max_;
    std::vector<std::string> names_;
    std::vector<Sparse> obs_;
};

double step_cap(const TimeDependentHamiltonian& h, double requested, double span) {
    const double w = h.max_angular_frequency();
    double cap = w > 0.0 ? 2.0 * std::numbers::pi / (10.0 * w)
                         : std::numeric_limits<double>::infinity();
    if (h.has_custom_envelopes()) cap = std::min(cap, span / 200.0);
    return requested > 0.0 ? std::min(requested, cap) : cap;
}

std::string describe_top(const HilbertSpec& spec, const std::vector<double>& top) {
    std::ostringstream os;
    std::size_t k = 0;
    for (std::size_t s = 0; s < spec.size(); ++s) {
        if (!spec[s].bosonic) continue;
        os << (k ? ", " : "") << spec[s].name << "(dim " << spec[s].dim << ") " << top[k];
        ++k;
    }
    return os.str();
}

// New truncation for a mode whose two top levels held `top` > thr. The tail is
// taken as geometric with the ratio seen between pairs of levels below the top
// (pairs, since squeezed states favor even levels).
std::size_t grown_dim(const std::vector<double>& pops, double top, double thr, std::size_t min_step) {
    const std::size_t n = pops.size();
    std::size_t extra = min_step;
    if (n >= 6) {
        const double hi = pops[n - 4] + pops[n - 3], lo = pops[n - 6] + pops[n - 5];
        if (hi > 0.0 && lo > hi) {
            const double q = std::clamp(std::sqrt(hi / lo), 0.05, 0.95);
            // margin 3 on the threshold for growth beyond the probed state
            const auto need = static_cast<std::size_t>(std::ceil(std::log(3.0 * top / thr) / -std::log(q)));
            extra = std::max(extra, need);
        }
    }
    return n + extra;
}

}  // namespace

std::vector<double> EvolutionConfig::grid() const {
    if (n_samples < 2 || !(t_end > t_start)) {
        throw std::invalid_argument("EvolutionConfig: need t_end > t_start and >= 2 samples");
    }
    std::vector<double> g(n_samples);
    const double dt = (t_end - t_start) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) g[i] = t_start + dt * static_cast<double>(i);
    g.back() = t_end;
    return g;
}

EvolutionResult evolve(const DensityMatrix& rho0, const TimeDependentHamiltonian& h,
                       const std::vector<Operator>& collapse, const EvolutionConfig& cfg) {
    if (!rho0.spec().compatible(h.spec())) {
        throw std::invalid_argument("evolve: initial state and Hamiltonian spaces differ");
    }
    Propagator prop(h, collapse, cfg.observables);
    const std::vector<double> grid = cfg.grid();

    TimeSeries ts;
    for (const auto& name : prop.names()) ts.add_column(name);

    OdeOptions opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;
    opt.max_step = step_cap(h, cfg.max_step, cfg.t_end - cfg.t_start);

    Matrix rho = rho0.matrix();
    const OdeStats stats = prop.run(rho, grid, opt, [&](double t, const Matrix& y) {
        ts.times.push_back(t);
        const auto v = prop.measure(y);
        for (std::size_t j = 0; j < v.size(); ++j) ts.columns[j].push_back(v[j]);
        if (cfg.stop_on_truncation && prop.worst_top() > cfg.truncation_threshold) return false;
        return !(cfg.stop && cfg.stop(t, ts));
    });

    EvolutionResult res{std::move(ts), DensityMatrix::trusted(rho, rho0.spec()), stats.accepted,
                        stats.rejected, h.warnings()};
    res.series.max_top_population = prop.top_max();
    if (prop.worst_top() > cfg.truncation_threshold) {
        res.series.truncation_ok = false;
        const std::string msg = "truncation: top-level population exceeded " +
                                std::to_string(cfg.truncation_threshold) + ": " +
                                describe_top(h.spec(), prop.top_max());
        if (cfg.truncation_is_error) throw TruncationError(msg);
        res.warnings.push_back(msg);
    }
    const double trace_err = std::abs(rho.trace() - 1.0);
    if (trace_err > 1e-7) {
        res.warnings.push_back("trace drifted by " + std::to_string(trace_err));
    }
    return res;
}

SteadyStateResult evolve_to_steady(const DensityMatrix& rho0, const TimeDependentHamiltonian& h,
                                   const std::vector<Operator>& collapse,
                                   const SteadyStateConfig& cfg) {
    if (!(cfg.chunk > 0.0) || !(cfg.t_max > 0.0)) {
        throw std::invalid_argument("evolve_to_steady: chunk and t_max must be positive");
    }
    Propagator prop(h, collapse, cfg.observables);
    OdeOptions opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;
    opt.max_step = step_cap(h, 0.0, cfg.chunk);

    Matrix rho = rho0.matrix();
    std::vector<Complex> last = prop.measure(rho);
    double t = 0.0;
    bool converged = false;
    while (t < cfg.t_max && !converged) {
        const double t_next = std::min(t + cfg.chunk, cfg.t_max);
        prop.run(rho, {t, t_next}, opt, [](double, const Matrix&) { return true; });
        opt.initial_step = 0.0;
        const std::vector<Complex> now = prop.measure(rho);
        double change = 0.0;
        for (std::size_t j = 0; j < now.size(); ++j) change = std::max(change, std::abs(now[j] - last[j]));
        converged = !now.empty() && change < cfg.tolerance;
        last = now;
        t = t_next;
        if (cfg.stop_on_truncation && prop.worst_top() > cfg.truncation_threshold) break;
    }
    SteadyStateResult res{DensityMatrix::trusted(rho, rho0.spec()), last, t, converged,
                          prop.worst_top(), prop.top_max()};
    return res;
}

std::vector<Operator> broadband_squeezed_dissipators(double ns, double phi, double kappa,
                                                     const HilbertSpec& spec,
                                                     const ModeFrame& cavity) {
    if (ns < 0.0) {
        throw std::domain_error("broadband_squeezed_dissipators: Ns must be >= 0");
    }
    const Operator d =
        embed(frame_annihilation(spec[spec.slot("cavity")].dim, cavity), "cavity", spec);
    const Operator L = std::sqrt(kappa) * (std::sqrt(ns + 1.0) * d -
                                           std::exp(2i * phi) * std::sqrt(ns) * d.adjoint());
    return {L};
}

std::vector<Operator> cascaded_dissipators(const SystemParams& p, const HilbertSpec& spec,
                                           const ModeFrame& cavity, const ModeFrame& dpa) {
    const Operator d =
        embed(frame_annihilation(spec[spec.slot("cavity")].dim, cavity), "cavity", spec);
    const Operator b = embed(frame_annihilation(spec[spec.slot("dpa")].dim, dpa), "dpa", spec);
    return {std::sqrt(p.kappa_sqz) * b + std::sqrt(p.kappa) * d};
}

double cascaded_photon_number(double lambda, double kappa_sqz, double kappa) {
    const double a = 0.25 * kappa_sqz * kappa_sqz - 4.0 * lambda * lambda;
    if (a <= 0.0) {
        throw std::domain_error("cascaded_photon_number: drive at or above threshold");
    }
    return 2.0 * kappa_sqz * lambda * lambda * (2.0 * kappa_sqz + kappa) /
           (a * (a + 0.5 * kappa_sqz * kappa + 0.25 * kappa * kappa));
}

double dpa_drive_for_target(double ns_target, const SystemParams& p) {
    if (!(ns_target >= 0.0) || !std::isfinite(ns_target)) {
        throw std::domain_error("dpa_drive_for_target: target must be finite and >= 0");
    }
    if (ns_target == 0.0) return 0.0;
    const double threshold = p.kappa_sqz / 4.0;
    const double hi = threshold * (1.0 - 1e-15);
    if (cascaded_photon_number(hi, p.kappa_sqz, p.kappa) < ns_target) {
        throw std::domain_error("dpa_drive_for_target: target unreachable below threshold");
    }
    return bisect([&](double l) { return cascaded_photon_number(l, p.kappa_sqz, p.kappa) - ns_target; },
                  0.0, hi, 1e-12 * threshold);
}

double ns_from_dpa_gain(double gain_db) {
    if (gain_db < 0.0) throw std::domain_error("ns_from_dpa_gain: gain must be >= 0 dB");
    const double r = 0.5 * std::log(std::pow(10.0, gain_db / 10.0));
    const double s = std::sinh(r);
    return s * s;
}

SqueezeSpec squeeze_from_dpa_gain(double gain_db, double phi) {
    if (gain_db < 0.0) throw std::domain_error("squeeze_from_dpa_gain: gain must be >= 0 dB");
    return SqueezeSpec::from_r(0.5 * std::log(std::pow(10.0, gain_db / 10.0)), phi);
}

LifetimeFit effective_lifetime(const TimeSeries& ts, double window, const std::string& column) {
    const std::vector<double> sz = ts.real(column);
    double end = window;
    if (end <= 0.0) {
        end = ts.times.back();
        for (std::size_t i = 0; i < sz.size(); ++i) {
            if (sz[i] <= 0.8) {
                end = ts.times[i];
                break;
            }
        }
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < sz.size() && ts.times[i] <= end; ++i) {
        if (ts.times[i] <= 0.0) continue;  // log(1) = 0 at the origin carries no information
        if (!(sz[i] > 0.0)) {
            throw NumericalError("effective_lifetime: non-positive <sigma_z> inside the window");
        }
        x.push_back(ts.times[i]);
        y.push_back(std::log(sz[i]));
    }
    if (x.size() < 2) {
        throw NumericalError("effective_lifetime: fewer than two samples in the window");
    }
    const LineFit f = fit_line_through_origin(x, y);
    if (!(f.slope < 0.0)) {
        throw NumericalError("effective_lifetime: <sigma_z> does not decay in the window");
    }
    LifetimeFit out;
    out.t_eff = -2.0 / f.slope;
    out.std_error = 2.0 * f.slope_se / (f.slope * f.slope);
    out.window = end;
    out.n_points = x.size();
    out.rms_residual = std::sqrt(f.rss / static_cast<double>(x.size()));
    return out;
}

std::size_t squeezed_vacuum_dim(double ns, double tol) {
    if (ns < 0.0) throw std::domain_error("squeezed_vacuum_dim: Ns must be >= 0");
    if (ns == 0.0) return 2;
    // P(2n) = (2n)!/(2^n n!)^2 tanh^{2n} r / cosh r, tanh^2 r = Ns/(Ns+1)
    const double t2 = ns / (ns + 1.0);
    double p = 1.0 / std::sqrt(ns + 1.0);
    std::size_t n = 0;
    while (p >= tol) {
        p *= t2 * (2.0 * static_cast<double>(n) + 1.0) / (2.0 * static_cast<double>(n) + 2.0);
        ++n;
        if (n > 2000) throw NumericalError("squeezed_vacuum_dim: Ns too large");
    }
    return 2 * n + 2;  // top two levels (2n, 2n+1) then sit below tol
}

DecayResult simulate_sigma_z_decay(const SystemParams& p, SqueezeSource source, double ns,
                                   double phi, const DecayConfig& cfg) {
    if (ns < 0.0) throw std::domain_error("simulate_sigma_z_decay: Ns must be >= 0");
    DecayResult out;
    out.ns = ns;
    if (source == SqueezeSource::Cascaded) out.lambda = dpa_drive_for_target(ns, p);
    if (cfg.squeezed_frame && ns > 0.0) {
        if (source == SqueezeSource::Broadband) {
            // the squeezed reservoir relaxes the cavity to a pure squeezed vacuum
            out.cavity_frame = frame_for_moments(ns, std::sqrt(ns * (ns + 1.0)) * std::exp(2i * phi));
        } else {
            const CascadeMoments mo = cascade_moments(p, out.lambda, phi);
            out.cavity_frame = frame_for_moments(mo.n_cavity, mo.m_cavity);
            out.dpa_frame = frame_for_moments(mo.n_dpa, mo.m_dpa);
        }
    }
    std::size_t nc = cfg.squeezed_frame ? cfg.cavity_dim
                                        : std::max(cfg.cavity_dim, squeezed_vacuum_dim(ns, 0.5e-6));
    std::size_t nb = cfg.dpa_dim;

    for (int attempt = 0;; ++attempt) {
        const HilbertSpec spec = source == SqueezeSource::Broadband
                                     ? HilbertSpec::qubit_cavity(nc)
                                     : HilbertSpec::qubit_cavity_dpa(nc, nb);
        const TimeDependentHamiltonian h =
            source == SqueezeSource::Broadband
                ? h_rabi_frame(p, spec, cfg.terms, out.cavity_frame)
                : h_cascaded(p, spec, out.lambda, phi, cfg.terms, out.cavity_frame, out.dpa_frame);
        const std::vector<Operator> ls =
            source == SqueezeSource::Broadband
                ? broadband_squeezed_dissipators(ns, phi, p.kappa, spec, out.cavity_frame)
                : cascaded_dissipators(p, spec, out.cavity_frame, out.dpa_frame);
        EvolutionConfig ec;
        ec.t_end = cfg.t_max;
        ec.n_samples = static_cast<std::size_t>(std::llround(cfg.t_max / cfg.sample_dt)) + 1;
        ec.rtol = cfg.rtol;
        ec.atol = cfg.atol;
        // the first pass runs to the end at the starting dims (cheap) and sizes the
        // next one from the tail it develops; later passes stop at the first violation
        ec.stop_on_truncation = attempt > 0 && attempt < cfg.max_raises;
        const Operator d = embed(frame_annihilation(nc, out.cavity_frame), "cavity", spec);
        ec.observables = {{"sigma_z", embed(pauli(Pauli::Z), "qubit", spec)},
                          {"n_cavity", d.adjoint() * d}};
        const double stop_below = cfg.stop_below;
        ec.stop = [stop_below](double, const TimeSeries& ts) {
            return ts.columns[0].back().real() < stop_below;
        };
        const DensityMatrix rho0 =
            DensityMatrix::basis(std::vector<std::size_t>(spec.size(), 0), spec);
        EvolutionResult res = evolve(rho0, h, ls, ec);

        out.spec = spec;
        out.raises = attempt;
        out.series = std::move(res.series);
        if (out.series.truncation_ok || attempt >= cfg.max_raises) break;
        const auto& top = out.series.max_top_population;
        const double thr = ec.truncation_threshold;
        // a stopped pass saw the tail only up to the violation, so grow by at least a quarter
        auto min_step = [&](std::size_t n) { return attempt == 0 ? std::size_t{2} : std::max<std::size_t>(4, n / 4); };
        if (top[0] > thr)
            nc = grown_dim(res.final_state.populations(spec.slot("cavity")), top[0], thr, min_step(nc));
        if (top.size() > 1 && top[1] > thr)
            nb = grown_dim(res.final_state.populations(spec.slot("dpa")), top[1], thr, min_step(nb));
    }
    out.fit = effective_lifetime(out.series);
    return out;
}

ModeFrame frame_for_moments(double n, Complex m) {
    if (n < 0.0 || std::abs(m) * std::abs(m) > n * (n + 1.0) * (1.0 + 1e-9) + 1e-15) {
        throw std::domain_error("frame_for_moments: moments violate |m|^2 <= n(n+1)");
    }
    // (2 n_th + 1) cosh 2r = 2n + 1 and (2 n_th + 1) sinh 2r = 2|m|
    const double t = 2.0 * std::abs(m) / (2.0 * n + 1.0);
    ModeFrame f;
    f.r = t > 0.0 ? 0.5 * std::atanh(std::min(t, 1.0 - 1e-12)) : 0.0;
    f.theta = std::arg(m);
    return f;
}

CascadeMoments cascade_moments(const SystemParams& p, double lambda, double phi) {
    // v = (b, b^dag, d, d^dag) obeys dv/dt = A v + vacuum noise, so C_ij = <v_i v_j>
    // solves A C + C A^T = -D with D_ij = [L^dag, v_i][v_j, L].
    const double ks = p.kappa_sqz, k = p.kappa, c = std::sqrt(ks * k);
    const Complex drive = 2.0 * lambda * std::exp(Complex(0.0, 2.0 * phi));
    Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
    a(0, 0) = a(1, 1) = -0.5 * ks;
    a(0, 1) = drive;
    a(1, 0) = std::conj(drive);
    a(2, 2) = a(3, 3) = -0.5 * k;
    a(2, 0) = a(3, 1) = -c;
    Eigen::Matrix4cd d = Eigen::Matrix4cd::Zero();
    d(0, 1) = ks;
    d(0, 3) = d(2, 1) = c;
    d(2, 3) = k;
    Eigen::Matrix<Complex, 16, 16> sys;
    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sys.block<4, 4>(4 * i, 4 * j) = id(i, j) * a + a(i, j) * id;
    const Eigen::Matrix<Complex, 16, 1> rhs = -Eigen::Map<const Eigen::Matrix<Complex, 16, 1>>(d.data());
    const Eigen::Matrix<Complex, 16, 1> x = sys.partialPivLu().solve(rhs);
    const Eigen::Map<const Eigen::Matrix4cd> cm(x.data());
    return {cm(1, 0).real(), cm(0, 0), cm(3, 2).real(), cm(2, 2), cm(0, 2)};
}

CascadedSteadyResult cascaded_steady_photons(const SystemParams& p, double ns_target,
                                             std::size_t cavity_dim, std::size_t dpa_dim,
                                             int max_raises, bool squeezed_frame) {
    CascadedSteadyResult out;
    out.target = ns_target;
    out.lambda = dpa_drive_for_target(ns_target, p);

    if (squeezed_frame) {
        const CascadeMoments mo = cascade_moments(p, out.lambda, 0.0);
        out.cavity_frame = frame_for_moments(mo.n_cavity, mo.m_cavity);
        out.dpa_frame = frame_for_moments(mo.n_dpa, mo.m_dpa);
    }
    // In the Fock frame the cavity state is close to a squeezed vacuum of the same photon number.
    const std::size_t nc0 =
        squeezed_frame ? cavity_dim : std::max(cavity_dim, squeezed_vacuum_dim(ns_target, 0.5e-6));
    HilbertSpec spec = HilbertSpec::cavity_dpa(nc0, dpa_dim);
    DensityMatrix rho = DensityMatrix::basis({0, 0}, spec);
    for (int attempt = 0;; ++attempt) {
        // measurement drive off: the Rabi-frame terms vanish and only the source remains
        TimeDependentHamiltonian h(spec);
        const Operator b = embed(frame_annihilation(spec[1].dim, out.dpa_frame), 1, spec);
        const Operator d = embed(frame_annihilation(spec[0].dim, out.cavity_frame), 0, spec);
        h.add_with_conjugate(b.adjoint() * b.adjoint(), Envelope::constant(1i * out.lambda));
        h.add_with_conjugate(d * b.adjoint(),
                             Envelope::constant(0.5i * std::sqrt(p.kappa_sqz * p.kappa)));
        const std::vector<Operator> ls = {std::sqrt(p.kappa_sqz) * b + std::sqrt(p.kappa) * d};

        SteadyStateConfig sc;
        sc.observables = {{"n_cavity", d.adjoint() * d}};
        sc.chunk = 1.0 / p.kappa;
        sc.t_max = 60.0 / p.kappa;
        // a 2% photon-number target does not need the default 1e-9 stepping
        sc.rtol = 1e-7;
        sc.atol = 1e-9;
        sc.tolerance = 1e-6 * std::max(1.0, ns_target);
        sc.stop_on_truncation = attempt < max_raises;
        const SteadyStateResult st = evolve_to_steady(rho, h, ls, sc);

        out.photon_number = st.values[0].real();
        out.converged = st.converged;
        out.spec = spec;
        out.raises = attempt;
        const bool cav_ok = st.top_populations[0] < sc.truncation_threshold;
        const bool dpa_ok = st.top_populations[1] < sc.truncation_threshold;
        out.truncation_ok = cav_ok && dpa_ok;
        if (out.truncation_ok || attempt >= max_raises) break;

        std::size_t nc = spec[0].dim, nb = spec[1].dim;
        if (!cav_ok) nc += std::max<std::size_t>(4, nc / 4);
        if (!dpa_ok) nb += std::max<std::size_t>(2, nb / 4);
        const HilbertSpec larger = HilbertSpec::cavity_dpa(nc, nb);
        rho = st.state.padded(larger);  // warm start from the smaller truncation
        spec = larger;
    }
    return out;
}

}  // namespace strobo
