#pragma once

// Independent reference computations used only by the tests. None of these
// call the library routine they are compared against.

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "strobo/operators.hpp"
#include "strobo/params.hpp"

namespace oracle {

using Complex = std::complex<double>;

/// Mean cavity field from the Green's-function integral of the noise-free
/// Langevin equation,
///   d(t) = int_{-inf}^t exp(-k(t-s)/2 - i b sz (sin W t - sin W s)) (-i chi a0 sz (1 + cos 2Ws)) ds,
/// by adaptive Gauss-Kronrod over one Rabi period at a time.
inline Complex mean_cavity_field(double t, const strobo::SystemParams& p, int sz) {
    const double bz = p.chi / p.omega_r * sz;
    auto integrand = [&](double s, bool imag) {
        const Complex v = std::exp(Complex(-p.kappa * (t - s) / 2, -bz * (std::sin(p.omega_r * t) - std::sin(p.omega_r * s)))) *
                          Complex(0.0, -p.chi * p.a_bar0 * sz * (1.0 + std::cos(2.0 * p.omega_r * s)));
        return imag ? v.imag() : v.real();
    };
    const double period = 2.0 * M_PI / p.omega_r;
    const double span = 60.0 / p.kappa;
    Complex total = 0.0;
    for (double hi = t; hi > t - span; hi -= period) {
        const double lo = hi - period;
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        total += Complex(GK::integrate([&](double s) { return integrand(s, false); }, lo, hi, 10, 1e-14),
                         GK::integrate([&](double s) { return integrand(s, true); }, lo, hi, 10, 1e-14));
    }
    return total;
}

/// Integrated homodyne noise for squeezing (r, theta) and classical sz, from the
/// exact Gaussian kernel of the steady linear response (trapezoid on a fine grid):
///   h(t1) = 1_[0,tau](t1) - k e^{k t1/2}/ph(t1) int_{max(t1,0)}^tau e^{-k t/2} ph(t) dt,
///   noise = k int |h|^2 cosh 2r - Re(h^2 e^{2 i theta}) sinh 2r dt1.
inline double exact_noise(double tau, const strobo::SystemParams& p, double r, double theta, int sz,
                          std::size_t n = 400000) {
    const double k = p.kappa;
    const double bz = p.chi / p.omega_r * sz;
    const double t0 = 40.0 / k;
    std::vector<double> t(n);
    const double dt = (tau + t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = -t0 + dt * static_cast<double>(i);
    std::vector<Complex> ph(n), g(n), cum(n);
    for (std::size_t i = 0; i < n; ++i) {
        ph[i] = std::exp(Complex(0.0, -bz * std::sin(p.omega_r * t[i])));
        g[i] = t[i] >= 0.0 ? std::exp(-k * t[i] / 2) * ph[i] : Complex(0.0);
    }
    cum[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * (g[i] + g[i - 1]) * dt;
    std::size_t first = 0;
    while (t[first] < 0.0) ++first;
    double acc = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex from = cum[n - 1] - (t[i] >= 0.0 ? cum[i] : cum[first]);
        const Complex h = (t[i] >= 0.0 ? 1.0 : 0.0) - k * std::exp(k * t[i] / 2) / ph[i] * from;
        const double f = k * (std::norm(h) * std::cosh(2 * r) - std::real(h * h * std::exp(Complex(0, 2 * theta))) * std::sinh(2 * r));
        if (i) acc += 0.5 * (f + prev) * dt;
        prev = f;
    }
    return acc;
}

/// Column-stacked Lindblad superoperator: vec(A X B) = (B^T kron A) vec(X).
inline Eigen::MatrixXcd superoperator(const Eigen::MatrixXcd& h, const std::vector<Eigen::MatrixXcd>& ls) {
    const auto n = h.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    auto kr = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    };
    const Complex mi(0.0, -1.0);
    Eigen::MatrixXcd s = mi * (kr(id, h) - kr(h.transpose(), id));
    for (const auto& l : ls) {
        const Eigen::MatrixXcd ldl = l.adjoint() * l;
        s += kr(l.conjugate(), l) - 0.5 * kr(id, ldl) - 0.5 * kr(ldl.transpose(), id);
    }
    return s;
}

/// rho(t) = unvec(exp(S t) vec(rho0)) for a static generator.
inline Eigen::MatrixXcd propagate(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& rho0, double t) {
    const auto n = rho0.rows();
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), n * n);
    const Eigen::MatrixXcd e = (s * t).exp();
    Eigen::VectorXcd out = e * v;
    return Eigen::Map<Eigen::MatrixXcd>(out.data(), n, n);
}

/// Maximizer of f on [lo, hi] by Brent's method.
template <class F>
double brent_argmax(F f, double lo, double hi) {
    auto neg = [&](double x) { return -f(x); };
    return boost::math::tools::brent_find_minima(neg, lo, hi, 50).first;
}

}  // namespace oracle
