#include "strobo/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "strobo/errors.hpp"

namespace strobo {

double FitResult::value(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("FitResult: unknown parameter " + name);
    return values(it - names.begin());
}

double FitResult::error(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("FitResult: unknown parameter " + name);
    return std_errors(it - names.begin());
}

namespace {

Eigen::MatrixXd jacobian(const ResidualFn& f, const Eigen::VectorXd& x, Eigen::Index m) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd J(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

}  // namespace

FitResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                              std::vector<std::string> names, const LevMarOptions& opt) {
    const Eigen::Index n = x0.size();
    if (static_cast<Eigen::Index>(names.size()) != n) {
        throw std::invalid_argument("levenberg_marquardt: one name per parameter required");
    }
    const bool bounded = opt.lower.size() == n && opt.upper.size() == n;
    auto project = [&](Eigen::VectorXd x) {
        if (bounded) x = x.cwiseMax(opt.lower).cwiseMin(opt.upper);
        return x;
    };

    Eigen::VectorXd x = project(std::move(x0));
    Eigen::VectorXd r = residuals(x);
    const Eigen::Index m = r.size();
    if (m < n) throw std::invalid_argument("levenberg_marquardt: fewer residuals than parameters");
    if (!r.allFinite()) throw NumericalError("levenberg_marquardt: non-finite residuals at start");
    double rss = r.squaredNorm();
    double lambda = opt.initial_damping;

    FitResult out;
    out.names = std::move(names);
    Eigen::MatrixXd J = jacobian(residuals, x, m);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        Eigen::VectorXd g = J.transpose() * r;
        if (bounded) {
            // gradient components pushing into an active bound do not count
            for (Eigen::Index j = 0; j < n; ++j) {
                if ((x(j) <= opt.lower(j) && g(j) > 0.0) || (x(j) >= opt.upper(j) && g(j) < 0.0)) g(j) = 0.0;
            }
        }
        if (g.cwiseAbs().maxCoeff() <= opt.gradient_tol * std::max(1.0, rss)) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = J.transpose() * J;
        bool improved = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-(J.transpose() * r));
            const Eigen::VectorXd xn = project(x + step);
            const Eigen::VectorXd rn = residuals(xn);
            const double rss_n = rn.allFinite() ? rn.squaredNorm() : std::numeric_limits<double>::infinity();
            if (rss_n < rss) {
                const bool tiny = (xn - x).norm() <= 1e-15 * (1.0 + x.norm());
                x = xn;
                r = rn;
                rss = rss_n;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = !tiny;
                break;
            }
            lambda *= 10.0;
        }
        J = jacobian(residuals, x, m);
        if (!improved) {
            // no downhill step left; accept only if the gradient test holds here
            Eigen::VectorXd gf = J.transpose() * r;
            out.converged = gf.cwiseAbs().maxCoeff() <= opt.gradient_tol * std::max(1.0, rss);
            break;
        }
    }

    out.values = x;
    out.iterations = it;
    out.residual_norm = std::sqrt(rss);
    out.gradient_norm = (J.transpose() * r).cwiseAbs().maxCoeff();
    const double dof = static_cast<double>(std::max<Eigen::Index>(1, m - n));
    out.covariance = (rss / dof) * (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
    out.std_errors.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const bool at_bound = bounded && (x(j) <= opt.lower(j) || x(j) >= opt.upper(j));
        out.std_errors(j) = at_bound ? 0.0 : std::sqrt(std::max(0.0, out.covariance(j, j)));
    }
    return out;
}

}  // namespace strobo
