#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace strobo {

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::VectorXd std_errors;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;  // sqrt of the residual sum of squares
    double gradient_norm = 0.0;  // max |J^T r| at the solution
    int iterations = 0;
    bool converged = false;      // set only when the gradient test passed

    double value(const std::string& name) const;
    double error(const std::string& name) const;
};

struct LevMarOptions {
    /// Converged when max|J^T r| <= gradient_tol * max(1, RSS).
    double gradient_tol = 1e-10;
    int max_iterations = 500;
    double initial_damping = 1e-3;
    /// Optional box constraints; the step is projected onto them.
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Damped Gauss-Newton (Levenberg) with a central-difference Jacobian.
/// Covariance s^2 (J^T J)^{-1} with s^2 = RSS/(m - n); parameters at an
/// active bound report a zero error.
FitResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                              std::vector<std::string> names, const LevMarOptions& opt = {});

}  // namespace strobo
