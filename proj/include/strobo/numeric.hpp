#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace strobo {

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
/// Stops when the bracket is narrower than xtol. Throws NumericalError otherwise.
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-12,
              int max_iter = 2000);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double rss = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = a + b x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Ordinary least squares y = b x.
LineFit fit_line_through_origin(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v);

}  // namespace strobo
