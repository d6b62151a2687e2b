#include "strobo/numeric.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "strobo/errors.hpp"

namespace strobo {

double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              int max_iter) {
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw NumericalError("bisect: no sign change on the bracket");
    }
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

void check_xy(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_n) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("line fit: x and y differ in length");
    }
    if (x.size() < min_n) {
        throw std::invalid_argument("line fit: too few points");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw NumericalError("line fit: non-finite input");
        }
    }
}

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    check_xy(x, y, 3);
    const std::size_t n = x.size();
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw NumericalError("fit_line: degenerate abscissa");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        f.rss += r * r;
    }
    const double s2 = f.rss / static_cast<double>(n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
    return f;
}

LineFit fit_line_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    check_xy(x, y, 2);
    const std::size_t n = x.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (sxx == 0.0) throw NumericalError("fit_line_through_origin: degenerate abscissa");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.slope * x[i];
        f.rss += r * r;
    }
    f.slope_se = std::sqrt(f.rss / static_cast<double>(n - 1) / sxx);
    return f;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("stddev: need at least two values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace strobo
