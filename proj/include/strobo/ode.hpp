#pragma once

// Adaptive Dormand-Prince 5(4) stepper for Eigen dense states.
//
// The integrator lands exactly on every requested sample time, so no dense
// output is needed. The observer returns false to stop early.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "strobo/errors.hpp"

namespace strobo {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: pick from the first derivative
    std::size_t max_steps = 50'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_calls = 0;
    double t_final = 0.0;
    bool stopped_early = false;
};

/// rhs(t, y, dydt) fills dydt; after_step(y) may renormalize the accepted state;
/// observe(t, y) is called at every sample time (including the first).
template <class State, class Rhs, class AfterStep, class Observe>
OdeStats integrate_dopri5(Rhs&& rhs, State& y, const std::vector<double>& samples,
                          const OdeOptions& opt, AfterStep&& after_step, Observe&& observe) {
    OdeStats stats;
    if (samples.empty()) return stats;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i] > samples[i - 1])) {
            throw std::invalid_argument("integrate_dopri5: sample times must increase strictly");
        }
    }
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = samples.front();
    stats.t_final = t;
    if (!observe(t, y)) {
        stats.stopped_early = true;
        return stats;
    }
    if (samples.size() == 1) return stats;

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y;
    rhs(t, y, k1);
    ++stats.rhs_calls;

    auto error_norm = [&](const State& err) {
        const auto scale =
            opt.atol + opt.rtol * y.array().abs().max(ynew.array().abs());
        return (err.array().abs() / scale).maxCoeff();
    };

    double h = opt.initial_step;
    if (h <= 0.0) {
        const double d0 = y.array().abs().maxCoeff();
        const double d1 = k1.array().abs().maxCoeff();
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, samples.back() - t);
    }
    h = std::min(h, opt.max_step);

    std::size_t next = 1;
    while (next < samples.size()) {
        const double target = samples[next];
        const double remaining = target - t;
        bool hits_sample = false;
        double step = std::min(h, opt.max_step);
        if (step >= remaining * (1.0 - 1e-12)) {
            step = remaining;
            hits_sample = true;
        }
        if (step <= std::abs(t) * 1e-14) {
            throw NumericalError("integrate_dopri5: step size underflow at t = " + std::to_string(t));
        }

        tmp.noalias() = y + step * a21 * k1;
        rhs(t + c2 * step, tmp, k2);
        tmp.noalias() = y + step * (a31 * k1 + a32 * k2);
        rhs(t + c3 * step, tmp, k3);
        tmp.noalias() = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * step, tmp, k4);
        tmp.noalias() = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * step, tmp, k5);
        tmp.noalias() = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + step, tmp, k6);
        ynew.noalias() = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + step, ynew, k7);
        stats.rhs_calls += 6;

        tmp.noalias() = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = error_norm(tmp);
        if (!std::isfinite(err)) {
            throw NumericalError("integrate_dopri5: non-finite state at t = " + std::to_string(t));
        }

        if (err <= 1.0) {
            t = hits_sample ? target : t + step;
            y.swap(ynew);
            std::swap(k1, k7);
            ++stats.accepted;
            if (after_step(y)) {
                rhs(t, y, k1);
                ++stats.rhs_calls;
            }
            if (hits_sample) {
                ++next;
                if (!observe(t, y)) {
                    stats.stopped_early = true;
                    break;
                }
            }
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            // a step shortened to hit a sample says nothing about the natural step
            h = hits_sample ? std::max(h, step * fac) : step * fac;
        } else {
            ++stats.rejected;
            h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
        if (stats.accepted + stats.rejected > opt.max_steps) {
            throw NumericalError("integrate_dopri5: step budget exhausted");
        }
    }
    stats.t_final = t;
    return stats;
}

}  // namespace strobo
