#pragma once

// Explicit Runge-Kutta integrators for small fixed-size real systems:
// an adaptive Dormand-Prince 5(4) pair and a fixed-step classical RK4 used as
// the convergence-order reference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "paramosc/errors.hpp"

namespace paramosc::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& y, double h, const Vec<N>& k) {
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h * k[i];
    return out;
}

template <std::size_t N>
inline bool all_finite(const Vec<N>& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

struct AdaptiveOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Hard cap on |step|, applied even when the error estimate allows more.
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with local extrapolation. The integrator object keeps
/// the last proposed step so that consecutive advance() calls over adjacent
/// intervals continue smoothly.
template <std::size_t N>
class DormandPrince {
public:
    explicit DormandPrince(AdaptiveOptions opts) : opts_(opts) {}

    /// Integrate y from t0 to t1 (either direction). `observer(t, y)` is called
    /// after every accepted step, including the last one landing on t1.
    /// Integration halts early after the first accepted step for which
    /// `stop(y)` is true; the time reached is returned.
    template <class Rhs, class Observer, class Stop>
    double advance(Rhs&& rhs, Vec<N>& y, double t0, double t1, Observer&& observer, Stop&& stop) {
        if (t1 == t0)
            return t1;
        const double dir = t1 > t0 ? 1.0 : -1.0;
        const double span = std::abs(t1 - t0);
        double h = next_step_ > 0 ? next_step_ : std::min(opts_.max_step, span) * 0.1;
        h = std::min({h, opts_.max_step, span});
        double t = t0;

        while (dir * (t1 - t) > 0) {
            if (stats_.accepted + stats_.rejected >= opts_.max_steps)
                throw IntegrationFailure("step budget exhausted");
            const double remaining = std::abs(t1 - t);
            bool last = false;
            double step = h;
            if (step >= remaining) {
                step = remaining;
                last = true;
            }
            const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
            if (step < min_step && !last)
                throw IntegrationFailure("step size underflow at t = " + std::to_string(t));

            Vec<N> y5, err;
            attempt(rhs, y, t, dir * step, y5, err);

            if (!all_finite(y5)) {
                if (step < min_step)
                    throw IntegrationFailure("non-finite state at t = " + std::to_string(t));
                h = step * 0.1;
                ++stats_.rejected;
                continue;
            }

            double err_norm = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
                err_norm = std::max(err_norm, std::abs(err[i]) / sc);
            }

            if (err_norm <= 1.0) {
                t = last ? t1 : t + dir * step;
                y = y5;
                ++stats_.accepted;
                observer(t, static_cast<const Vec<N>&>(y));
                const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
                // Keep the unclipped proposal when the final step was shortened to land on t1.
                h = std::min(opts_.max_step, last ? std::max(h, step * grow) : step * grow);
                if (!last && stop(static_cast<const Vec<N>&>(y))) {
                    next_step_ = h;
                    return t;
                }
            } else {
                ++stats_.rejected;
                h = step * std::max(0.1, 0.9 * std::pow(err_norm, -0.2));
            }
        }
        next_step_ = h;
        return t1;
    }

    template <class Rhs, class Observer>
    double advance(Rhs&& rhs, Vec<N>& y, double t0, double t1, Observer&& observer) {
        return advance(std::forward<Rhs>(rhs), y, t0, t1, std::forward<Observer>(observer),
                       [](const Vec<N>&) { return false; });
    }

    template <class Rhs>
    double advance(Rhs&& rhs, Vec<N>& y, double t0, double t1) {
        return advance(std::forward<Rhs>(rhs), y, t0, t1, [](double, const Vec<N>&) {});
    }

    /// Step proposal carried between advance() calls.
    double next_step() const noexcept { return next_step_; }
    void set_next_step(double h) noexcept { next_step_ = h; }

    const StepStats& stats() const noexcept { return stats_; }

private:
    template <class Rhs>
    static void attempt(Rhs& rhs, const Vec<N>& y, double t, double h, Vec<N>& y5, Vec<N>& err) {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                         a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                         b6 = 11.0 / 84;
        // b5th - b4th
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                         e6 = 22.0 / 525, e7 = -1.0 / 40;

        Vec<N> k1 = rhs(t, y);
        Vec<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        Vec<N> k2 = rhs(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        Vec<N> k3 = rhs(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        Vec<N> k4 = rhs(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        Vec<N> k5 = rhs(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        Vec<N> k6 = rhs(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        Vec<N> k7 = rhs(t + h, y5);
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    AdaptiveOptions opts_;
    StepStats stats_;
    double next_step_ = 0.0;
};

/// Classical fourth-order Runge-Kutta with `steps` equal steps from t0 to t1.
template <std::size_t N, class Rhs>
Vec<N> rk4_fixed(Rhs&& rhs, Vec<N> y, double t0, double t1, std::size_t steps) {
    if (steps == 0)
        throw InvalidParameter("rk4_fixed needs at least one step");
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * h;
        const Vec<N> k1 = rhs(t, y);
        const Vec<N> k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
        const Vec<N> k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
        const Vec<N> k4 = rhs(t + h, axpy(y, h, k3));
        for (std::size_t i = 0; i < N; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!all_finite(y))
        throw IntegrationFailure("non-finite state in fixed-step integration");
    return y;
}

} // namespace paramosc::ode
