#pragma once

// The classical parametric oscillator x'' + g(tau) x = 0, used as an
// independent oracle for the quantum width equation.
//
// With B = -(i/2) u'/u, the width equation dB/dtau = -i (g/2 - 2 B^2) is
// equivalent to the linear equation u'' + g u = 0. The ground state B(0) = 1/2
// maps to u(0) = 1, u'(0) = i, for which Im(conj(u) u') = 1 is conserved and
// Re B = 1/(2|u|^2), <H_0> = (|u|^2 + |u'|^2)/4.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "paramosc/core.hpp"
#include "paramosc/ode.hpp"

namespace paramosc {

/// Complex solution of u'' + g u = 0 at time tau.
struct ClassicalSolution {
    cplx u;
    cplx udot;
    double tau = 0.0;

    /// Im(conj(u) u'); equals 1 for the ground-state initial data.
    double wronskian() const { return (std::conj(u) * udot).imag(); }
};

struct PhasePoint {
    double x = 0.0;
    double v = 0.0;
};

struct ClassicalSample {
    double tau;
    double x;
    double v;
    double g;
};

struct RiccatiResult {
    ClassicalSolution solution;
    /// Width parameter B = -(i/2) u'/u at tau_final.
    cplx b;
    /// (|u|^2 + |u'|^2)/4.
    double energy = 0.0;
    /// max |Im(conj(u) u') - 1| over accepted steps.
    double max_wronskian_drift = 0.0;
};

/// Monodromy matrix of x'' + g x = 0 over one drive period, columns are the
/// images of (x, v) = (1, 0) and (0, 1).
struct Monodromy {
    double m00, m01, m10, m11;

    double trace() const { return m00 + m11; }
    double det() const { return m00 * m11 - m01 * m10; }
};

/// Classical resonance condition |eps_bar / h| < 1/2 (strict). The true
/// instability boundary moves by O(h) in r; this predicate is the first-order
/// condition only.
inline bool pr_condition(const DriveParams& params) { return std::abs(params.ratio()) < 0.5; }

namespace detail {

inline ode::AdaptiveOptions classical_options(const DriveParams& params, const SimConfig& config) {
    return {config.abs_tol, config.rel_tol, params.drive_period() * config.max_step_fraction};
}

template <class G>
auto oscillator_rhs(G g) {
    return [g](double tau, const ode::Vec<2>& y) { return ode::Vec<2>{y[1], -g(tau) * y[0]}; };
}

template <class G>
auto complex_oscillator_rhs(G g) {
    return [g](double tau, const ode::Vec<4>& y) {
        const double gv = g(tau);
        return ode::Vec<4>{y[2], y[3], -gv * y[0], -gv * y[1]};
    };
}

} // namespace detail

/// Integrate x'' + g x = 0 from (x0, v0) at tau = 0 to tau_final.
inline PhasePoint classical_evolve(const DriveParams& params, double x0, double v0, const SimConfig& config) {
    config.validate();
    ode::Vec<2> y{x0, v0};
    ode::DormandPrince<2> stepper(detail::classical_options(params, config));
    stepper.advance(detail::oscillator_rhs([params](double t) { return g_eval(params, t); }), y, 0.0,
                    tau_final(params));
    return {y[0], y[1]};
}

/// As classical_evolve, sampled at sample_count uniform times including both ends.
inline std::vector<ClassicalSample> classical_traced(const DriveParams& params, double x0, double v0,
                                                     const SimConfig& config, std::size_t sample_count) {
    config.validate();
    if (sample_count < 2)
        throw InvalidParameter("sample_count must be >= 2");
    const double tf = tau_final(params);
    ode::Vec<2> y{x0, v0};
    ode::DormandPrince<2> stepper(detail::classical_options(params, config));
    const auto f = detail::oscillator_rhs([params](double t) { return g_eval(params, t); });
    std::vector<ClassicalSample> out;
    out.reserve(sample_count);
    double tau = 0.0;
    for (std::size_t k = 0; k < sample_count; ++k) {
        const double target = k + 1 == sample_count ? tf : tf * static_cast<double>(k) / (sample_count - 1);
        stepper.advance(f, y, tau, target);
        tau = target;
        out.push_back({tau, y[0], y[1], g_eval(params, tau)});
    }
    return out;
}

/// Width B(tau_final) from the linear equation for u with u(0)=1, u'(0)=i.
inline RiccatiResult riccati_oracle(const DriveParams& params, const SimConfig& config) {
    config.validate();
    const double tf = tau_final(params);
    ode::Vec<4> y{1.0, 0.0, 0.0, 1.0};
    double drift = 0.0;
    ode::DormandPrince<4> stepper(detail::classical_options(params, config));
    stepper.advance(detail::complex_oscillator_rhs([params](double t) { return g_eval(params, t); }), y, 0.0, tf,
                    [&drift](double, const ode::Vec<4>& s) {
                        const double w = s[0] * s[3] - s[1] * s[2];
                        drift = std::max(drift, std::abs(w - 1.0));
                    });
    RiccatiResult out;
    out.solution = {cplx(y[0], y[1]), cplx(y[2], y[3]), tf};
    out.b = cplx(0.0, -0.5) * out.solution.udot / out.solution.u;
    out.energy = 0.25 * (std::norm(out.solution.u) + std::norm(out.solution.udot));
    out.max_wronskian_drift = drift;
    return out;
}

/// Monodromy over one period 2 pi/(2 + eps_bar) of the periodically
/// continued drive 1 + h sin((2 + eps_bar) tau).
inline Monodromy floquet_monodromy(const DriveParams& params, const SimConfig& config) {
    config.validate();
    const double period = params.drive_period();
    const double w = params.drive_frequency();
    const double h = params.h();
    const auto f = detail::oscillator_rhs([h, w](double t) { return 1.0 + h * std::sin(w * t); });
    ode::Vec<2> c0{1.0, 0.0}, c1{0.0, 1.0};
    ode::DormandPrince<2> s0(detail::classical_options(params, config));
    ode::DormandPrince<2> s1(detail::classical_options(params, config));
    s0.advance(f, c0, 0.0, period);
    s1.advance(f, c1, 0.0, period);
    return {c0[0], c1[0], c0[1], c1[1]};
}

/// Spectral radius of the one-period monodromy matrix; > 1 means parametric
/// growth. A discriminant tr^2/4 - det within the integrator's resolution is
/// treated as elliptic (multipliers on the unit circle), since near the
/// tangency tr = +-2 an O(tol) error in the trace turns into an O(sqrt(tol))
/// error in the radius.
inline double floquet_growth(const DriveParams& params, const SimConfig& config) {
    const Monodromy m = floquet_monodromy(params, config);
    const double tr = m.trace();
    const double det = m.det();
    const double disc = 0.25 * tr * tr - det;
    const double resolution = 100.0 * (config.abs_tol + config.rel_tol);
    if (disc <= resolution)
        return std::sqrt(std::abs(det));
    return 0.5 * std::abs(tr) + std::sqrt(disc);
}

} // namespace paramosc
