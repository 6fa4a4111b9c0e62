#pragma once

// Evolution of the Gaussian ansatz Psi = A exp(-B xi^2) under
// i dPsi/dtau = -1/2 Psi'' + 1/2 g(tau) xi^2 Psi. Substituting the ansatz gives
//   dA/dtau = -i A B,   dB/dtau = i (g/2 - 2 B^2),
// integrated as four real equations in (Re A, Im A, Re B, Im B).
//
// Deep inside the resonance the packet periodically focuses: |B| grows to
// ~|u|^2 (u the classical solution) for a time ~1/|B|, which no double
// precision step can resolve once |u|^2 ~ 1e9. While |B| > 2 the state is
// therefore carried in the inverted chart
//   C = 1/B,  G = A sqrt(C),
//   dC/dtau = i (2 - g C^2 / 2),   dG/dtau = -(i/4) g C G,
// which is regular through the focus. Re C = Re B / |B|^2 > 0, so the
// principal square root is continuous along any trajectory. Both charts carry
// Re B (resp. Re C) multiplicatively, preserving its relative precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "paramosc/core.hpp"
#include "paramosc/ode.hpp"
#include "paramosc/spectral.hpp"

namespace paramosc {

using StateVec = ode::Vec<4>;

struct TrajectorySample {
    double tau;
    GaussianState state;
    double g;
    double norm_residual;
    /// <H_0> at tau, units hbar omega_0.
    double energy;
};

struct EvolutionReport {
    GaussianState state;
    double max_norm_residual = 0.0;
    double min_b_re = 0.0;
    /// Number of switches between the (A, B) and inverted charts.
    std::size_t chart_switches = 0;
    ode::StepStats steps;
};

/// Smallest Re B accepted before the state is declared numerically unnormalizable.
inline constexpr double kMinWidthRe = 1e-12;

/// Time derivatives (dA_R, dA_I, dB_R, dB_I) for drive value g.
inline StateVec rhs(const StateVec& y, double g) noexcept {
    const double ar = y[0], ai = y[1], br = y[2], bi = y[3];
    return {ar * bi + ai * br, -(ar * br - ai * bi), 4.0 * br * bi, 0.5 * g - 2.0 * (br * br - bi * bi)};
}

inline StateVec rhs(const GaussianState& s, double g) noexcept {
    return rhs(StateVec{s.a.real(), s.a.imag(), s.b.real(), s.b.imag()}, g);
}

/// Time derivatives (dG_R, dG_I, dC_R, dC_I) in the inverted chart.
inline StateVec rhs_inverted(const StateVec& y, double g) noexcept {
    const double gr = y[0], gi = y[1], cr = y[2], ci = y[3];
    return {0.25 * g * (cr * gi + ci * gr), -0.25 * g * (cr * gr - ci * gi), g * cr * ci,
            2.0 - 0.5 * g * (cr * cr - ci * ci)};
}

namespace detail {

/// Chart boundaries: leave (A, B) when |B| > 2, leave (G, C) when |C| > 2.
inline constexpr double kChartSwitch = 2.0;

struct ChartState {
    bool inverted = false;
    StateVec y{};
};

inline ChartState to_chart(const GaussianState& s, bool inverted) {
    if (!inverted)
        return {false, {s.a.real(), s.a.imag(), s.b.real(), s.b.imag()}};
    const cplx c = 1.0 / s.b;
    const cplx g = s.a * std::sqrt(c);
    return {true, {g.real(), g.imag(), c.real(), c.imag()}};
}

inline GaussianState from_chart(const ChartState& cs, double tau) {
    if (!cs.inverted)
        return {cplx(cs.y[0], cs.y[1]), cplx(cs.y[2], cs.y[3]), tau};
    const cplx c(cs.y[2], cs.y[3]);
    const cplx g(cs.y[0], cs.y[1]);
    return {g / std::sqrt(c), 1.0 / c, tau};
}

/// Re B and the norm residual evaluated directly in either chart.
inline double chart_width_re(const ChartState& cs) {
    return cs.inverted ? cs.y[2] / (cs.y[2] * cs.y[2] + cs.y[3] * cs.y[3]) : cs.y[2];
}

inline double chart_norm_residual(const ChartState& cs) {
    // (A, B): |A|^2 sqrt(pi/(2 Re B));  (G, C): |G|^2 sqrt(pi/(2 Re C)).
    const double amp2 = cs.y[0] * cs.y[0] + cs.y[1] * cs.y[1];
    return std::abs(amp2 * std::sqrt(std::numbers::pi / (2.0 * cs.y[2])) - 1.0);
}

inline ode::AdaptiveOptions integrator_options(const DriveParams& params, const SimConfig& config) {
    return {config.abs_tol, config.rel_tol, params.drive_period() * config.max_step_fraction};
}

/// Checks applied after every accepted step.
class StateGuard {
public:
    explicit StateGuard(const SimConfig& config) : norm_tol_(config.norm_tol) {}

    void operator()(double tau, const ChartState& cs) {
        const double width = chart_width_re(cs);
        if (!(cs.y[2] > 0.0) || !(width > kMinWidthRe))
            throw IntegrationFailure("Re B fell to " + std::to_string(width) + " at tau = " + std::to_string(tau) +
                                     "; state is numerically unnormalizable");
        const double res = chart_norm_residual(cs);
        if (!(res <= norm_tol_))
            throw UnitarityViolation("norm residual " + std::to_string(res) + " exceeds norm_tol at tau = " +
                                     std::to_string(tau));
        max_residual_ = std::max(max_residual_, res);
        min_b_re_ = std::min(min_b_re_, width);
    }

    double max_residual() const noexcept { return max_residual_; }
    double min_b_re() const noexcept { return min_b_re_; }

private:
    double norm_tol_;
    double max_residual_ = 0.0;
    double min_b_re_ = std::numeric_limits<double>::infinity();
};

/// Adaptive propagation of a Gaussian between arbitrary times, switching
/// charts as |B| crosses kChartSwitch.
class Propagator {
public:
    Propagator(const DriveParams& params, const SimConfig& config)
        : params_(params), stepper_(integrator_options(params, config)), guard_(config) {}

    GaussianState run(const GaussianState& from, double t1) {
        ChartState cs = to_chart(from, std::abs(from.b) > kChartSwitch);
        double t = from.tau;
        guard_(t, cs);
        const auto drive = [this](double tau) { return g_eval(params_, tau); };
        while (t != t1) {
            double reached;
            if (!cs.inverted) {
                reached = stepper_.advance(
                    [&](double tau, const StateVec& y) { return rhs(y, drive(tau)); }, cs.y, t, t1,
                    [&](double tau, const StateVec& y) { guard_(tau, {false, y}); },
                    [](const StateVec& y) { return std::hypot(y[2], y[3]) > kChartSwitch; });
            } else {
                reached = stepper_.advance(
                    [&](double tau, const StateVec& y) { return rhs_inverted(y, drive(tau)); }, cs.y, t, t1,
                    [&](double tau, const StateVec& y) { guard_(tau, {true, y}); },
                    [](const StateVec& y) { return std::hypot(y[2], y[3]) > kChartSwitch; });
            }
            t = reached;
            if (t != t1) {
                cs = to_chart(from_chart(cs, t), !cs.inverted);
                ++switches_;
            }
        }
        return from_chart(cs, t1);
    }

    double max_residual() const noexcept { return guard_.max_residual(); }
    double min_b_re() const noexcept { return guard_.min_b_re(); }
    std::size_t switches() const noexcept { return switches_; }
    const ode::StepStats& stats() const noexcept { return stepper_.stats(); }

private:
    DriveParams params_;
    ode::DormandPrince<4> stepper_;
    StateGuard guard_;
    std::size_t switches_ = 0;
};

inline void check_start(const GaussianState& start) {
    require_normalizable(start);
    if (start.tau != 0.0)
        throw InvalidParameter("evolution must start at tau = 0");
}

} // namespace detail

/// Integrate through the whole drive window and report diagnostics.
inline EvolutionReport evolve_report(const GaussianState& start, const DriveParams& params,
                                     const SimConfig& config) {
    config.validate();
    detail::check_start(start);
    detail::Propagator prop(params, config);
    EvolutionReport out;
    out.state = prop.run(start, tau_final(params));
    out.max_norm_residual = prop.max_residual();
    out.min_b_re = prop.min_b_re();
    out.chart_switches = prop.switches();
    out.steps = prop.stats();
    return out;
}

/// State at tau_final(params).
inline GaussianState evolve(const GaussianState& start, const DriveParams& params, const SimConfig& config) {
    return evolve_report(start, params, config).state;
}

/// Samples at sample_count uniformly spaced times from 0 to tau_final inclusive.
inline std::vector<TrajectorySample> evolve_traced(const GaussianState& start, const DriveParams& params,
                                                   const SimConfig& config, std::size_t sample_count) {
    config.validate();
    detail::check_start(start);
    if (sample_count < 2)
        throw InvalidParameter("sample_count must be >= 2");
    const double tf = tau_final(params);
    detail::Propagator prop(params, config);

    std::vector<TrajectorySample> out;
    out.reserve(sample_count);
    GaussianState s = start;
    for (std::size_t k = 0; k < sample_count; ++k) {
        const double target = k + 1 == sample_count ? tf : tf * static_cast<double>(k) / (sample_count - 1);
        s = prop.run(s, target);
        out.push_back({target, s, g_eval(params, target), norm_residual(s), energy_expectation(s)});
    }
    return out;
}

/// Fixed-step RK4 on the (A, B) equations over the drive window; the
/// convergence-order reference. No chart switching.
inline GaussianState evolve_fixed_step(const GaussianState& start, const DriveParams& params, std::size_t steps) {
    detail::check_start(start);
    const double tf = tau_final(params);
    const auto f = [params](double tau, const StateVec& y) { return rhs(y, g_eval(params, tau)); };
    const StateVec y =
        ode::rk4_fixed<4>(f, StateVec{start.a.real(), start.a.imag(), start.b.real(), start.b.imag()}, 0.0, tf, steps);
    return {cplx(y[0], y[1]), cplx(y[2], y[3]), tf};
}

/// Integrate a state given at end.tau backwards to tau = 0, replaying the
/// drive in reverse.
inline GaussianState evolve_backward(const GaussianState& end, const DriveParams& params, const SimConfig& config) {
    config.validate();
    require_normalizable(end);
    detail::Propagator prop(params, config);
    return prop.run(end, 0.0);
}

} // namespace paramosc
