#pragma once

// Dimensionless conventions: hbar = m = omega_0 = 1. Positions are xi, times
// are tau = omega_0 t, energies are in units of hbar omega_0.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "paramosc/errors.hpp"

namespace paramosc {

using cplx = std::complex<double>;

/// The drive triple (h, eps_bar, nu). Stored canonically as (h, eps_bar);
/// construct through from_eps_bar() or from_ratio().
class DriveParams {
public:
    static DriveParams from_eps_bar(double h, double eps_bar, int nu) {
        return DriveParams(h, eps_bar, nu);
    }

    /// eps_bar = r * h. With h == 0 the ratio carries no information and the
    /// resulting drive is the undriven oscillator.
    static DriveParams from_ratio(double h, double r, int nu) {
        if (!std::isfinite(r))
            throw InvalidParameter("r must be finite");
        return DriveParams(h, r * h, nu);
    }

    double h() const noexcept { return h_; }
    double eps_bar() const noexcept { return eps_bar_; }
    int nu() const noexcept { return nu_; }

    /// r = eps_bar / h.
    double ratio() const {
        if (h_ == 0.0)
            throw UndefinedRatio("r = eps_bar/h is undefined for h = 0");
        return eps_bar_ / h_;
    }

    /// Angular frequency of the drive, 2 + eps_bar.
    double drive_frequency() const noexcept { return 2.0 + eps_bar_; }
    double drive_period() const noexcept { return 2.0 * std::numbers::pi / drive_frequency(); }

private:
    DriveParams(double h, double eps_bar, int nu) : h_(h), eps_bar_(eps_bar), nu_(nu) {
        if (!std::isfinite(h) || !std::isfinite(eps_bar))
            throw InvalidParameter("drive parameters must be finite");
        // Negative h is a phase-shifted drive, not the same drive; reject it.
        if (h < 0.0 || h >= 1.0)
            throw InvalidParameter("h must satisfy 0 <= h < 1");
        if (nu < 1)
            throw InvalidParameter("nu must be a positive integer");
        if (2.0 + eps_bar <= 0.0)
            throw InvalidParameter("2 + eps_bar must be positive");
    }

    double h_;
    double eps_bar_;
    int nu_;
};

/// Psi(xi) = a * exp(-b xi^2) at time tau.
struct GaussianState {
    cplx a;
    cplx b;
    double tau = 0.0;
};

/// Numerical tolerances shared by every module.
struct SimConfig {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    /// Largest integrator step as a fraction of the drive period.
    double max_step_fraction = 1.0 / 50.0;
    /// Initial decomposition size; doubled while the tail exceeds tail_tol.
    int n_max = 200;
    int n_max_cap = 20000;
    double tail_tol = 1e-10;
    double quadrature_tol = 1e-12;
    double norm_tol = 1e-6;

    void validate() const {
        if (!(abs_tol > 0) || !(rel_tol > 0) || !(max_step_fraction > 0) || !(tail_tol > 0) ||
            !(quadrature_tol > 0) || !(norm_tol > 0))
            throw InvalidParameter("all tolerances must be positive");
        if (n_max < 2 || n_max % 2 != 0)
            throw InvalidParameter("n_max must be even and >= 2");
        if (n_max_cap < n_max)
            throw InvalidParameter("n_max_cap must be >= n_max");
    }
};

/// End of the drive window, nu*pi/(2 + eps_bar).
inline double tau_final(const DriveParams& params) noexcept {
    return params.nu() * std::numbers::pi / params.drive_frequency();
}

/// g(tau) = 1 + h sin((2+eps_bar) tau) inside the open window (0, tau_final),
/// exactly 1 outside it.
inline double g_eval(const DriveParams& params, double tau) noexcept {
    if (tau <= 0.0 || tau >= tau_final(params))
        return 1.0;
    return 1.0 + params.h() * std::sin(params.drive_frequency() * tau);
}

/// psi_0: a = pi^(-1/4), b = 1/2.
inline GaussianState ground_state() noexcept {
    return GaussianState{cplx(1.0 / std::sqrt(std::sqrt(std::numbers::pi)), 0.0), cplx(0.5, 0.0), 0.0};
}

/// | |a|^2 sqrt(pi / (2 Re b)) - 1 |
inline double norm_residual(const GaussianState& s) noexcept {
    return std::abs(std::norm(s.a) * std::sqrt(std::numbers::pi / (2.0 * s.b.real())) - 1.0);
}

inline void require_normalizable(const GaussianState& s) {
    if (!(s.b.real() > 0.0) || !std::isfinite(s.b.imag()) || !std::isfinite(s.a.real()) ||
        !std::isfinite(s.a.imag()))
        throw InvalidParameter("Gaussian state requires finite a, b with Re b > 0");
}

} // namespace paramosc
