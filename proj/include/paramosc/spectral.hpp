#pragma once

// Projection of a centred Gaussian onto the unperturbed eigenstates psi_n.
//
// Closed form (even n = 2k), with a = B + 1/2:
//   int H_2k(xi) exp(-a xi^2) dxi = sqrt(pi/a) ((1-a)/a)^k (2k)!/k!
// which gives p_0 = |A|^2 sqrt(pi)/|a| and
//   p_{n+2} = p_n (n+1)/(n+2) |(1-a)/a|^2.
// The quadrature route integrates psi_n(xi) A exp(-B xi^2) directly.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "paramosc/core.hpp"
#include "paramosc/hermite.hpp"

namespace paramosc {

struct SpectralDecomposition {
    /// p_even[k] = p_{2k}, k = 0 .. n_max/2.
    std::vector<double> p_even;
    int n_max = 0;
    /// Total probability of the state minus the captured sum.
    double tail_mass = 0.0;
    /// Geometric upper bound on the uncaptured probability.
    double tail_bound = 0.0;
    /// Geometric upper bound on sum_{n > n_max} p_n (n + 1/2).
    double energy_tail_bound = 0.0;
    double energy_spectral = 0.0;
    double energy_analytic = 0.0;
    /// |(1-a)/a|^2, the asymptotic ratio p_{n+2}/p_n.
    double ratio = 0.0;
    /// tail_mass still above tail_tol when n_max_cap was reached.
    bool truncated = false;

    /// p_n for any n >= 0; zero for odd n and for n > n_max.
    double p(int n) const {
        if (n < 0 || n % 2 != 0 || n > n_max)
            return 0.0;
        return p_even[static_cast<std::size_t>(n / 2)];
    }

    double captured() const {
        double s = 0.0;
        for (double v : p_even)
            s += v;
        return s;
    }
};

/// <H_0> = (4|B|^2 + 1) / (8 Re B) for a normalized Gaussian.
inline double energy_expectation(const GaussianState& s) {
    if (!(s.b.real() > 0.0))
        throw InvalidParameter("energy_expectation requires Re B > 0");
    return (4.0 * std::norm(s.b) + 1.0) / (8.0 * s.b.real());
}

/// |A|^2 sqrt(pi / (2 Re B)); 1 for a normalized state.
inline double total_probability(const GaussianState& s) {
    return std::norm(s.a) * std::sqrt(std::numbers::pi / (2.0 * s.b.real()));
}

/// p_n from the closed form, for even n.
inline double pn_closed_even(const GaussianState& s, int n) {
    if (n < 0 || n % 2 != 0)
        throw InvalidParameter("pn_closed_even requires a non-negative even index");
    if (!(s.b.real() > 0.0))
        throw InvalidParameter("pn_closed_even requires Re B > 0");
    const cplx a = s.b + 0.5;
    const double q = std::norm((1.0 - a) / a);
    double p = std::norm(s.a) * std::sqrt(std::numbers::pi) / std::abs(a);
    for (int m = 0; m < n; m += 2)
        p *= q * (m + 1.0) / (m + 2.0);
    return p;
}

/// Half-width of the overlap integration domain.
inline double quadrature_half_width(const GaussianState& s) {
    return std::max(8.0, 8.0 / std::sqrt(2.0 * std::min(s.b.real(), 0.5)));
}

/// <psi_n | Psi> by globally adaptive Gauss-Kronrod quadrature: the segment
/// with the largest error estimate is bisected until the summed estimate is
/// below quadrature_tol times the integrand's L1 norm.
inline cplx overlap_quadrature(const GaussianState& s, int n, const SimConfig& config) {
    require_normalizable(s);
    if (n < 0)
        throw InvalidParameter("eigenstate index must be non-negative");
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    constexpr std::size_t max_segments = 4000;

    // Beyond sqrt(2n+1) + 9 the eigenfunction itself is below 1e-17, so the
    // window [-L, L] is clipped there.
    const double X = std::min(quadrature_half_width(s), std::sqrt(2.0 * n + 1.0) + 9.0);
    const auto f = [&](double xi) { return hermite_fn(n, xi) * s.a * std::exp(-s.b * xi * xi); };

    struct Segment {
        double lo, hi;
        cplx value;
        double err, l1;
        bool operator<(const Segment& o) const { return err < o.err; }
    };
    const auto eval = [&](double lo, double hi) {
        double er = 0.0, ei = 0.0, lr = 0.0, li = 0.0;
        const double re = GK::integrate([&](double xi) { return f(xi).real(); }, lo, hi, 0, 0.0, &er, &lr);
        const double im = GK::integrate([&](double xi) { return f(xi).imag(); }, lo, hi, 0, 0.0, &ei, &li);
        return Segment{lo, hi, cplx(re, im), er + ei, lr + li};
    };

    std::priority_queue<Segment> queue;
    cplx total = 0.0;
    double err = 0.0, l1 = 0.0;
    const int panels = static_cast<int>(std::ceil(X));
    for (int k = 0; k < panels; ++k) {
        const double lo = -X + 2.0 * X * k / panels;
        const double hi = k + 1 == panels ? X : -X + 2.0 * X * (k + 1) / panels;
        queue.push(eval(lo, hi));
    }
    const auto sum_up = [&] {
        total = 0.0;
        err = 0.0;
        l1 = 0.0;
        auto copy = queue;
        while (!copy.empty()) {
            total += copy.top().value;
            err += copy.top().err;
            l1 += copy.top().l1;
            copy.pop();
        }
    };
    sum_up();
    while (err > config.quadrature_tol * l1 && queue.size() < max_segments) {
        const Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Segment left = eval(worst.lo, mid), right = eval(mid, worst.hi);
        queue.push(left);
        queue.push(right);
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        l1 += left.l1 + right.l1 - worst.l1;
    }
    sum_up();
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag()) || err > 10.0 * config.quadrature_tol * l1) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "overlap for n = %d has error estimate %.3e", n, err);
        throw QuadratureNonConvergence(msg);
    }
    return total;
}

/// Fill p_n for even n via the closed-form recurrence, doubling n_max from
/// config.n_max (up to config.n_max_cap) while the tail exceeds tail_tol.
inline SpectralDecomposition decompose(const GaussianState& s, const SimConfig& config) {
    config.validate();
    require_normalizable(s);
    const cplx a = s.b + 0.5;
    const double q = std::norm((1.0 - a) / a);
    const double total = total_probability(s);

    SpectralDecomposition out;
    out.ratio = q;
    out.energy_analytic = energy_expectation(s);

    double p = std::norm(s.a) * std::sqrt(std::numbers::pi) / std::abs(a);
    double sum = 0.0;
    double energy = 0.0;
    int n = 0;
    int limit = config.n_max;
    while (true) {
        for (; n <= limit; n += 2) {
            out.p_even.push_back(p);
            sum += p;
            energy += p * (n + 0.5);
            p *= q * (n + 1.0) / (n + 2.0);
        }
        out.n_max = limit;
        out.tail_mass = total - sum;
        if (out.tail_mass <= config.tail_tol || limit >= config.n_max_cap)
            break;
        limit = std::min(2 * limit, config.n_max_cap);
        if (limit % 2 != 0)
            --limit;
    }
    out.truncated = out.tail_mass > config.tail_tol;
    out.energy_spectral = energy;

    // p now holds p_{n_max+2}; successive ratios stay below q.
    if (q < 1.0) {
        out.tail_bound = p / (1.0 - q);
        const double n0 = out.n_max + 2.0;
        out.energy_tail_bound = p * ((n0 + 0.5) / (1.0 - q) + 2.0 * q / ((1.0 - q) * (1.0 - q)));
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
        out.energy_tail_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

} // namespace paramosc
