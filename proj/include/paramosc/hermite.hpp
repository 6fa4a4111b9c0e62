#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "paramosc/errors.hpp"

namespace paramosc {

/// Normalized oscillator eigenfunction psi_n(xi) = N_n H_n(xi) exp(-xi^2/2).
///
/// Uses the recurrence on the normalized functions themselves,
///   psi_{k+1} = sqrt(2/(k+1)) xi psi_k - sqrt(k/(k+1)) psi_{k-1},
/// so no factorial or power of two is ever formed.
inline double hermite_fn(int n, double xi) {
    if (n < 0)
        throw InvalidParameter("eigenstate index must be non-negative");
    double prev = 0.0;
    double cur = std::exp(-0.5 * xi * xi) / std::sqrt(std::sqrt(std::numbers::pi));
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// psi_0(xi) .. psi_{n_max}(xi) in one pass.
inline std::vector<double> hermite_fn_all(int n_max, double xi) {
    if (n_max < 0)
        throw InvalidParameter("eigenstate index must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    out[0] = std::exp(-0.5 * xi * xi) / std::sqrt(std::sqrt(std::numbers::pi));
    if (n_max >= 1)
        out[1] = std::sqrt(2.0) * xi * out[0];
    for (int k = 1; k < n_max; ++k)
        out[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * out[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
    return out;
}

} // namespace paramosc
