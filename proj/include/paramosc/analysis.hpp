#pragma once

// Regime characterization of the excitation spectrum: log-space least-squares
// fits, parameter sweeps over r = eps_bar/h, and transition detection.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "paramosc/classical.hpp"
#include "paramosc/core.hpp"
#include "paramosc/dynamics.hpp"
#include "paramosc/spectral.hpp"

namespace paramosc {

enum class FitModel { power_law, exponential };

inline std::string_view to_string(FitModel m) {
    return m == FitModel::power_law ? "power_law" : "exponential";
}

struct IndexRange {
    int first = 2;
    int last = 40;
};

struct FitResult {
    FitModel model = FitModel::power_law;
    /// beta for the power law, alpha (per unit n) for the exponential.
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    IndexRange n_range;
    int points_used = 0;
};

inline constexpr double kPositivityFloor = 1e-300;
inline constexpr double kFitProbabilityFloor = 1e-12;
inline constexpr int kFitIndexCap = 40;

namespace detail {

struct LineFit {
    double slope, intercept, r_squared;
};

/// Unweighted ordinary least squares y = slope x + intercept.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 3)
        throw InsufficientPoints("a fit needs at least 3 points, got " + std::to_string(n));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw DegenerateFit("regressor has zero variance");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (slope * x[i] + intercept);
        ss_res += e * e;
    }
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return {slope, intercept, std::clamp(r2, 0.0, 1.0)};
}

inline FitResult fit_points(FitModel model, std::span<const int> n, std::span<const double> p, double p0) {
    if (n.size() != p.size())
        throw InvalidParameter("index and probability arrays differ in length");
    std::vector<double> x, y;
    x.reserve(n.size());
    y.reserve(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(p[i] > kPositivityFloor))
            throw InvalidParameter("p_" + std::to_string(n[i]) + " is below the positivity floor");
        if (model == FitModel::power_law) {
            if (n[i] < 2 || n[i] % 2 != 0)
                throw InvalidParameter("power-law fit uses even n >= 2 only");
            x.push_back(std::log(static_cast<double>(n[i])));
            y.push_back(std::log(p[i] / p0));
        } else {
            if (n[i] < 0 || n[i] % 2 != 0)
                throw InvalidParameter("exponential fit uses even n only");
            x.push_back(static_cast<double>(n[i]));
            y.push_back(std::log(p[i]));
        }
    }
    const LineFit lf = least_squares(x, y);
    FitResult out;
    out.model = model;
    out.slope = lf.slope;
    out.intercept = lf.intercept;
    out.r_squared = lf.r_squared;
    out.points_used = static_cast<int>(n.size());
    if (!n.empty())
        out.n_range = {*std::min_element(n.begin(), n.end()), *std::max_element(n.begin(), n.end())};
    return out;
}

inline FitResult fit_spectrum(FitModel model, const SpectralDecomposition& spec, IndexRange range) {
    if (range.first % 2 != 0)
        ++range.first;
    std::vector<int> n;
    std::vector<double> p;
    for (int k = std::max(range.first, 0); k <= range.last && k <= spec.n_max; k += 2) {
        n.push_back(k);
        p.push_back(spec.p(k));
    }
    const double p0 = spec.p(0);
    if (model == FitModel::power_law && !(p0 > kPositivityFloor))
        throw InvalidParameter("p_0 is below the positivity floor");
    return fit_points(model, n, p, p0);
}

} // namespace detail

/// Even n from 2 up to the largest n <= 40 with p_n > 1e-12 (contiguous).
inline IndexRange default_fit_window(const SpectralDecomposition& spec) {
    int last = 0;
    for (int n = 2; n <= std::min(kFitIndexCap, spec.n_max); n += 2) {
        if (!(spec.p(n) > kFitProbabilityFloor))
            break;
        last = n;
    }
    return {2, last};
}

/// Least squares of ln(p_n/p_0) against ln n; slope is beta in p_n ~ n^beta.
inline FitResult fit_powerlaw(const SpectralDecomposition& spec, IndexRange range) {
    return detail::fit_spectrum(FitModel::power_law, spec, range);
}

/// Least squares of ln p_n against n; slope is alpha in p_n ~ exp(alpha n).
inline FitResult fit_exponential(const SpectralDecomposition& spec, IndexRange range) {
    return detail::fit_spectrum(FitModel::exponential, spec, range);
}

/// Fits on raw (n, p_n) tables, e.g. spectra read back from CSV.
inline FitResult fit_powerlaw(std::span<const int> n, std::span<const double> p, double p0) {
    if (!(p0 > kPositivityFloor))
        throw InvalidParameter("p_0 is below the positivity floor");
    return detail::fit_points(FitModel::power_law, n, p, p0);
}

inline FitResult fit_exponential(std::span<const int> n, std::span<const double> p) {
    return detail::fit_points(FitModel::exponential, n, p, 1.0);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class Regime { inside, outside, undefined };

inline std::string_view to_string(Regime r) {
    switch (r) {
    case Regime::inside:
        return "inside";
    case Regime::outside:
        return "outside";
    default:
        return "undefined";
    }
}

struct SweepPoint {
    double r;
    double h;
};

struct SweepRow {
    double r = 0.0;
    double h = 0.0;
    int nu = 0;
    double p0 = 0.0, p2 = 0.0, p4 = 0.0, p6 = 0.0;
    double energy = 0.0;
    Regime regime = Regime::undefined;
    /// Power law inside the resonance region, exponential outside.
    std::optional<FitResult> fit;
    std::string fit_error;
    /// Empty on success; otherwise the failure that aborted this row.
    std::string error;

    bool ok() const { return error.empty(); }
};

struct SweepResult {
    std::vector<SweepRow> rows;
    int nu = 0;
    std::size_t grid_size = 0;
};

/// n uniformly spaced values from lo to hi inclusive; {lo} when n == 1.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0)
        throw InvalidParameter("grid needs at least one point");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (n > 1)
        out.back() = hi;
    return out;
}

/// Evolve the ground state at (h, r) and summarize it. Errors land in the row.
inline SweepRow sweep_row(const SweepPoint& pt, int nu, const SimConfig& config) {
    SweepRow row;
    row.r = pt.r;
    row.h = pt.h;
    row.nu = nu;
    try {
        if (!std::isfinite(pt.r))
            throw InvalidParameter("r must be finite");
        if (pt.h == 0.0)
            throw UndefinedRatio("r = eps_bar/h is undefined for h = 0");
        const DriveParams params = DriveParams::from_ratio(pt.h, pt.r, nu);
        const GaussianState final_state = evolve(ground_state(), params, config);
        const SpectralDecomposition spec = decompose(final_state, config);
        row.p0 = spec.p(0);
        row.p2 = spec.p(2);
        row.p4 = spec.p(4);
        row.p6 = spec.p(6);
        row.energy = spec.energy_analytic;
        row.regime = pr_condition(params) ? Regime::inside : Regime::outside;
        try {
            const IndexRange window = default_fit_window(spec);
            row.fit = row.regime == Regime::inside ? fit_powerlaw(spec, window) : fit_exponential(spec, window);
        } catch (const Error& e) {
            row.fit_error = error_kind(e) + ": " + e.what();
        }
    } catch (const std::exception& e) {
        row.error = error_kind(e) + ": " + e.what();
        row.regime = Regime::undefined;
    }
    return row;
}

/// Rows are computed independently, possibly on several threads, and
/// returned sorted by r (stable for ties). Output does not depend on `threads`.
inline SweepResult sweep(std::vector<SweepPoint> points, int nu, const SimConfig& config, unsigned threads = 1) {
    if (points.empty())
        throw InvalidParameter("sweep grid is empty");
    config.validate();
    std::stable_sort(points.begin(), points.end(),
                     [](const SweepPoint& a, const SweepPoint& b) { return a.r < b.r; });

    SweepResult out;
    out.nu = nu;
    out.grid_size = points.size();
    out.rows.resize(points.size());

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < points.size(); ++i)
            out.rows[i] = sweep_row(points[i], nu, config);
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < points.size(); i = next++)
                    out.rows[i] = sweep_row(points[i], nu, config);
            });
    }
    return out;
}

inline SweepResult sweep(double h, int nu, std::span<const double> r_grid, const SimConfig& config,
                         unsigned threads = 1) {
    std::vector<SweepPoint> points;
    points.reserve(r_grid.size());
    for (double r : r_grid)
        points.push_back({r, h});
    return sweep(std::move(points), nu, config, threads);
}

// ---------------------------------------------------------------------------
// Transition detection

struct Transition {
    double r_minus;
    double r_plus;
};

struct TransitionWidth {
    double minus;
    double plus;
};

namespace detail {

/// Successful rows on one side of r = 0, ordered outward from r = 0.
inline std::vector<const SweepRow*> outward_rows(const SweepResult& sweep, bool positive) {
    std::vector<const SweepRow*> rows;
    for (const auto& row : sweep.rows)
        if (row.ok() && (positive ? row.r >= 0.0 : row.r <= 0.0))
            rows.push_back(&row);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow* a, const SweepRow* b) { return std::abs(a->r) < std::abs(b->r); });
    return rows;
}

/// First upward crossing of `level` by p_0 walking outward, starting at index
/// `from`; linear interpolation between the bracketing rows. Returns the
/// interpolated r and the index of the inner bracketing row.
inline std::optional<std::pair<double, std::size_t>> upward_crossing(const std::vector<const SweepRow*>& rows,
                                                                     double level, std::size_t from = 0) {
    for (std::size_t i = from; i + 1 < rows.size(); ++i) {
        const SweepRow& a = *rows[i];
        const SweepRow& b = *rows[i + 1];
        if (a.p0 < level && b.p0 >= level) {
            const double t = (level - a.p0) / (b.p0 - a.p0);
            return std::make_pair(a.r + t * (b.r - a.r), i);
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Where p_0 first rises through 1/2 walking outward from r = 0, on each side.
inline Transition detect_transition(const SweepResult& sweep) {
    Transition out{};
    for (bool positive : {false, true}) {
        const auto rows = detail::outward_rows(sweep, positive);
        const auto hit = detail::upward_crossing(rows, 0.5);
        if (!hit)
            throw NoCrossing(std::string("p_0 never crosses 0.5 for ") + (positive ? "r > 0" : "r < 0"));
        (positive ? out.r_plus : out.r_minus) = hit->first;
    }
    return out;
}

/// Distance in r between the first outward crossing of p_0 through `lo` and
/// the first crossing through `hi` after it, per side.
inline TransitionWidth transition_width(const SweepResult& sweep, double lo = 0.1, double hi = 0.9) {
    TransitionWidth out{};
    for (bool positive : {false, true}) {
        const auto rows = detail::outward_rows(sweep, positive);
        const auto a = detail::upward_crossing(rows, lo);
        if (!a)
            throw NoCrossing("p_0 never crosses the lower level");
        const auto b = detail::upward_crossing(rows, hi, a->second);
        if (!b)
            throw NoCrossing("p_0 never crosses the upper level");
        (positive ? out.plus : out.minus) = std::abs(b->first - a->first);
    }
    return out;
}

} // namespace paramosc
