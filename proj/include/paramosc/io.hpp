#pragma once

// Text serialization for trajectories, spectra, sweeps and plot data.
// Numbers are written with 17 significant digits through std::to_chars, which
// round-trips doubles exactly and ignores the process locale.

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "paramosc/analysis.hpp"
#include "paramosc/classical.hpp"
#include "paramosc/dynamics.hpp"
#include "paramosc/spectral.hpp"

namespace paramosc::io {

inline std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

/// Strict parse of a full string as a double; locale independent.
inline bool parse_double(std::string_view s, double& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string csv_quote(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c == '\n' ? ' ' : c;
    }
    out += '"';
    return out;
}

inline constexpr std::string_view kTrajectoryHeader = "tau,a_re,a_im,b_re,b_im,g,norm_residual,energy";
inline constexpr std::string_view kSpectrumHeader = "n,p_n";
inline constexpr std::string_view kSweepHeader =
    "r,h,nu,p0,p2,p4,p6,energy,fit_model,fit_slope,fit_r_squared,fit_n_first,fit_n_last,regime,error";
inline constexpr std::string_view kClassicalHeader = "tau,x,v,g";

inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectorySample> samples) {
    os << kTrajectoryHeader << '\n';
    for (const auto& s : samples)
        os << format_double(s.tau) << ',' << format_double(s.state.a.real()) << ',' << format_double(s.state.a.imag())
           << ',' << format_double(s.state.b.real()) << ',' << format_double(s.state.b.imag()) << ','
           << format_double(s.g) << ',' << format_double(s.norm_residual) << ',' << format_double(s.energy) << '\n';
}

/// Even n only.
inline void write_spectrum_csv(std::ostream& os, const SpectralDecomposition& spec) {
    os << kSpectrumHeader << '\n';
    for (int n = 0; n <= spec.n_max; n += 2)
        os << n << ',' << format_double(spec.p(n)) << '\n';
}

inline void write_classical_csv(std::ostream& os, std::span<const ClassicalSample> samples) {
    os << kClassicalHeader << '\n';
    for (const auto& s : samples)
        os << format_double(s.tau) << ',' << format_double(s.x) << ',' << format_double(s.v) << ','
           << format_double(s.g) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << kSweepHeader << '\n';
    for (const auto& row : sweep.rows) {
        os << format_double(row.r) << ',' << format_double(row.h) << ',' << row.nu << ',';
        if (row.ok()) {
            os << format_double(row.p0) << ',' << format_double(row.p2) << ',' << format_double(row.p4) << ','
               << format_double(row.p6) << ',' << format_double(row.energy) << ',';
        } else {
            os << ",,,,,";
        }
        if (row.fit) {
            os << to_string(row.fit->model) << ',' << format_double(row.fit->slope) << ','
               << format_double(row.fit->r_squared) << ',' << row.fit->n_range.first << ',' << row.fit->n_range.last
               << ',';
        } else {
            os << ",,,,,";
        }
        os << to_string(row.regime) << ',' << csv_quote(row.ok() ? row.fit_error : row.error) << '\n';
    }
}

/// Two whitespace-separated columns under a '#'-prefixed header.
inline void write_plot_data(std::ostream& os, std::string_view title, std::string_view x_label,
                            std::string_view y_label, std::span<const double> x, std::span<const double> y) {
    os << "# " << title << '\n' << "# " << x_label << ' ' << y_label << '\n';
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        os << format_double(x[i]) << ' ' << format_double(y[i]) << '\n';
}

} // namespace paramosc::io
