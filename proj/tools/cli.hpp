#pragma once

// paramosc command-line front end: evolve | spectrum | sweep | classical | fit.
//
// Precedence for every option: command-line flag > --config file > built-in
// default. The config file holds `key = value` lines (keys are long flag names
// without dashes; '#' starts a comment).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "paramosc/paramosc.hpp"

namespace paramosc::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kIo = 4 };

using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

/// key = value pairs; blank lines and '#' comments ignored.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out[key] = value;
    }
    return out;
}

/// Output files are collected in memory and written by a single writer at the
/// end, so the manifest can list their digests.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    /// `name` relative to the output directory, or a path of its own when `explicit_path` is set.
    void add(const std::string& name, std::string content, bool explicit_path = false) {
        files_.push_back({explicit_path ? std::filesystem::path(name) : dir_ / name, std::move(content)});
    }

    json write_all() const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        json listing = json::array();
        for (const auto& f : files_) {
            if (f.path.has_parent_path())
                std::filesystem::create_directories(f.path.parent_path(), ec);
            std::ofstream out(f.path, std::ios::binary);
            if (!out)
                throw IoError("cannot write " + f.path.string());
            out << f.content;
            out.close();
            if (!out)
                throw IoError("failed writing " + f.path.string());
            const auto rel = f.path.lexically_relative(dir_);
            const bool inside = !rel.empty() && *rel.begin() != "..";
            listing.push_back({{"file", inside ? rel.generic_string() : f.path.string()}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
        }
        return listing;
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    struct File {
        std::filesystem::path path;
        std::string content;
    };
    std::filesystem::path dir_;
    std::vector<File> files_;
};

/// Resolved option values shared by all subcommands.
struct CommonOptions {
    double h = 0.0;
    std::optional<double> eps_bar;
    std::optional<double> r;
    int nu = 300;
    int n_max = 200;
    int n_max_cap = 20000;
    double abs_tol = SimConfig{}.abs_tol;
    double rel_tol = SimConfig{}.rel_tol;
    std::string out = ".";
    std::string config;
    unsigned threads = 1;
    std::string trace;
    int samples = 1001;
};

struct Invocation {
    std::string command;
    CommonOptions common;
    // sweep
    double r_min = -1.0, r_max = 1.0;
    int r_steps = 201;
    // classical
    double x0 = 1.0, v0 = 0.0;
    // fit
    std::string input;
    std::string model = "both";
    std::optional<int> n_first, n_last;
};

inline DriveParams drive_from(const CommonOptions& o) {
    if (o.eps_bar && o.r)
        throw UsageError("--eps-bar and --r are mutually exclusive");
    if (o.r)
        return DriveParams::from_ratio(o.h, *o.r, o.nu);
    return DriveParams::from_eps_bar(o.h, o.eps_bar.value_or(0.0), o.nu);
}

inline SimConfig config_from(const CommonOptions& o) {
    SimConfig c;
    c.abs_tol = o.abs_tol;
    c.rel_tol = o.rel_tol;
    c.n_max = o.n_max;
    c.n_max_cap = std::max(o.n_max_cap, o.n_max);
    c.validate();
    return c;
}

inline json params_json(const DriveParams& p) {
    json j{{"h", p.h()}, {"eps_bar", p.eps_bar()}, {"nu", p.nu()}, {"tau_final", tau_final(p)}};
    j["r"] = p.h() > 0 ? json(p.ratio()) : json(nullptr);
    return j;
}

inline json config_json(const SimConfig& c) {
    return {{"abs_tol", c.abs_tol},     {"rel_tol", c.rel_tol},   {"max_step_fraction", c.max_step_fraction},
            {"n_max", c.n_max},         {"n_max_cap", c.n_max_cap}, {"tail_tol", c.tail_tol},
            {"quadrature_tol", c.quadrature_tol}, {"norm_tol", c.norm_tol}};
}

inline json fit_json(const FitResult& f) {
    return {{"model", std::string(to_string(f.model))},
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"n_first", f.n_range.first},
            {"n_last", f.n_range.last},
            {"points_used", f.points_used}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json resolved_json(const Invocation& inv) {
    const auto& o = inv.common;
    json j{{"h", o.h},
           {"nu", o.nu},
           {"n_max", o.n_max},
           {"n_max_cap", o.n_max_cap},
           {"abs_tol", o.abs_tol},
           {"rel_tol", o.rel_tol},
           {"out", o.out},
           {"threads", o.threads}};
    j["eps_bar"] = o.eps_bar ? json(*o.eps_bar) : json(nullptr);
    j["r"] = o.r ? json(*o.r) : json(nullptr);
    if (!o.config.empty())
        j["config"] = o.config;
    if (!o.trace.empty())
        j["trace"] = o.trace;
    if (inv.command == "evolve" || inv.command == "classical")
        j["samples"] = o.samples;
    if (inv.command == "sweep") {
        j["r_min"] = inv.r_min;
        j["r_max"] = inv.r_max;
        j["r_steps"] = inv.r_steps;
    }
    if (inv.command == "classical") {
        j["x0"] = inv.x0;
        j["v0"] = inv.v0;
    }
    if (inv.command == "fit") {
        j["input"] = inv.input;
        j["model"] = inv.model;
        j["n_first"] = inv.n_first ? json(*inv.n_first) : json(nullptr);
        j["n_last"] = inv.n_last ? json(*inv.n_last) : json(nullptr);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Commands. Each fills the OutputSet and returns a JSON summary for stdout.

inline void cmd_evolve(const Invocation& inv, OutputSet& out) {
    const DriveParams params = drive_from(inv.common);
    const SimConfig config = config_from(inv.common);
    const EvolutionReport rep = evolve_report(ground_state(), params, config);
    const SpectralDecomposition spec = decompose(rep.state, config);
    json j{{"params", params_json(params)},
           {"a_re", rep.state.a.real()},
           {"a_im", rep.state.a.imag()},
           {"b_re", rep.state.b.real()},
           {"b_im", rep.state.b.imag()},
           {"tau_final", rep.state.tau},
           {"energy", energy_expectation(rep.state)},
           {"norm_residual", norm_residual(rep.state)},
           {"max_norm_residual", rep.max_norm_residual},
           {"p0", spec.p(0)},
           {"p2", spec.p(2)}};
    out.add("evolve.json", dump(j));
    if (!inv.common.trace.empty()) {
        if (inv.common.samples < 2)
            throw UsageError("--samples must be >= 2");
        const auto samples =
            evolve_traced(ground_state(), params, config, static_cast<std::size_t>(inv.common.samples));
        std::ostringstream os;
        io::write_trajectory_csv(os, samples);
        out.add(inv.common.trace, os.str(), true);
    }
}

inline void cmd_spectrum(const Invocation& inv, OutputSet& out) {
    const DriveParams params = drive_from(inv.common);
    const SimConfig config = config_from(inv.common);
    const GaussianState s = evolve(ground_state(), params, config);
    const SpectralDecomposition spec = decompose(s, config);

    std::ostringstream csv;
    io::write_spectrum_csv(csv, spec);
    out.add("spectrum.csv", csv.str());

    json j{{"params", params_json(params)},
           {"n_max", spec.n_max},
           {"tail_mass", spec.tail_mass},
           {"tail_bound", spec.tail_bound},
           {"energy_spectral", spec.energy_spectral},
           {"energy_analytic", spec.energy_analytic},
           {"truncated", spec.truncated}};
    out.add("spectrum.json", dump(j));

    // ln(p_n/p_0) vs ln n and ln p_n vs n over the default fit window.
    const IndexRange w = default_fit_window(spec);
    std::vector<double> ln_n, ln_ratio, n_vals, ln_p;
    for (int n = 2; n <= w.last; n += 2) {
        ln_n.push_back(std::log(static_cast<double>(n)));
        ln_ratio.push_back(std::log(spec.p(n) / spec.p(0)));
    }
    for (int n = 0; n <= w.last; n += 2) {
        n_vals.push_back(n);
        ln_p.push_back(std::log(spec.p(n)));
    }
    std::ostringstream loglog, semilog;
    io::write_plot_data(loglog, "ln(p_n/p_0) vs ln(n), even n", "ln_n", "ln_p_n_over_p_0", ln_n, ln_ratio);
    io::write_plot_data(semilog, "ln(p_n) vs n, even n", "n", "ln_p_n", n_vals, ln_p);
    out.add("spectrum_loglog.dat", loglog.str());
    out.add("spectrum_semilog.dat", semilog.str());
}

inline void cmd_sweep(const Invocation& inv, OutputSet& out) {
    const auto& o = inv.common;
    const SimConfig config = config_from(o);
    if (inv.r_steps < 1)
        throw UsageError("--r-steps must be >= 1");
    if (!std::isfinite(inv.r_min) || !std::isfinite(inv.r_max))
        throw UsageError("--r-min/--r-max must be finite");
    if (o.nu < 1)
        throw UsageError("--nu must be >= 1");
    const auto grid = linspace(inv.r_min, inv.r_max, static_cast<std::size_t>(inv.r_steps));
    const SweepResult result = sweep(o.h, o.nu, grid, config, std::max(1u, o.threads));

    std::ostringstream csv;
    io::write_sweep_csv(csv, result);
    out.add("sweep.csv", csv.str());

    struct Column {
        const char* file;
        const char* label;
        std::function<std::optional<double>(const SweepRow&)> get;
    };
    const std::vector<Column> columns = {
        {"p0.dat", "p_0", [](const SweepRow& r) { return std::optional(r.p0); }},
        {"p2.dat", "p_2", [](const SweepRow& r) { return std::optional(r.p2); }},
        {"p4.dat", "p_4", [](const SweepRow& r) { return std::optional(r.p4); }},
        {"p6.dat", "p_6", [](const SweepRow& r) { return std::optional(r.p6); }},
        {"p2_over_p0.dat", "p_2/p_0", [](const SweepRow& r) { return std::optional(r.p2 / r.p0); }},
        {"p4_over_p0.dat", "p_4/p_0", [](const SweepRow& r) { return std::optional(r.p4 / r.p0); }},
        {"p6_over_p0.dat", "p_6/p_0", [](const SweepRow& r) { return std::optional(r.p6 / r.p0); }},
        {"energy.dat", "energy", [](const SweepRow& r) { return std::optional(r.energy); }},
        {"fit_slope.dat", "fit_slope",
         [](const SweepRow& r) { return r.fit ? std::optional(r.fit->slope) : std::nullopt; }},
    };
    for (const auto& col : columns) {
        std::vector<double> x, y;
        for (const auto& row : result.rows) {
            if (!row.ok())
                continue;
            if (const auto v = col.get(row)) {
                x.push_back(row.r);
                y.push_back(*v);
            }
        }
        std::ostringstream os;
        io::write_plot_data(os, std::string(col.label) + " vs r (h=" + io::format_double(o.h) +
                                    ", nu=" + std::to_string(o.nu) + ")",
                            "r", col.label, x, y);
        out.add(col.file, os.str());
    }

    json summary{{"h", o.h}, {"nu", o.nu}, {"rows", result.rows.size()}};
    std::size_t failed = 0;
    for (const auto& row : result.rows)
        failed += row.ok() ? 0 : 1;
    summary["failed_rows"] = failed;
    try {
        const Transition t = detect_transition(result);
        summary["transition"] = {{"r_minus", t.r_minus}, {"r_plus", t.r_plus}};
    } catch (const NoCrossing& e) {
        summary["transition"] = nullptr;
        summary["transition_error"] = e.what();
    }
    try {
        const TransitionWidth w = transition_width(result);
        summary["width_10_90"] = {{"minus", w.minus}, {"plus", w.plus}};
    } catch (const NoCrossing&) {
        summary["width_10_90"] = nullptr;
    }
    out.add("sweep.json", dump(summary));
}

inline void cmd_classical(const Invocation& inv, OutputSet& out) {
    const DriveParams params = drive_from(inv.common);
    const SimConfig config = config_from(inv.common);
    if (inv.common.samples < 2)
        throw UsageError("--samples must be >= 2");
    const auto traj =
        classical_traced(params, inv.x0, inv.v0, config, static_cast<std::size_t>(inv.common.samples));
    std::ostringstream csv;
    io::write_classical_csv(csv, traj);
    out.add(inv.common.trace.empty() ? "classical.csv" : inv.common.trace, csv.str(), !inv.common.trace.empty());

    const RiccatiResult oracle = riccati_oracle(params, config);
    const GaussianState q = evolve(ground_state(), params, config);
    json j{{"params", params_json(params)},
           {"x_final", traj.back().x},
           {"v_final", traj.back().v},
           {"floquet_growth", floquet_growth(params, config)}};
    j["pr_condition"] = params.h() > 0 ? json(pr_condition(params)) : json(nullptr);
    j["oracle"] = {{"b_quantum_re", q.b.real()},
                   {"b_quantum_im", q.b.imag()},
                   {"b_riccati_re", oracle.b.real()},
                   {"b_riccati_im", oracle.b.imag()},
                   {"abs_diff", std::abs(q.b - oracle.b)},
                   {"energy_quantum", energy_expectation(q)},
                   {"energy_classical", oracle.energy},
                   {"max_wronskian_drift", oracle.max_wronskian_drift}};
    out.add("classical.json", dump(j));
}

/// Read an (n, p_n) CSV as written by `spectrum`.
inline SpectralDecomposition read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != io::kSpectrumHeader)
        throw UsageError(path + ": expected header '" + std::string(io::kSpectrumHeader) + "'");
    SpectralDecomposition spec;
    int expected = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        double n = 0, p = 0;
        if (comma == std::string::npos || !io::parse_double(line.substr(0, comma), n) ||
            !io::parse_double(line.substr(comma + 1), p))
            throw UsageError(path + ": malformed row '" + line + "'");
        if (static_cast<int>(n) != expected)
            throw UsageError(path + ": rows must list even n = 0, 2, 4, ... in order");
        spec.p_even.push_back(p);
        spec.n_max = expected;
        expected += 2;
    }
    if (spec.p_even.empty())
        throw UsageError(path + ": no data rows");
    return spec;
}

inline void cmd_fit(const Invocation& inv, OutputSet& out) {
    SpectralDecomposition spec;
    json source;
    if (!inv.input.empty()) {
        spec = read_spectrum_csv(inv.input);
        source = {{"input", inv.input}};
    } else {
        const DriveParams params = drive_from(inv.common);
        const SimConfig config = config_from(inv.common);
        spec = decompose(evolve(ground_state(), params, config), config);
        source = {{"params", params_json(params)}};
    }
    IndexRange range = default_fit_window(spec);
    if (inv.n_first)
        range.first = *inv.n_first;
    if (inv.n_last)
        range.last = *inv.n_last;

    json j{{"source", source}, {"n_first", range.first}, {"n_last", range.last}};
    if (inv.model == "power_law" || inv.model == "both")
        j["power_law"] = fit_json(fit_powerlaw(spec, range));
    if (inv.model == "exponential" || inv.model == "both")
        j["exponential"] = fit_json(fit_exponential(spec, range));
    out.add("fit.json", dump(j));
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sub, CommonOptions& o, bool drive = true) {
    if (drive) {
        sub->add_option("--h", o.h, "drive amplitude, 0 <= h < 1");
        auto* eps = sub->add_option("--eps-bar", o.eps_bar, "dimensionless detuning eps/omega_0");
        auto* r = sub->add_option("--r", o.r, "ratio eps_bar/h");
        eps->excludes(r);
        sub->add_option("--nu", o.nu, "number of drive half-cycles");
    }
    sub->add_option("--n-max", o.n_max, "initial decomposition size (even)");
    sub->add_option("--n-max-cap", o.n_max_cap, "largest decomposition size");
    sub->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
    sub->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--config", o.config, "key = value configuration file");
    sub->add_option("--threads", o.threads, "worker threads (sweep)");
    sub->add_option("--trace", o.trace, "trajectory CSV path");
}

/// Apply config-file values as defaults for options not given on the command line.
inline void apply_config(CLI::App& app, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        if (key == "config")
            throw UsageError("config file may not set 'config'");
        CLI::Option* opt = nullptr;
        try {
            opt = app.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError("unknown config key '" + key + "'");
        }
        if (opt->count() == 0) {
            opt->clear();
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

/// Entry point; returns the process exit code. Diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out_stream = std::cout,
               std::ostream& err = std::cerr) {
    const auto t_start = std::chrono::steady_clock::now();
    CLI::App app{"Parametrically driven quantum harmonic oscillator: ground-state evolution, spectra and sweeps"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    Invocation inv;

    auto* evolve = app.add_subcommand("evolve", "evolve the ground state through the drive window");
    add_common(evolve, inv.common);
    evolve->add_option("--samples", inv.common.samples, "trajectory samples for --trace");

    auto* spectrum = app.add_subcommand("spectrum", "eigenstate probabilities of the evolved state");
    add_common(spectrum, inv.common);

    auto* sweep_cmd = app.add_subcommand("sweep", "scan r = eps_bar/h at fixed h and nu");
    add_common(sweep_cmd, inv.common);
    sweep_cmd->add_option("--r-min", inv.r_min);
    sweep_cmd->add_option("--r-max", inv.r_max);
    sweep_cmd->add_option("--r-steps", inv.r_steps);

    auto* classical = app.add_subcommand("classical", "classical oscillator, Floquet growth and width oracle");
    add_common(classical, inv.common);
    classical->add_option("--x0", inv.x0);
    classical->add_option("--v0", inv.v0);
    classical->add_option("--samples", inv.common.samples, "trajectory samples");

    auto* fit = app.add_subcommand("fit", "power-law and exponential fits of a spectrum");
    add_common(fit, inv.common);
    fit->add_option("--input", inv.input, "spectrum CSV (n,p_n); simulate when omitted");
    fit->add_option("--model", inv.model)->check(CLI::IsMember({"power_law", "exponential", "both"}));
    fit->add_option("--n-first", inv.n_first);
    fit->add_option("--n-last", inv.n_last);

    try {
        app.parse(argc, argv);
        CLI::App* sub = app.get_subcommands().front();
        inv.command = sub->get_name();
        if (!inv.common.config.empty())
            apply_config(*sub, read_config_file(inv.common.config));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out_stream, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out_stream, err);
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    }

    OutputSet outputs(inv.common.out);
    try {
        if (inv.command == "evolve")
            cmd_evolve(inv, outputs);
        else if (inv.command == "spectrum")
            cmd_spectrum(inv, outputs);
        else if (inv.command == "sweep")
            cmd_sweep(inv, outputs);
        else if (inv.command == "classical")
            cmd_classical(inv, outputs);
        else
            cmd_fit(inv, outputs);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidParameter& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "numerical failure (" << error_kind(e) << "): " << e.what() << '\n';
        return kNumerical;
    }

    try {
        json listing = outputs.write_all();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        json manifest{{"tool", "paramosc"},
                      {"version", kToolVersion},
                      {"command", inv.command},
                      {"parameters", resolved_json(inv)},
                      {"config", config_json(config_from(inv.common))},
                      {"wall_clock_seconds", seconds},
                      {"outputs", listing}};
        const auto manifest_path = outputs.dir() / "manifest.json";
        std::ofstream mf(manifest_path, std::ios::binary);
        if (!mf)
            throw IoError("cannot write " + manifest_path.string());
        mf << dump(manifest);
        if (!mf)
            throw IoError("failed writing " + manifest_path.string());
        out_stream << "wrote " << listing.size() + 1 << " files to " << outputs.dir().string() << '\n';
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}

} // namespace paramosc::cli
