// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cli.hpp"
#include "paramosc/paramosc.hpp"

using namespace paramosc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!detail.empty())
            detail += "; ";
        detail += (ok ? "" : "MISS ") + what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned sweep_threads() { return std::max(4u, std::thread::hardware_concurrency()); }

const SweepRow& row_at(const SweepResult& s, double r) {
    return *std::min_element(s.rows.begin(), s.rows.end(), [r](const SweepRow& a, const SweepRow& b) {
        return std::abs(a.r - r) < std::abs(b.r - r);
    });
}

SpectralDecomposition spectrum_at(double h, double r, int nu, const SimConfig& c = {}) {
    return decompose(evolve(ground_state(), DriveParams::from_ratio(h, r, nu), c), c);
}

Outcome c1_ground_state() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const SimConfig c;
    const auto s = evolve(ground_state(), DriveParams::from_eps_bar(0.0, 0.0, 100), c);
    const auto d = decompose(s, c);
    const double dt = seconds_since(t0);
    o.check(std::abs(d.p(0) - 1.0) <= 1e-8, "p0-1=" + fmt("%.2e", d.p(0) - 1.0));
    o.check(std::abs(d.energy_analytic - 0.5) <= 1e-8, "E-0.5=" + fmt("%.2e", d.energy_analytic - 0.5));
    o.check(std::abs(s.b - 0.5) <= 1e-8, "|B-0.5|=" + fmt("%.2e", std::abs(s.b - 0.5)));
    o.check(dt < 1.0, "t=" + fmt("%.3fs", dt));
    return o;
}

Outcome c2_unitarity() {
    Outcome o;
    for (double r : {0.1, 0.6}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = evolve_report(ground_state(), DriveParams::from_ratio(0.03, r, 1000), SimConfig{});
        const double dt = seconds_since(t0);
        o.check(rep.max_norm_residual <= 1e-7, "r=" + fmt("%g", r) + " max_res=" + fmt("%.2e", rep.max_norm_residual));
        o.check(dt < 10.0, "t=" + fmt("%.2fs", dt));
    }
    return o;
}

Outcome c3_oracle() {
    Outcome o;
    const SimConfig c;
    double worst_b = 0.0, worst_e = 0.0;
    for (double h : {0.01, 0.03, 0.1}) {
        for (double r : {0.0, 0.2, 0.8}) {
            const auto p = DriveParams::from_ratio(h, r, 50);
            const auto s = evolve(ground_state(), p, c);
            const auto oracle = riccati_oracle(p, c);
            worst_b = std::max(worst_b, std::abs(s.b - oracle.b));
            worst_e = std::max(worst_e, std::abs(energy_expectation(s) - oracle.energy));
        }
    }
    o.check(worst_b <= 1e-6, "max|dB|=" + fmt("%.2e", worst_b));
    o.check(worst_e <= 1e-6, "max|dE|=" + fmt("%.2e", worst_e));
    return o;
}

Outcome c4_spectral_goldens() {
    Outcome o;
    const SimConfig c;
    const GaussianState s{cplx(std::pow(4.0 / std::numbers::pi, 0.25), 0.0), cplx(2.0, 0.0), 0.0};
    const auto d = decompose(s, c);
    o.check(std::abs(d.p(0) - 0.8) <= 1e-12, "p0-0.8=" + fmt("%.1e", d.p(0) - 0.8));
    o.check(std::abs(d.p(2) - 0.144) <= 1e-12, "p2-0.144=" + fmt("%.1e", d.p(2) - 0.144));
    o.check(std::abs(d.energy_analytic - 1.0625) <= 1e-12, "E-1.0625=" + fmt("%.1e", d.energy_analytic - 1.0625));
    double worst = 0.0;
    for (int n = 0; n <= 40; n += 2) {
        const double closed = pn_closed_even(s, n);
        worst = std::max(worst, std::abs(std::norm(overlap_quadrature(s, n, c)) - closed) / closed);
    }
    o.check(worst <= 1e-8, "max rel closed/quad=" + fmt("%.1e", worst));
    return o;
}

Outcome c5_parity() {
    Outcome o;
    const SimConfig c;
    double worst = 0.0;
    for (auto [h, r, nu] : {std::tuple{0.03, 0.1, 300}, std::tuple{0.03, 0.6, 300}, std::tuple{0.1, 0.2, 50}}) {
        const auto s = evolve(ground_state(), DriveParams::from_ratio(h, r, nu), c);
        for (int n : {1, 3, 5, 7})
            worst = std::max(worst, std::norm(overlap_quadrature(s, n, c)));
    }
    o.check(worst <= 1e-12, "max odd |overlap|^2=" + fmt("%.1e", worst));
    return o;
}

Outcome c6_conservation() {
    Outcome o;
    const SimConfig c;
    const auto out = spectrum_at(0.03, 0.6, 300, c);
    const double captured = out.captured();
    o.check(captured + out.tail_mass >= 1.0 - 1e-6, "r=0.6 sum+tail=" + fmt("%.12f", captured + out.tail_mass));
    o.check(captured + out.tail_bound >= 1.0 - 1e-6 && !out.truncated,
            "sum+bound=" + fmt("%.12f", captured + out.tail_bound));

    // Inside the resonance: the cap binds when it lies below the smallest n at
    // which the closed-form tail drops under tail_tol.
    const auto s = evolve(ground_state(), DriveParams::from_ratio(0.03, 0.1, 300), c);
    const double total = total_probability(s);
    double partial = 0.0;
    int needed = 0;
    for (int n = 0; total - partial > c.tail_tol; n += 2) {
        partial += pn_closed_even(s, n);
        needed = n;
    }
    bool exact = true;
    for (int cap : {200, 1000, 4000, needed - 2, needed, needed + 2, c.n_max_cap}) {
        SimConfig capped = c;
        capped.n_max_cap = std::max(cap, c.n_max);
        const auto d = decompose(s, capped);
        const bool binds = capped.n_max_cap < needed;
        exact = exact && d.truncated == binds && (!binds || d.n_max == capped.n_max_cap);
    }
    o.check(exact, "r=0.1 truncated iff cap < " + std::to_string(needed));
    return o;
}

struct SweepData {
    SweepResult s300, s1000;
    double t300 = 0.0;
};

Outcome c7_transition(const SweepData& sw) {
    Outcome o;
    const auto& s = sw.s300;
    const double p_in_m = row_at(s, -0.9).p0, p_in_p = row_at(s, 0.9).p0;
    o.check(p_in_m >= 0.99 && p_in_p >= 0.99, "p0(-0.9)=" + fmt("%.4f", p_in_m) + " p0(0.9)=" + fmt("%.4f", p_in_p));
    const double q_m = row_at(s, -0.1).p0, q_p = row_at(s, 0.1).p0;
    o.check(q_m <= 0.1 && q_p <= 0.1, "p0(-0.1)=" + fmt("%.4f", q_m) + " p0(0.1)=" + fmt("%.4f", q_p));
    const double ratio = row_at(s, 0.1).energy / row_at(s, 0.9).energy;
    o.check(ratio >= 100.0, "E(0.1)/E(0.9)=" + fmt("%.1f", ratio));
    try {
        const auto t = detect_transition(s);
        const bool in = std::abs(t.r_minus) >= 0.4 && std::abs(t.r_minus) <= 0.6 && std::abs(t.r_plus) >= 0.4 &&
                        std::abs(t.r_plus) <= 0.6;
        o.check(in, "r*=" + fmt("%.3f", t.r_minus) + "/" + fmt("%.3f", t.r_plus));
    } catch (const NoCrossing& e) {
        o.check(false, std::string("transition: ") + e.what());
    }
    try {
        const auto w300 = transition_width(s);
        const auto w1000 = transition_width(sw.s1000);
        o.check(w1000.minus < w300.minus && w1000.plus < w300.plus,
                "width nu=300 " + fmt("%.3f", w300.minus) + "/" + fmt("%.3f", w300.plus) + " nu=1000 " +
                    fmt("%.3f", w1000.minus) + "/" + fmt("%.3f", w1000.plus));
    } catch (const NoCrossing& e) {
        o.check(false, std::string("width: ") + e.what());
    }
    o.check(sw.t300 < 120.0, "201-pt sweep " + fmt("%.1fs", sw.t300));
    return o;
}

Outcome c8_fits() {
    Outcome o;
    const auto in = spectrum_at(0.03, 0.1, 300);
    const IndexRange window{2, 40};
    const auto pl = fit_powerlaw(in, window);
    const auto ex_in = fit_exponential(in, window);
    o.check(pl.r_squared >= 0.98 && pl.slope > -1.0 && pl.slope < 0.0,
            "r=0.1 beta=" + fmt("%.4f", pl.slope) + " r2=" + fmt("%.4f", pl.r_squared));
    double r2_exp_09 = 0.0, r2_pl_09 = 0.0;
    for (double r : {0.6, 0.9}) {
        const auto out = spectrum_at(0.03, r, 300);
        const auto w = default_fit_window(out);
        const auto ex = fit_exponential(out, w);
        o.check(ex.r_squared >= 0.98 && ex.slope < 0.0,
                "r=" + fmt("%g", r) + " alpha=" + fmt("%.4f", ex.slope) + " r2=" + fmt("%.4f", ex.r_squared));
        if (r == 0.9) {
            r2_exp_09 = ex.r_squared;
            r2_pl_09 = fit_powerlaw(out, w).r_squared;
        }
    }
    o.check(pl.r_squared > ex_in.r_squared, "r=0.1 pl>exp");
    o.check(r2_exp_09 > r2_pl_09, "r=0.9 exp>pl (" + fmt("%.4f", r2_exp_09) + " vs " + fmt("%.4f", r2_pl_09) + ")");
    return o;
}

Outcome c9_beta_spread() {
    Outcome o;
    std::vector<double> beta;
    std::string vals;
    for (double r : {0.1, 0.2, 0.3, 0.4}) {
        const auto d = spectrum_at(0.03, r, 300);
        beta.push_back(fit_powerlaw(d, default_fit_window(d)).slope);
        vals += (vals.empty() ? "" : ",") + fmt("%.4f", beta.back());
    }
    const auto [lo, hi] = std::minmax_element(beta.begin(), beta.end());
    double mean = 0.0;
    for (double b : beta)
        mean += b / beta.size();
    const double spread = (*hi - *lo) / std::abs(mean);
    o.check(spread <= 0.20, "beta=" + vals + " spread=" + fmt("%.1f%%", 100 * spread));
    return o;
}

Outcome c10_classical() {
    Outcome o;
    const SimConfig c;
    const auto tr = classical_traced(DriveParams::from_ratio(0.1, 0.2, 50), 0.0, 0.0, c, 101);
    const bool zero = std::all_of(tr.begin(), tr.end(), [](const ClassicalSample& s) { return s.x == 0.0 && s.v == 0.0; });
    o.check(zero, "rest trajectory zero");
    std::string grow, stable;
    bool ok_grow = true, ok_stable = true;
    for (double r : {0.0, 0.25, -0.25}) {
        const double g = floquet_growth(DriveParams::from_ratio(0.1, r, 1), c);
        ok_grow = ok_grow && g > 1.0;
        grow += fmt(" %.6f", g);
    }
    for (double r : {0.75, -0.75, 0.9, -0.9}) {
        const double g = floquet_growth(DriveParams::from_ratio(0.1, r, 1), c);
        ok_stable = ok_stable && g <= 1.0 + 1e-6;
        stable += fmt(" %.9f", g);
    }
    o.check(ok_grow, "growth>1:" + grow);
    o.check(ok_stable, "growth<=1+1e-6:" + stable);
    bool exact = true;
    for (double h : {0.01, 0.03, 0.1, 0.5}) {
        for (int k = -12; k <= 12; ++k) {
            const double eps = h * 0.0625 * k;
            const auto p = DriveParams::from_eps_bar(h, eps, 1);
            exact = exact && pr_condition(p) == (std::abs(eps) < 0.5 * h);
        }
    }
    o.check(exact, "pr_condition == |eps| < h/2");
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome c11_hygiene() {
    Outcome o;
    const auto p = DriveParams::from_ratio(0.1, 0.2, 20);
    SimConfig tight;
    tight.abs_tol = tight.rel_tol = 1e-13;
    const cplx ref = evolve(ground_state(), p, tight).b;
    const double e1 = std::abs(evolve_fixed_step(ground_state(), p, 400).b - ref);
    const double e2 = std::abs(evolve_fixed_step(ground_state(), p, 800).b - ref);
    o.check(std::abs(e1 / e2 - 16.0) <= 3.0, "RK4 ratio=" + fmt("%.2f", e1 / e2));

    const fs::path base = fs::temp_directory_path() / "paramosc_acceptance";
    fs::remove_all(base);
    std::vector<fs::path> dirs;
    bool ran = true;
    for (const char* t : {"1", "4", "8"}) {
        dirs.push_back(base / (std::string("threads") + t));
        const std::string out = dirs.back().string();
        const char* argv[] = {"paramosc", "sweep",   "--h",     "0.03", "--nu",      "300",  "--r-min", "-1",
                              "--r-max",  "1",       "--r-steps", "41", "--threads", t,      "--out",   out.c_str()};
        std::ostringstream sink;
        ran = ran && cli::run(static_cast<int>(std::size(argv)), argv, sink, sink) == 0;
    }
    bool same = ran;
    std::size_t files = 0;
    if (ran) {
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            if (e.path().filename() == "manifest.json")
                continue;
            ++files;
            const std::string ref_bytes = slurp(e.path());
            for (std::size_t k = 1; k < dirs.size(); ++k)
                same = same && slurp(dirs[k] / e.path().filename()) == ref_bytes;
        }
    }
    o.check(same && files > 0, "sweep outputs identical for 1/4/8 threads (" + std::to_string(files) + " files)");
    fs::remove_all(base);
    return o;
}

}

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = "exception " + error_kind(e) + ": " + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] criterion %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    };

    report(1, "stationary ground state", c1_ground_state);
    report(2, "unitarity", c2_unitarity);
    report(3, "oracle equivalence", c3_oracle);
    report(4, "spectral goldens", c4_spectral_goldens);
    report(5, "parity rule", c5_parity);
    report(6, "probability conservation", c6_conservation);

    SweepData sw;
    report(7, "transition", [&] {
        const SimConfig c;
        const auto grid = linspace(-1.0, 1.0, 201);
        const auto t0 = std::chrono::steady_clock::now();
        sw.s300 = sweep(0.03, 300, grid, c, sweep_threads());
        sw.t300 = seconds_since(t0);
        sw.s1000 = sweep(0.03, 1000, grid, c, sweep_threads());
        return c7_transition(sw);
    });
    report(8, "regime fits", c8_fits);
    report(9, "beta insensitivity", c9_beta_spread);
    report(10, "classical checks", c10_classical);
    report(11, "numerics hygiene", c11_hygiene);

    std::printf("%d of 11 criteria passed\n", 11 - failed);
    return failed == 0 ? 0 : 1;
}
