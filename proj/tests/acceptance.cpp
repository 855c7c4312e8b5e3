// Acceptance suite: end-to-end checks of the published design numbers this
// toolkit is expected to reproduce, one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pcs/cli.hpp"
#include "pcs/gain.hpp"
#include "pcs/infotheory.hpp"
#include "pcs/mcsim.hpp"
#include "pcs/mismatch.hpp"
#include "pcs/shaping.hpp"

#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace pcs;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d: %s  [%s]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return std::string(buf);
}

struct ReferenceRow {
    double shaping_snr_db;
    std::vector<double> pmf;
    std::vector<double> levels;
};

// Published shaped-8PAM design points (values rounded to 2-3 decimals in the
// reference table; the PMF tolerance below absorbs the rounding).
const std::vector<ReferenceRow> kReferenceRows = {
    {14.5,
     {0.042, 0.093, 0.158, 0.207, 0.207, 0.158, 0.093, 0.042},
     {-2.02, -1.44, -0.87, -0.29, 0.29, 0.87, 1.44, 2.02}},
    {18.0,
     {0.079, 0.113, 0.145, 0.163, 0.163, 0.145, 0.113, 0.079},
     {-1.73, -1.24, -0.74, -0.25, 0.25, 0.74, 1.24, 1.73}},
    {21.0,
     {0.109, 0.122, 0.132, 0.137, 0.137, 0.132, 0.122, 0.109},
     {-1.59, -1.13, -0.68, -0.23, 0.23, 0.68, 1.13, 1.59}},
    {24.0,
     {0.124, 0.125, 0.126, 0.126, 0.126, 0.126, 0.125, 0.124},
     {-1.53, -1.09, -0.66, -0.22, 0.22, 0.66, 1.09, 1.53}},
};

void criterion_1_table_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / "pcshape_acceptance_optimize";
    bool pass = true;
    double worst_pmf = 0.0, worst_level = 0.0;
    for (const auto& row : kReferenceRows) {
        fs::remove_all(dir);
        std::ostringstream out, err;
        std::ostringstream snr;
        snr << row.shaping_snr_db;
        const std::string snr_s = snr.str();
        const std::string dir_s = dir.string();
        const char* argv[] = {"pcshape", "optimize", "--m",   "8",
                              "--snr",   snr_s.c_str(), "--out", dir_s.c_str()};
        if (cli::run(8, argv, out, err) != 0) {
            pass = false;
            break;
        }
        std::ifstream is(dir / "solution.json");
        const auto j = nlohmann::json::parse(is);
        const auto pmf = j.at("unit_energy").at("pmf").get<std::vector<double>>();
        const auto levels = j.at("unit_energy").at("levels").get<std::vector<double>>();
        for (std::size_t i = 0; i < 8; ++i) {
            worst_pmf = std::max(worst_pmf, std::abs(pmf[i] - row.pmf[i]));
            worst_level = std::max(worst_level, std::abs(levels[i] - row.levels[i]));
        }
    }
    fs::remove_all(dir);
    const double elapsed = seconds_since(t0);
    pass = pass && worst_pmf <= 0.002 && worst_level <= 0.01 && elapsed < 1.0;
    report(1, "four shaped designs reproduced from the CLI", pass,
           fmt("max |pmf err| %.4f (<=0.002), max |level err| %.4f (<=0.01), %.2f s (<1 s)",
               worst_pmf, worst_level, elapsed));
}

struct GainPeaks {
    GainCurve g64, g16;
};

GainPeaks criterion_2_peak_gains() {
    const auto t0 = std::chrono::steady_clock::now();
    GainPeaks curves{matched_gain_curve(8, 5.0, 25.0, 0.1), matched_gain_curve(4, 5.0, 25.0, 0.1)};
    auto peak = [](const GainCurve& c) {
        double best = 0.0;
        for (std::size_t i = 0; i < c.gain_db.size(); ++i)
            if (!c.saturated[i] && c.gain_db[i] > best) best = c.gain_db[i];
        return best;
    };
    const double p64 = peak(curves.g64);
    const double p16 = peak(curves.g16);
    const double elapsed = seconds_since(t0);
    const bool pass = std::abs(p64 - 0.8) <= 0.05 && std::abs(p16 - 0.43) <= 0.03 && elapsed < 60.0;
    report(2, "peak matched gains (64QAM 0.8 dB, 16QAM 0.43 dB)", pass,
           fmt("64QAM peak %.3f dB, 16QAM peak %.3f dB, %.1f s (<60 s)", p64, p16, elapsed));
    return curves;
}

void criterion_3_crossing(const GainPeaks& curves) {
    double crossing = std::numeric_limits<double>::quiet_NaN();
    const auto& grid = curves.g64.snr_grid_db;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (curves.g64.saturated[i] || curves.g16.saturated[i]) continue;
        const double prev = curves.g16.gain_db[i - 1] - curves.g64.gain_db[i - 1];
        const double curr = curves.g16.gain_db[i] - curves.g64.gain_db[i];
        if (prev >= 0.0 && curr < 0.0) {
            crossing = grid[i - 1] + 0.1 * prev / (prev - curr);
            break;
        }
    }
    const bool pass = std::isfinite(crossing) && std::abs(crossing - 7.0) <= 0.5;
    report(3, "16QAM and 64QAM gain curves cross near 7 dB", pass,
           fmt("crossing at %.2f dB (7.0 +- 0.5)", crossing));
}

GainMap criterion_4_quantization() {
    const auto t0 = std::chrono::steady_clock::now();
    GainMap map = build_gain_map(8, 5.0, 25.0, 0.1);
    if (map.channel_grid_db.size() != 201 || map.penalty_db.size() != 40401) {
        report(4, "lookup-table sizes 4/3/2 at 0.1/0.2/0.3 dB", false, "grid is not 201x201");
        return map;
    }
    const auto table01 = quantize_pmfs(map, 0.1);
    const auto table02 = quantize_pmfs(map, 0.2);
    const auto table03 = quantize_pmfs(map, 0.3);

    bool pass = table01.entries.size() == 4 && table02.entries.size() == 3 &&
                table03.entries.size() == 2;

    // The published interval boundaries are the handoffs of the reference
    // design SNRs 14.5/18/21/24 dB: each boundary is where one design's
    // 0.1 dB coverage ends. The greedy cover picks farther-reaching designs,
    // so its own boundaries sit slightly higher; both are reported.
    const double arrows[4] = {14.5, 18.0, 21.0, 24.0};
    const double expected[3] = {16.2, 19.3, 22.2};
    std::string bounds = "design handoffs";
    for (int b = 0; b < 3; ++b) {
        const double got = coverage_interval(map, arrows[b], 0.1).second;
        bounds += fmt(" %.1f", got);
        if (std::abs(got - expected[b]) > 0.3) pass = false;
    }
    if (coverage_interval(map, arrows[3], 0.1).second != 25.0) pass = false;

    std::string greedy = "greedy";
    for (const auto& e : table01.entries) greedy += fmt(" %.1f", e.channel_snr_hi_db);

    const std::vector<double> arrow_list(arrows, arrows + 4);
    const bool arrows_ok = arrows_feasible(map, arrow_list, 0.1);
    pass = pass && arrows_ok;

    report(4, "lookup-table sizes 4/3/2 at 0.1/0.2/0.3 dB", pass,
           fmt("sizes %zu/%zu/%zu, %s (ref 16.2/19.3/22.2 +-0.3), %s, design SNRs "
               "14.5/18/21/24 %s, %.0f s",
               table01.entries.size(), table02.entries.size(), table03.entries.size(),
               bounds.c_str(), greedy.c_str(), arrows_ok ? "feasible" : "infeasible",
               seconds_since(t0)));
    return map;
}

void criterion_5_256qam() {
    const auto t0 = std::chrono::steady_clock::now();
    const GainMap map = build_gain_map(16, 5.0, 30.0, 0.1);
    const auto table = quantize_pmfs(map, 0.1);
    const bool pass = table.entries.size() == 4;
    report(5, "256QAM needs four PMFs over 5-30 dB at 0.1 dB", pass,
           fmt("%zu entries, %.0f s", table.entries.size(), seconds_since(t0)));
}

void criterion_6_estimator_agreement() {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    double worst = 0.0;
    for (double snr : {8.0, 14.0, 18.0, 22.0}) {
        for (bool shaped : {true, false}) {
            const ShapedQam q = shaped ? ShapedQam{optimize_shaping(8, SnrDb{snr}).scaled}
                                       : uniform_qam_at_snr(8, SnrDb{snr});
            const double reference = mi_awgn_2d(q, SnrDb{snr}).mi_bits_per_2d;
            const SimConfig cfg{1000000, SnrDb{snr}, 0xC0FFEE + std::uint64_t(snr * 10), q};
            const SimReport rep = run_simulation(cfg);
            worst = std::max(worst, std::abs(rep.air_estimate_bits_per_2d - reference));
        }
    }
    pass = worst < 0.01;

    // Seed determinism at acceptance scale.
    const ShapedQam q = ShapedQam{optimize_shaping(8, SnrDb{18.0}).scaled};
    const SimConfig cfg{1000000, SnrDb{18.0}, 7, q};
    const SimReport a = run_simulation(cfg);
    const SimReport b = run_simulation(cfg);
    const bool deterministic = a.air_estimate_bits_per_2d == b.air_estimate_bits_per_2d &&
                               a.snr_estimate_db == b.snr_estimate_db;
    pass = pass && deterministic;
    report(6, "Monte-Carlo AIR matches quadrature within 0.01 bits at N=1e6", pass,
           fmt("max |air - mi| %.4f bits over {8,14,18,22} dB shaped+uniform, %s, %.0f s", worst,
               deterministic ? "seed-deterministic" : "NON-DETERMINISTIC", seconds_since(t0)));
}

void criterion_7_ebn0_anchor() {
    const double target_2d = 8.8 / 2.0;  // 8.8 bits per DP symbol = 4.4 per 2D
    const double snr_uniform = required_snr_uniform(8, target_2d).value;
    const double eb_uniform = eb_n0_db(SnrDb{snr_uniform}, target_2d);

    // Invert the matched shaped MI curve by bisection; MI is increasing in SNR.
    double lo = 5.0, hi = 25.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double mi = optimize_shaping(8, SnrDb{mid}).mi_bits_per_2d;
        if (mi < target_2d)
            lo = mid;
        else
            hi = mid;
    }
    const double snr_shaped = 0.5 * (lo + hi);
    const double eb_shaped = eb_n0_db(SnrDb{snr_shaped}, target_2d);

    const bool pass = std::abs(eb_uniform - 7.6) <= 0.05 && std::abs(eb_shaped - 6.8) <= 0.05;
    report(7, "8.8 bits per DP symbol at Eb/N0 7.6 dB uniform, 6.8 dB shaped", pass,
           fmt("uniform %.3f dB (7.6 +-0.05), shaped %.3f dB (6.8 +-0.05)", eb_uniform, eb_shaped));
}

void criterion_8_property_suites(const GainMap& map) {
    bool pass = true;
    std::string notes;

    // Maxwell-Boltzmann family basics on the 8-level grid.
    {
        const auto grid = base_grid(8);
        double prev_h = 4.0;
        for (double nu : {0.0, 0.001, 0.01, 0.05, 0.2, 1.0, 10.0}) {
            const auto pmf = mb_pmf(grid, nu);
            double sum = 0.0;
            for (double p : pmf) sum += p;
            if (std::abs(sum - 1.0) > 1e-12) pass = false;
            for (std::size_t i = 0; i < 4; ++i)
                if (pmf[i] != pmf[7 - i]) pass = false;
            for (std::size_t i = 0; i + 1 < 4; ++i)
                if (nu > 0.0 && pmf[i] >= pmf[i + 1]) pass = false;
            const double h = entropy_bits(std::span<const double>(pmf));
            if (h > prev_h + 1e-12) pass = false;
            prev_h = h;
        }
        notes += pass ? "mb ok" : "mb FAILED";
    }

    // MI bounds on a 100-point random test set.
    {
        bool ok = true;
        std::mt19937_64 rng(20260808);
        std::uniform_real_distribution<double> snr_dist(-2.0, 28.0);
        std::uniform_real_distribution<double> nu_dist(0.0, 0.4);
        for (int t = 0; t < 100; ++t) {
            const std::size_t m = (t % 3 == 0) ? 4 : (t % 3 == 1) ? 8 : 16;
            const double snr = snr_dist(rng);
            const auto pmf = mb_pmf(base_grid(m), nu_dist(rng));
            const auto c =
                scaled_to_energy(make_pam(base_grid(m), pmf), one_d_energy_for(SnrDb{snr}));
            const ShapedQam q{c};
            const double mi = mi_awgn_2d(q, SnrDb{snr}).mi_bits_per_2d;
            if (mi > awgn_capacity(SnrDb{snr}) + 1e-9) ok = false;
            if (mi > entropy_bits_2d(q) + 1e-9) ok = false;
        }
        pass = pass && ok;
        notes += ok ? ", mi bounds ok" : ", mi bounds FAILED";
    }

    // Penalty sign and diagonal on the full 201x201 map.
    {
        bool ok = true;
        const std::size_t n = map.channel_grid_db.size();
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (std::abs(map.at(i, i)) >= 1e-6) ok = false;
            for (std::size_t j = 0; j < n; ++j)
                if (map.at(i, j) < -1e-6) {
                    ok = false;
                    break;
                }
        }
        pass = pass && ok;
        notes += ok ? ", penalty sign ok" : ", penalty sign FAILED";
    }

    // Quantizer minimality by exhaustive subset search, k <= 5.
    {
        bool ok = true;
        const std::size_t n = map.channel_grid_db.size();
        for (double thr : {0.1, 0.2, 0.3}) {
            const std::size_t k = quantize_pmfs(map, thr).entries.size();
            const auto intervals = oracles::all_coverage_indices(map, thr);
            if (!oracles::subset_cover_exists(intervals, n, k)) ok = false;
            if (k >= 2 && k <= 5 && oracles::subset_cover_exists(intervals, n, k - 1)) ok = false;
        }
        pass = pass && ok;
        notes += ok ? ", minimality ok" : ", minimality FAILED";
    }

    report(8, "property suites", pass, notes);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1_table_reproduction();
    const GainPeaks curves = criterion_2_peak_gains();
    criterion_3_crossing(curves);
    const GainMap map = criterion_4_quantization();
    criterion_5_256qam();
    criterion_6_estimator_agreement();
    criterion_7_ebn0_anchor();
    criterion_8_property_suites(map);
    std::printf("%s: %d criterion(s) failed, total %.0f s\n", failures == 0 ? "OK" : "FAILED",
                failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
