#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcs/constellation.hpp"
#include "pcs/detail/io.hpp"
#include "pcs/detail/parallel.hpp"
#include "pcs/gain.hpp"
#include "pcs/infotheory.hpp"
#include "pcs/mcsim.hpp"
#include "pcs/mismatch.hpp"
#include "pcs/shaping.hpp"
#include "pcs/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace pcs::cli {

namespace fs = std::filesystem;

// Collects the files a run produced and drops a manifest next to them, so a
// run is reproducible from its output directory alone.
class RunOutputs {
  public:
    RunOutputs(std::string command, std::string out_dir, nlohmann::json parameters)
        : command_(std::move(command)), parameters_(std::move(parameters)), start_(std::chrono::steady_clock::now()) {
        if (!out_dir.empty()) {
            dir_ = fs::path(out_dir);
            fs::create_directories(*dir_);
        }
    }

    bool enabled() const { return dir_.has_value(); }

    void write_text(const std::string& name, const std::string& content) {
        if (!dir_) return;
        const fs::path path = *dir_ / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << content;
        outputs_.push_back(path.string());
    }

    void set_seed(std::uint64_t seed) { seed_ = seed; }

    void finish() {
        if (!dir_) return;
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        nlohmann::json manifest{{"command", command_},
                                {"parameters", parameters_},
                                {"version", kVersion},
                                {"outputs", outputs_},
                                {"wall_time_s", wall}};
        if (seed_) manifest["seed"] = *seed_;
        const fs::path path = *dir_ / "run_manifest.json";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << manifest.dump(2) << '\n';
    }

  private:
    std::string command_;
    nlohmann::json parameters_;
    std::chrono::steady_clock::time_point start_;
    std::optional<fs::path> dir_;
    std::vector<std::string> outputs_;
    std::optional<std::uint64_t> seed_;
};

namespace detail {

inline std::string check_power_of_two(const std::string& s) {
    unsigned long v = 0;
    try {
        v = std::stoul(s);
    } catch (...) {
        return "not an integer";
    }
    if (v < 2 || (v & (v - 1)) != 0) return "must be a power of two, at least 2";
    return {};
}

inline double per_symbol_factor(const std::string& per) {
    if (per == "dp") return 2.0;
    if (per == "2d") return 1.0;
    return 0.5;  // 1d
}

inline std::string trimmed_number(double v) { return pcs::detail::format_double(v); }

}  // namespace detail

struct OptimizeArgs {
    std::size_t m = 8;
    double snr_db = 14.5;
    std::string out_dir;
};

inline int cmd_optimize(const OptimizeArgs& a, std::ostream& out) {
    RunOutputs run("optimize", a.out_dir,
                   {{"m", a.m}, {"snr_db", a.snr_db}});
    const ShapingSolution sol = optimize_shaping(a.m, SnrDb{a.snr_db});
    nlohmann::json j = sol;
    if (a.m == 2)
        j["note"] = "M=2 has a single modulus; shaping has no effect and the uniform PMF is reported";
    const std::string text = j.dump(2) + "\n";
    out << text;
    run.write_text("solution.json", text);
    run.finish();
    return 0;
}

struct CurvesArgs {
    std::size_t m = 8;
    double lo_db = 5.0, hi_db = 25.0, step_db = 0.5;
    std::string per = "dp";
    unsigned workers = 0;
    std::string out_dir;
};

inline int cmd_curves(const CurvesArgs& a, std::ostream& out) {
    RunOutputs run("curves", a.out_dir,
                   {{"m", a.m}, {"lo_db", a.lo_db}, {"hi_db", a.hi_db}, {"step_db", a.step_db}, {"per", a.per}, {"workers", a.workers}});
    const auto grid = pcs::detail::make_db_grid(a.lo_db, a.hi_db, a.step_db);
    const double factor = detail::per_symbol_factor(a.per);

    struct Row {
        double mi_uniform_2d, mi_shaped_2d;
    };
    std::vector<Row> rows(grid.size());
    pcs::detail::parallel_for(grid.size(), a.workers, [&](std::size_t i) {
        const auto cmp = shaped_vs_uniform_mi(a.m, SnrDb{grid[i]});
        rows[i] = Row{cmp.uniform_bits_per_2d, cmp.shaped_bits_per_2d};
    });

    std::ostringstream os;
    os << "# pcshape curves v1, rates per " << a.per << " symbol\n";
    os << "snr_db,mi_uniform,mi_shaped,capacity,eb_n0_uniform_db,eb_n0_shaped_db\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SnrDb snr{grid[i]};
        os << detail::trimmed_number(grid[i]) << ','
           << detail::trimmed_number(factor * rows[i].mi_uniform_2d) << ','
           << detail::trimmed_number(factor * rows[i].mi_shaped_2d) << ','
           << detail::trimmed_number(factor * awgn_capacity(snr)) << ','
           << detail::trimmed_number(eb_n0_db(snr, rows[i].mi_uniform_2d)) << ','
           << detail::trimmed_number(eb_n0_db(snr, rows[i].mi_shaped_2d)) << '\n';
    }
    out << os.str();
    run.write_text("curves.csv", os.str());
    run.finish();
    return 0;
}

struct GainsArgs {
    std::size_t m = 8;
    double lo_db = 5.0, hi_db = 25.0, step_db = 0.1;
    unsigned workers = 0;
    std::string out_dir;
};

inline int cmd_gains(const GainsArgs& a, std::ostream& out) {
    RunOutputs run("gains", a.out_dir,
                   {{"m", a.m}, {"lo_db", a.lo_db}, {"hi_db", a.hi_db}, {"step_db", a.step_db}, {"workers", a.workers}});
    const GainCurve curve = matched_gain_curve(a.m, a.lo_db, a.hi_db, a.step_db, a.workers);
    std::ostringstream os;
    os << "# pcshape gains v1, matched shaping gain over uniform\n";
    os << "snr_db,gain_db\n";
    for (std::size_t i = 0; i < curve.snr_grid_db.size(); ++i)
        os << detail::trimmed_number(curve.snr_grid_db[i]) << ','
           << detail::trimmed_number(curve.gain_db[i]) << '\n';
    out << os.str();
    run.write_text("gains.csv", os.str());
    run.finish();
    return 0;
}

struct SweepArgs {
    std::size_t m = 8;
    double lo_db = 5.0, hi_db = 25.0, step_db = 0.1;
    std::vector<double> thresholds{0.1};
    unsigned workers = 0;
    std::string out_dir;
};

inline int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    nlohmann::json params{{"m", a.m},   {"lo_db", a.lo_db},       {"hi_db", a.hi_db},
                          {"step_db", a.step_db}, {"thresholds", a.thresholds}, {"workers", a.workers}};
    RunOutputs run("sweep", a.out_dir, params);

    const GainMap map = build_gain_map(a.m, a.lo_db, a.hi_db, a.step_db, a.workers);

    std::ostringstream matrix, longfmt;
    write_penalty_matrix_csv(map, matrix);
    write_penalty_long_csv(map, longfmt);
    run.write_text("penalty_matrix.csv", matrix.str());
    run.write_text("penalty_long.csv", longfmt.str());

    nlohmann::json tables = nlohmann::json::array();
    for (double thr : a.thresholds) {
        const PmfLookupTable table = quantize_pmfs(map, thr);
        nlohmann::json j = table;
        tables.push_back(j);
        run.write_text("lookup_table_" + detail::trimmed_number(thr) + "dB.json", j.dump(2) + "\n");
    }
    out << tables.dump(2) << "\n";
    run.finish();
    return 0;
}

struct SimulateArgs {
    std::size_t m = 8;
    double snr_db = 18.0;
    std::optional<double> shaping_snr_db;
    std::uint64_t num_symbols = 1000000;
    std::uint64_t seed = 1;
    std::string input = "shaped";
    std::string variance = "genie";
    std::string out_dir;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    RunOutputs run("simulate", a.out_dir,
                   {{"m", a.m},
                    {"snr_db", a.snr_db},
                    {"shaping_snr_db", a.shaping_snr_db ? nlohmann::json(*a.shaping_snr_db) : nlohmann::json()},
                    {"n", a.num_symbols},
                    {"seed", a.seed},
                    {"input", a.input},
                    {"variance", a.variance}});
    run.set_seed(a.seed);

    const SnrDb channel{a.snr_db};
    ShapedQam qam;
    if (a.input == "uniform") {
        qam = uniform_qam_at_snr(a.m, channel);
    } else {
        const double shaping = a.shaping_snr_db.value_or(a.snr_db);
        const ShapingSolution sol = optimize_shaping(a.m, SnrDb{shaping});
        // A mismatched PMF still transmits at the channel power.
        qam = ShapedQam{scaled_to_energy(sol.scaled, one_d_energy_for(channel))};
    }

    SimConfig cfg{a.num_symbols, channel, a.seed, std::move(qam)};
    const VarianceMode mode =
        (a.variance == "estimated") ? VarianceMode::estimated : VarianceMode::genie;
    const SimReport report = run_simulation(cfg, mode);

    const nlohmann::json j = report;
    const std::string text = j.dump(2) + "\n";
    out << text;
    run.write_text("report.json", text);
    run.finish();
    return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"pcshape: probabilistic constellation shaping toolkit for the AWGN channel"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "read options from an INI/TOML file, one section per subcommand");
    app.require_subcommand(1);

    const CLI::Validator pow2(detail::check_power_of_two, "POW2", "power_of_two");
    const CLI::Validator pos_step = CLI::PositiveNumber;

    OptimizeArgs opt;
    auto* c_opt = app.add_subcommand("optimize", "Optimize the shaped input PMF for one SNR");
    c_opt->add_option("--m", opt.m, "PAM levels per quadrature (QAM order M^2)")->required()->check(pow2);
    c_opt->add_option("--snr", opt.snr_db, "shaping SNR in dB")->required();
    c_opt->add_option("--out", opt.out_dir, "output directory")->envname("PCSHAPE_OUT_DIR");
    c_opt->callback([&] { cmd_optimize(opt, out); });

    CurvesArgs cur;
    auto* c_cur = app.add_subcommand("curves", "AIR, capacity and Eb/N0 curves over an SNR grid");
    c_cur->add_option("--m", cur.m, "PAM levels per quadrature")->required()->check(pow2);
    c_cur->add_option("--lo", cur.lo_db, "grid start, dB");
    c_cur->add_option("--hi", cur.hi_db, "grid end, dB");
    c_cur->add_option("--step", cur.step_db, "grid step, dB")->check(pos_step);
    c_cur->add_option("--per", cur.per, "rate unit: dp, 2d or 1d")
        ->check(CLI::IsMember({"dp", "2d", "1d"}));
    c_cur->add_option("--workers", cur.workers, "worker threads (0 = all cores)");
    c_cur->add_option("--out", cur.out_dir, "output directory")->envname("PCSHAPE_OUT_DIR");
    c_cur->callback([&] { cmd_curves(cur, out); });

    GainsArgs gai;
    auto* c_gai = app.add_subcommand("gains", "Matched shaping sensitivity gain over an SNR grid");
    c_gai->add_option("--m", gai.m, "PAM levels per quadrature")->required()->check(pow2);
    c_gai->add_option("--lo", gai.lo_db, "grid start, dB");
    c_gai->add_option("--hi", gai.hi_db, "grid end, dB");
    c_gai->add_option("--step", gai.step_db, "grid step, dB")->check(pos_step);
    c_gai->add_option("--workers", gai.workers, "worker threads (0 = all cores)");
    c_gai->add_option("--out", gai.out_dir, "output directory")->envname("PCSHAPE_OUT_DIR");
    c_gai->callback([&] { cmd_gains(gai, out); });

    SweepArgs swp;
    auto* c_swp = app.add_subcommand("sweep", "Mismatch penalty map and PMF lookup tables");
    c_swp->add_option("--m", swp.m, "PAM levels per quadrature")->required()->check(pow2);
    c_swp->add_option("--lo", swp.lo_db, "grid start, dB");
    c_swp->add_option("--hi", swp.hi_db, "grid end, dB");
    c_swp->add_option("--step", swp.step_db, "grid step, dB")->check(pos_step);
    c_swp->add_option("--thresholds", swp.thresholds, "penalty thresholds in dB")
        ->delimiter(',')
        ->check(pos_step);
    c_swp->add_option("--workers", swp.workers, "worker threads (0 = all cores)");
    c_swp->add_option("--out", swp.out_dir, "output directory")->envname("PCSHAPE_OUT_DIR");
    c_swp->callback([&] { cmd_sweep(swp, out); });

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo AWGN transceiver pass");
    c_sim->add_option("--m", sim.m, "PAM levels per quadrature")->required()->check(pow2);
    c_sim->add_option("--snr", sim.snr_db, "channel SNR in dB")->required();
    double shaping_snr_tmp = 0.0;
    auto* shaping_opt = c_sim->add_option("--shaping-snr", shaping_snr_tmp,
                                          "shaping SNR in dB (defaults to the channel SNR)");
    c_sim->add_option("--n", sim.num_symbols, "number of symbols")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    c_sim->add_option("--seed", sim.seed, "64-bit RNG seed");
    c_sim->add_option("--input", sim.input, "input distribution: shaped or uniform")
        ->check(CLI::IsMember({"shaped", "uniform"}));
    c_sim->add_option("--variance", sim.variance, "decoder metric variance: genie or estimated")
        ->check(CLI::IsMember({"genie", "estimated"}));
    c_sim->add_option("--out", sim.out_dir, "output directory")->envname("PCSHAPE_OUT_DIR");
    c_sim->callback([&] {
        if (shaping_opt->count() > 0) sim.shaping_snr_db = shaping_snr_tmp;
        cmd_simulate(sim, out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace pcs::cli
