#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcs/constellation.hpp"
#include "pcs/detail/io.hpp"
#include "pcs/detail/parallel.hpp"
#include "pcs/gain.hpp"
#include "pcs/shaping.hpp"

namespace pcs {

// Dense penalty map over (channel SNR, shaping SNR): matched gain at the
// channel SNR minus the gain of the mismatched PMF, in dB. Rows where the
// uniform input saturates carry zero penalty and a saturation flag; at such
// SNRs shaping is irrelevant and the cells place no quantization constraint.
struct GainMap {
    std::size_t m = 0;
    std::vector<double> channel_grid_db;
    std::vector<double> shaping_grid_db;
    std::vector<double> penalty_db;        // row-major, channel x shaping
    std::vector<std::uint8_t> saturated;   // per channel-SNR row
    std::vector<ShapingSolution> solutions;  // one per shaping-SNR column

    double at(std::size_t channel_idx, std::size_t shaping_idx) const {
        return penalty_db[channel_idx * shaping_grid_db.size() + shaping_idx];
    }
};

// One record of the PMF lookup table: a channel-SNR interval served by a
// single shaped input.
struct PmfTableEntry {
    double channel_snr_lo_db = 0.0;
    double channel_snr_hi_db = 0.0;
    double shaping_snr_db = 0.0;
    std::vector<double> pmf;
    std::vector<double> unit_energy_levels;
};

struct PmfLookupTable {
    std::size_t m = 0;
    double threshold_db = 0.0;
    std::vector<PmfTableEntry> entries;
};

inline PamConstellation entry_constellation(const PmfTableEntry& e) {
    return make_pam(e.unit_energy_levels, e.pmf);
}

inline GainMap build_gain_map(std::size_t m, double lo_db, double hi_db, double step_db,
                              unsigned workers = 0, int quad_order = kDefaultQuadOrder) {
    GainMap map;
    map.m = m;
    map.channel_grid_db = detail::make_db_grid(lo_db, hi_db, step_db);
    map.shaping_grid_db = map.channel_grid_db;
    const std::size_t n = map.channel_grid_db.size();
    map.penalty_db.assign(n * n, 0.0);
    map.saturated.assign(n, 0);

    map.solutions.resize(n);
    detail::parallel_for(n, workers, [&](std::size_t j) {
        map.solutions[j] = optimize_shaping(m, SnrDb{map.shaping_grid_db[j]}, quad_order);
    });

    const UniformMiCurve uniform(m, lo_db - 10.0, hi_db + 15.0, 0.01, workers, quad_order);

    detail::parallel_for(n, workers, [&](std::size_t i) {
        const SnrDb channel{map.channel_grid_db[i]};
        if (uniform.mi_2d(channel.value) > uniform.saturation_mi_2d()) {
            map.saturated[i] = 1;
            return;  // row stays at zero penalty
        }
        const double req_matched = uniform.required_snr_db(map.solutions[i].mi_bits_per_2d);
        double* row = map.penalty_db.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double mi = mi_2d_with_pmf_at_snr(m, map.solutions[j].scaled.pmf, channel, quad_order);
            row[j] = req_matched - uniform.required_snr_db(mi);
        }
    });
    return map;
}

namespace detail {

struct IndexInterval {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

// Maximal contiguous run of channel indices around the diagonal where the
// penalty stays within the threshold. Saturated rows count as zero penalty.
inline IndexInterval coverage_indices(const GainMap& map, std::size_t shaping_idx,
                                      double threshold_db) {
    const std::size_t n = map.channel_grid_db.size();
    const double limit = threshold_db + 1e-9;
    auto ok = [&](std::size_t i) { return map.saturated[i] || map.at(i, shaping_idx) <= limit; };
    IndexInterval iv{shaping_idx, shaping_idx};
    while (iv.lo > 0 && ok(iv.lo - 1)) --iv.lo;
    while (iv.hi + 1 < n && ok(iv.hi + 1)) ++iv.hi;
    return iv;
}

}  // namespace detail

// Channel-SNR interval (in dB) covered by one shaping SNR under a penalty
// threshold; always contains at least the matched point.
inline std::pair<double, double> coverage_interval(const GainMap& map, double shaping_snr_db,
                                                   double threshold_db) {
    if (!(threshold_db > 0.0)) throw std::invalid_argument("threshold must be positive");
    const std::size_t j =
        detail::grid_index_of(map.shaping_grid_db, shaping_snr_db, 1e-9);
    const auto iv = detail::coverage_indices(map, j, threshold_db);
    return {map.channel_grid_db[iv.lo], map.channel_grid_db[iv.hi]};
}

// Minimum-cardinality set of shaped inputs whose coverage intervals tile the
// channel-SNR range under the threshold. Greedy covering from the low end:
// among all candidates reaching the current position, take the one extending
// farthest right, which is minimal for interval covering. Each emitted
// interval is represented by the candidate containing it with the largest
// two-sided margin; adjacent intervals share their boundary grid point.
inline PmfLookupTable quantize_pmfs(const GainMap& map, double threshold_db) {
    if (!(threshold_db > 0.0)) throw std::invalid_argument("threshold must be positive");
    const std::size_t n = map.channel_grid_db.size();
    std::vector<detail::IndexInterval> cov(n);
    for (std::size_t j = 0; j < n; ++j) cov[j] = detail::coverage_indices(map, j, threshold_db);

    PmfLookupTable table;
    table.m = map.m;
    table.threshold_db = threshold_db;

    std::size_t pos = 0;
    for (;;) {
        std::size_t best_j = n, best_hi = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (cov[j].lo > pos) continue;
            if (best_j == n || cov[j].hi > best_hi) {
                best_j = j;
                best_hi = cov[j].hi;
            }
        }
        if (best_j == n || (best_hi == pos && pos + 1 < n))
            throw std::domain_error("threshold too small to tile the SNR range on this grid");

        std::size_t rep = best_j;
        long long rep_margin = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (cov[j].lo > pos || cov[j].hi < best_hi) continue;
            const long long margin = static_cast<long long>(
                std::min(pos - cov[j].lo, cov[j].hi - best_hi));
            if (margin > rep_margin) {
                rep_margin = margin;
                rep = j;
            }
        }

        PmfTableEntry entry;
        entry.channel_snr_lo_db = map.channel_grid_db[pos];
        entry.channel_snr_hi_db = map.channel_grid_db[best_hi];
        entry.shaping_snr_db = map.shaping_grid_db[rep];
        entry.pmf = map.solutions[rep].unit.pmf;
        entry.unit_energy_levels = map.solutions[rep].unit.levels;
        table.entries.push_back(std::move(entry));

        if (best_hi + 1 >= n) break;
        pos = best_hi;
    }
    return table;
}

// Checks that a given ascending list of shaping SNRs tiles the full channel
// range under the threshold, in order.
inline bool arrows_feasible(const GainMap& map, std::span<const double> shaping_snrs_db,
                            double threshold_db) {
    const std::size_t n = map.channel_grid_db.size();
    std::size_t pos = 0;
    bool started = false;
    for (double s : shaping_snrs_db) {
        const std::size_t j = detail::grid_index_of(map.shaping_grid_db, s, 1e-9);
        const auto iv = detail::coverage_indices(map, j, threshold_db);
        if (!started) {
            if (iv.lo > 0) return false;
            started = true;
        } else if (iv.lo > pos) {
            return false;
        }
        pos = std::max(pos, iv.hi);
    }
    return started && pos + 1 == n;
}

inline void write_penalty_matrix_csv(const GainMap& map, std::ostream& os) {
    os << "# pcshape penalty matrix v1: rows channel_snr_db, columns shaping_snr_db\n";
    os << "channel_snr_db";
    for (double s : map.shaping_grid_db) os << ',' << detail::format_double(s);
    os << '\n';
    const std::size_t n = map.shaping_grid_db.size();
    for (std::size_t i = 0; i < map.channel_grid_db.size(); ++i) {
        os << detail::format_double(map.channel_grid_db[i]);
        for (std::size_t j = 0; j < n; ++j) os << ',' << detail::format_double(map.at(i, j));
        os << '\n';
    }
}

inline void write_penalty_long_csv(const GainMap& map, std::ostream& os) {
    os << "# pcshape penalty long v1\n";
    os << "channel_snr_db,shaping_snr_db,penalty_db,saturated\n";
    for (std::size_t i = 0; i < map.channel_grid_db.size(); ++i)
        for (std::size_t j = 0; j < map.shaping_grid_db.size(); ++j)
            os << detail::format_double(map.channel_grid_db[i]) << ','
               << detail::format_double(map.shaping_grid_db[j]) << ','
               << detail::format_double(map.at(i, j)) << ',' << int(map.saturated[i]) << '\n';
}

inline void to_json(nlohmann::json& j, const PmfTableEntry& e) {
    j = nlohmann::json{{"channel_snr_lo_db", e.channel_snr_lo_db},
                       {"channel_snr_hi_db", e.channel_snr_hi_db},
                       {"shaping_snr_db", e.shaping_snr_db},
                       {"pmf", e.pmf},
                       {"unit_energy_levels", e.unit_energy_levels}};
}

inline void from_json(const nlohmann::json& j, PmfTableEntry& e) {
    j.at("channel_snr_lo_db").get_to(e.channel_snr_lo_db);
    j.at("channel_snr_hi_db").get_to(e.channel_snr_hi_db);
    j.at("shaping_snr_db").get_to(e.shaping_snr_db);
    j.at("pmf").get_to(e.pmf);
    j.at("unit_energy_levels").get_to(e.unit_energy_levels);
}

inline void to_json(nlohmann::json& j, const PmfLookupTable& t) {
    j = nlohmann::json{{"m", t.m},
                       {"qam_order", t.m * t.m},
                       {"threshold_db", t.threshold_db},
                       {"entries", t.entries}};
}

inline void from_json(const nlohmann::json& j, PmfLookupTable& t) {
    j.at("m").get_to(t.m);
    j.at("threshold_db").get_to(t.threshold_db);
    j.at("entries").get_to(t.entries);
}

}  // namespace pcs
