#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcs/constellation.hpp"
#include "pcs/infotheory.hpp"

namespace pcs {

// Result of the per-SNR input optimization: the Maxwell-Boltzmann PMF and
// amplitude scaling that maximize MI under the power constraint.
struct ShapingSolution {
    PamConstellation scaled;       // levels = delta * base grid, energy = snr_linear / 2
    PamConstellation unit;         // same PMF, renormalized to unit 1D energy
    double nu = 0.0;
    double delta = 1.0;
    double mi_bits_per_2d = 0.0;
    SnrDb shaping_snr_db{};
};

namespace detail {

inline double mb_energy_unscaled(std::span<const double> grid, double nu) {
    const auto pmf = mb_pmf(grid, nu);
    double e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) e += pmf[i] * grid[i] * grid[i];
    return e;
}

inline bool single_modulus(std::span<const double> grid) {
    const double first = grid[0] * grid[0];
    for (double x : grid)
        if (std::abs(x * x - first) > 1e-12 * std::max(1.0, first)) return false;
    return true;
}

}  // namespace detail

// Solves sum_i P_nu(x_i) (delta x_i)^2 = target_energy for the unique
// nu >= 0, by bisection on the strictly decreasing energy-in-nu map.
// Rejects targets above the uniform-input energy (nu would be negative) and
// at or below the innermost-level energy (unattainable).
inline double nu_for_power(std::span<const double> grid, double delta, double target_energy) {
    if (grid.size() < 2) throw std::invalid_argument("grid needs at least two levels");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
    if (!(target_energy > 0.0)) throw std::invalid_argument("target energy must be positive");

    const double t = target_energy / (delta * delta);
    double e_uniform = 0.0, e_min = grid[0] * grid[0];
    for (double x : grid) {
        e_uniform += x * x;
        e_min = std::min(e_min, x * x);
    }
    e_uniform /= static_cast<double>(grid.size());

    if (detail::single_modulus(grid)) {
        // A single modulus makes energy independent of nu.
        if (std::abs(t - e_min) <= 1e-9 * std::max(1.0, e_min)) return 0.0;
        throw std::domain_error("target energy unattainable on a single-modulus grid");
    }
    if (t > e_uniform * (1.0 + 1e-12))
        throw std::domain_error("target energy above the uniform-input energy: delta too small");
    if (t >= e_uniform) return 0.0;
    if (t <= e_min)
        throw std::domain_error("target energy at or below the innermost-level energy: unattainable");

    double lo = 0.0, hi = 1.0;
    while (detail::mb_energy_unscaled(grid, hi) > t) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) throw std::domain_error("nu search failed to bracket the target energy");
    }
    double mid = hi;
    for (int iter = 0; iter < 300; ++iter) {
        mid = 0.5 * (lo + hi);
        const double e = detail::mb_energy_unscaled(grid, mid);
        if (std::abs(e - t) <= 1e-13 * t) break;
        if (e > t)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

namespace detail {

struct DeltaEval {
    double delta = 0.0;
    double nu = 0.0;
    std::vector<double> pmf;
    double mi_1d = 0.0;
};

inline DeltaEval eval_delta(std::span<const double> grid, double delta, double target_energy,
                            int quad_order) {
    DeltaEval ev;
    ev.delta = delta;
    ev.nu = nu_for_power(grid, delta, target_energy);
    ev.pmf = mb_pmf(grid, ev.nu);
    std::vector<double> levels(grid.begin(), grid.end());
    for (double& x : levels) x *= delta;
    ev.mi_1d = mi_awgn_1d(make_pam(std::move(levels), ev.pmf), kNoiseVariancePerDim, quad_order);
    return ev;
}

}  // namespace detail

namespace detail {

// Golden-section maximization of MI over the feasible scaling bracket: the
// lower end is the scaling at which the uniform PMF meets the power
// constraint (nu = 0) and the upper end approaches the scaling at which the
// constraint becomes unattainable. Ties within 1e-12 bits resolve toward the
// smaller nu, i.e. the smaller scaling.
inline ShapingSolution optimize_on_grid(std::span<const double> grid, SnrDb shaping_snr_db,
                                        int quad_order) {
    const double target = one_d_energy_for(shaping_snr_db);

    ShapingSolution sol;
    sol.shaping_snr_db = shaping_snr_db;

    if (single_modulus(grid)) {
        // A single modulus leaves nothing to shape; report the uniform input
        // meeting the power constraint.
        const std::size_t m = grid.size();
        sol.nu = 0.0;
        sol.delta = std::sqrt(target / (grid[0] * grid[0]));
        std::vector<double> levels(grid.begin(), grid.end());
        for (double& x : levels) x *= sol.delta;
        sol.scaled = make_pam(std::move(levels), std::vector<double>(m, 1.0 / double(m)));
        sol.unit = unit_energy(sol.scaled);
        sol.mi_bits_per_2d = 2.0 * mi_awgn_1d(sol.scaled, kNoiseVariancePerDim, quad_order);
        return sol;
    }

    double e_uniform = 0.0, e_min = grid[0] * grid[0];
    for (double x : grid) {
        e_uniform += x * x;
        e_min = std::min(e_min, x * x);
    }
    e_uniform /= static_cast<double>(grid.size());

    double lo = std::sqrt(target / e_uniform);
    double hi = std::sqrt(target / e_min) * (1.0 - 1e-6);

    auto evaluate = [&](double delta) { return eval_delta(grid, delta, target, quad_order); };

    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    DeltaEval f1 = evaluate(x1);
    DeltaEval f2 = evaluate(x2);
    DeltaEval best = (f1.mi_1d >= f2.mi_1d) ? f1 : f2;

    while (hi - lo > 1e-7 * hi) {
        if (f1.mi_1d >= f2.mi_1d) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = evaluate(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = evaluate(x2);
        }
        const DeltaEval& cand = (f1.mi_1d >= f2.mi_1d) ? f1 : f2;
        if (cand.mi_1d > best.mi_1d + 1e-12 ||
            (cand.mi_1d > best.mi_1d - 1e-12 && cand.delta < best.delta))
            best = cand;
    }

    sol.nu = best.nu;
    sol.delta = best.delta;
    std::vector<double> levels(grid.begin(), grid.end());
    for (double& x : levels) x *= best.delta;
    sol.scaled = make_pam(std::move(levels), best.pmf);
    sol.unit = unit_energy(sol.scaled);
    sol.mi_bits_per_2d = 2.0 * best.mi_1d;
    return sol;
}

}  // namespace detail

// Maximizes MI over the constellation scaling delta at a fixed shaping SNR;
// the PMF is the Maxwell-Boltzmann member meeting the power constraint at
// each candidate scaling, and MI is unimodal in the scaling.
inline ShapingSolution optimize_shaping(std::size_t m, SnrDb shaping_snr_db,
                                        int quad_order = kDefaultQuadOrder) {
    if (!std::isfinite(shaping_snr_db.value)) throw std::invalid_argument("SNR must be finite");
    const auto grid = base_grid(m);
    return detail::optimize_on_grid(grid, shaping_snr_db, quad_order);
}

struct MiComparison {
    double shaped_bits_per_2d = 0.0;
    double uniform_bits_per_2d = 0.0;
};

// 2D MI of matched-shaped versus uniform input at one channel SNR.
inline MiComparison shaped_vs_uniform_mi(std::size_t m, SnrDb snr_db,
                                         int quad_order = kDefaultQuadOrder) {
    MiComparison out;
    out.shaped_bits_per_2d = optimize_shaping(m, snr_db, quad_order).mi_bits_per_2d;
    out.uniform_bits_per_2d =
        2.0 * mi_awgn_1d(uniform_pam_at_snr(m, snr_db), kNoiseVariancePerDim, quad_order);
    return out;
}

inline void to_json(nlohmann::json& j, const ShapingSolution& s) {
    j = nlohmann::json{{"m", s.scaled.size()},
                       {"qam_order", s.scaled.size() * s.scaled.size()},
                       {"shaping_snr_db", s.shaping_snr_db.value},
                       {"nu", s.nu},
                       {"delta", s.delta},
                       {"mi_bits_per_2d", s.mi_bits_per_2d},
                       {"constellation", s.scaled},
                       {"unit_energy", s.unit}};
}

}  // namespace pcs
