#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcs/constellation.hpp"
#include "pcs/detail/parallel.hpp"
#include "pcs/infotheory.hpp"
#include "pcs/shaping.hpp"

namespace pcs {

// Sensitivity gain over uniform signaling on an SNR grid. Entries where the
// uniform input is within 1e-3 bits of log2(M^2) are flagged saturated: the
// required-SNR inverse is ill-conditioned there and the gain is not reported.
struct GainCurve {
    std::vector<double> snr_grid_db;
    std::vector<double> gain_db;
    std::vector<std::uint8_t> saturated;
};

inline double uniform_mi_2d_at(std::size_t m, SnrDb snr_db, int quad_order = kDefaultQuadOrder) {
    return 2.0 * mi_awgn_1d(uniform_pam_at_snr(m, snr_db), kNoiseVariancePerDim, quad_order);
}

// 2D MI of a fixed PMF over the base grid, rescaled so the transmitted power
// meets the power constraint at snr_db. Only the PMF shape stays mismatched.
inline double mi_2d_with_pmf_at_snr(std::size_t m, std::span<const double> pmf, SnrDb snr_db,
                                    int quad_order = kDefaultQuadOrder) {
    auto grid = base_grid(m);
    double e = 0.0;
    for (std::size_t i = 0; i < m; ++i) e += pmf[i] * grid[i] * grid[i];
    const double delta = std::sqrt(one_d_energy_for(snr_db) / e);
    for (double& x : grid) x *= delta;
    const PamConstellation c = make_pam(std::move(grid), std::vector<double>(pmf.begin(), pmf.end()));
    return 2.0 * mi_awgn_1d(c, kNoiseVariancePerDim, quad_order);
}

namespace detail {

// Monotone root refinement for mi(snr) = target inside a bracket, regula
// falsi with bisection fallback, run until the MI residual is below tol.
template <typename MiFn>
double invert_mi_in_bracket(MiFn&& mi_at, double lo, double hi, double f_lo, double f_hi,
                            double target, double tol_bits) {
    double a = lo, b = hi;
    double fa = f_lo - target, fb = f_hi - target;
    if (fa > 0.0 || fb < 0.0) throw std::domain_error("MI inversion bracket does not straddle target");
    double s = 0.5 * (a + b);
    for (int iter = 0; iter < 120; ++iter) {
        const double denom = fb - fa;
        double cand = (denom != 0.0) ? a - fa * (b - a) / denom : 0.5 * (a + b);
        // Alternate with bisection so degenerate secant steps cannot stall.
        if (iter % 2 == 1 || !(cand > a) || !(cand < b)) cand = 0.5 * (a + b);
        s = cand;
        const double fs = mi_at(s) - target;
        if (std::abs(fs) <= tol_bits || b - a <= 1e-13 * std::max(1.0, std::abs(b))) return s;
        if (fs < 0.0) {
            a = s;
            fa = fs;
        } else {
            b = s;
            fb = fs;
        }
    }
    return s;
}

}  // namespace detail

// Required SNR for uniform M^2-QAM to reach a target 2D MI; bisection on the
// strictly increasing MI-vs-SNR map to an MI residual below 1e-9 bits.
inline SnrDb required_snr_uniform(std::size_t m, double target_mi_2d,
                                  int quad_order = kDefaultQuadOrder) {
    const double max_mi = 2.0 * std::log2(static_cast<double>(m));
    if (!(target_mi_2d > 0.0) || !(target_mi_2d < max_mi))
        throw std::domain_error("target MI must lie strictly inside (0, log2 M^2)");
    auto mi_at = [&](double snr_db) { return uniform_mi_2d_at(m, SnrDb{snr_db}, quad_order); };

    double lo = -40.0, hi = 40.0;
    double f_lo = mi_at(lo), f_hi = mi_at(hi);
    while (f_hi < target_mi_2d) {
        lo = hi;
        f_lo = f_hi;
        hi += 40.0;
        if (hi > 400.0) throw std::domain_error("target MI numerically saturated");
        f_hi = mi_at(hi);
    }
    while (f_lo > target_mi_2d) {
        hi = lo;
        f_hi = f_lo;
        lo -= 40.0;
        if (lo < -400.0) throw std::domain_error("target MI too small to bracket");
        f_lo = mi_at(lo);
    }
    return SnrDb{detail::invert_mi_in_bracket(mi_at, lo, hi, f_lo, f_hi, target_mi_2d, 5e-10)};
}

// Uniform-input MI sampled on a dense dB grid, for fast required-SNR lookups
// during sweeps. The table only brackets; every returned root is refined with
// fresh quadrature evaluations to the same 1e-9-bit residual as the free
// function.
class UniformMiCurve {
  public:
    UniformMiCurve(std::size_t m, double lo_db, double hi_db, double step_db = 0.01,
                   unsigned workers = 0, int quad_order = kDefaultQuadOrder)
        : m_(m), quad_order_(quad_order), grid_db_(detail::make_db_grid(lo_db, hi_db, step_db)) {
        mi_.assign(grid_db_.size(), 0.0);
        detail::parallel_for(grid_db_.size(), workers,
                             [&](std::size_t i) { mi_[i] = uniform_mi_2d_at(m_, SnrDb{grid_db_[i]}, quad_order_); });
    }

    std::size_t m() const { return m_; }
    double saturation_mi_2d() const { return 2.0 * std::log2(static_cast<double>(m_)) - 1e-3; }

    double mi_2d(double snr_db) const { return uniform_mi_2d_at(m_, SnrDb{snr_db}, quad_order_); }

    double required_snr_db(double target_mi_2d) const {
        if (grid_db_.empty() || target_mi_2d <= mi_.front() || target_mi_2d >= mi_.back())
            return required_snr_uniform(m_, target_mi_2d, quad_order_).value;
        const auto it = std::lower_bound(mi_.begin(), mi_.end(), target_mi_2d);
        const std::size_t hi = static_cast<std::size_t>(it - mi_.begin());
        const std::size_t lo = hi - 1;
        auto mi_at = [&](double snr_db) { return mi_2d(snr_db); };
        return detail::invert_mi_in_bracket(mi_at, grid_db_[lo], grid_db_[hi], mi_[lo], mi_[hi],
                                            target_mi_2d, 5e-10);
    }

  private:
    std::size_t m_;
    int quad_order_;
    std::vector<double> grid_db_;
    std::vector<double> mi_;
};

// Sensitivity gain in dB at one channel SNR for an input PMF optimized at
// shaping_snr_db: the SNR a uniform input would need to reach the same MI,
// minus the channel SNR. Rejected in the saturation region, where the
// required-SNR inverse is ill-conditioned and shaping is irrelevant.
inline double sensitivity_gain(std::size_t m, SnrDb channel_snr_db, SnrDb shaping_snr_db,
                               int quad_order = kDefaultQuadOrder) {
    const double mi_uniform = uniform_mi_2d_at(m, channel_snr_db, quad_order);
    if (mi_uniform > 2.0 * std::log2(static_cast<double>(m)) - 1e-3)
        throw std::domain_error("uniform input saturates at this channel SNR; gain undefined");
    const ShapingSolution sol = optimize_shaping(m, shaping_snr_db, quad_order);
    const double mi = mi_2d_with_pmf_at_snr(m, sol.scaled.pmf, channel_snr_db, quad_order);
    return required_snr_uniform(m, mi, quad_order).value - channel_snr_db.value;
}

// Matched-shaping gain over an SNR grid (the shaping SNR tracks the channel).
inline GainCurve matched_gain_curve(std::size_t m, double lo_db, double hi_db, double step_db,
                                    unsigned workers = 0, int quad_order = kDefaultQuadOrder) {
    GainCurve curve;
    curve.snr_grid_db = detail::make_db_grid(lo_db, hi_db, step_db);
    const std::size_t n = curve.snr_grid_db.size();
    curve.gain_db.assign(n, 0.0);
    curve.saturated.assign(n, 0);
    const UniformMiCurve uniform(m, lo_db - 10.0, hi_db + 15.0, 0.01, workers, quad_order);
    detail::parallel_for(n, workers, [&](std::size_t i) {
        const SnrDb snr{curve.snr_grid_db[i]};
        if (uniform.mi_2d(snr.value) > uniform.saturation_mi_2d()) {
            curve.saturated[i] = 1;
            curve.gain_db[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        const ShapingSolution sol = optimize_shaping(m, snr, quad_order);
        curve.gain_db[i] = uniform.required_snr_db(sol.mi_bits_per_2d) - snr.value;
    });
    return curve;
}

}  // namespace pcs
