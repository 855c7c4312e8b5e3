#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcs/detail/math.hpp"

#include "json.hpp"

namespace pcs {

// Signal-to-noise ratio in decibels. All public interfaces carry SNR in dB;
// linear values never cross an API boundary.
struct SnrDb {
    double value = 0.0;

    double linear() const { return detail::db_to_linear(value); }
};

struct SnrLinear {
    double value = 1.0;

    SnrDb db() const { return SnrDb{detail::linear_to_db(value)}; }
};

// Noise convention: the complex channel has total noise power N0 = 1, i.e.
// variance 1/2 per real dimension. The constellation scaling carries the
// power, so a 1D constellation matched to SNR s has energy s_linear / 2.
inline constexpr double kNoiseVariancePerDim = 0.5;

inline double one_d_energy_for(SnrDb snr) { return snr.linear() / 2.0; }

inline bool is_power_of_two(std::size_t m) { return m >= 1 && (m & (m - 1)) == 0; }

// One quadrature of a square QAM constellation: M strictly ascending real
// amplitudes with a probability attached to each.
struct PamConstellation {
    std::vector<double> levels;
    std::vector<double> pmf;

    std::size_t size() const { return levels.size(); }
};

namespace detail {

inline void validate_pam(const PamConstellation& c) {
    const std::size_t m = c.levels.size();
    if (m != c.pmf.size()) throw std::invalid_argument("levels/pmf size mismatch");
    if (m < 2 || !is_power_of_two(m))
        throw std::invalid_argument("constellation size must be a power of two, at least 2");
    double span = 0.0;
    for (std::size_t i = 0; i < m; ++i) span = std::max(span, std::abs(c.levels[i]));
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i + 1 < m && !(c.levels[i] < c.levels[i + 1]))
            throw std::invalid_argument("levels must be strictly ascending");
        if (!(c.pmf[i] > 0.0) || c.pmf[i] > 1.0)
            throw std::invalid_argument("pmf entries must lie in (0, 1]");
        sum += c.pmf[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("pmf must sum to 1");
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t r = m - 1 - i;
        if (std::abs(c.levels[i] + c.levels[r]) > 1e-9 * span)
            throw std::invalid_argument("levels must be antisymmetric about 0");
        if (std::abs(c.pmf[i] - c.pmf[r]) > 1e-9)
            throw std::invalid_argument("pmf must be symmetric");
    }
}

}  // namespace detail

inline PamConstellation make_pam(std::vector<double> levels, std::vector<double> pmf) {
    PamConstellation c{std::move(levels), std::move(pmf)};
    detail::validate_pam(c);
    return c;
}

// Canonical unscaled amplitude grid: the odd integers -(M-1), ..., M-1.
inline std::vector<double> base_grid(std::size_t m) {
    if (m < 2 || !is_power_of_two(m))
        throw std::invalid_argument("M must be a power of two, at least 2");
    std::vector<double> grid(m);
    for (std::size_t i = 0; i < m; ++i)
        grid[i] = -static_cast<double>(m - 1) + 2.0 * static_cast<double>(i);
    return grid;
}

// Maxwell-Boltzmann family over an amplitude grid:
//   P(x_i) = exp(-nu x_i^2) / sum_k exp(-nu x_k^2).
// Weights are computed relative to the most probable level; anything that
// still underflows below 1e-300 is flushed to the smallest normal double
// before normalization, so entries stay strictly positive at any nu.
inline std::vector<double> mb_pmf(std::span<const double> grid, double nu) {
    if (grid.empty()) throw std::invalid_argument("empty grid");
    if (!std::isfinite(nu) || nu < 0.0) throw std::invalid_argument("nu must be finite and >= 0");
    double min_sq = grid[0] * grid[0];
    for (double x : grid) min_sq = std::min(min_sq, x * x);
    std::vector<double> pmf(grid.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double w = std::exp(-nu * (grid[i] * grid[i] - min_sq));
        if (w < 1e-300) w = std::numeric_limits<double>::min();
        pmf[i] = w;
        sum += w;
    }
    for (double& p : pmf) p /= sum;
    return pmf;
}

inline double average_energy(const PamConstellation& c) {
    double e = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) e += c.pmf[i] * c.levels[i] * c.levels[i];
    return e;
}

inline PamConstellation scale(const PamConstellation& c, double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("scaling must be positive and finite");
    PamConstellation out = c;
    for (double& x : out.levels) x *= delta;
    return out;
}

inline PamConstellation scaled_to_energy(const PamConstellation& c, double energy) {
    if (!(energy > 0.0)) throw std::invalid_argument("target energy must be positive");
    return scale(c, std::sqrt(energy / average_energy(c)));
}

inline PamConstellation unit_energy(const PamConstellation& c) {
    return scaled_to_energy(c, 1.0);
}

inline double entropy_bits(std::span<const double> pmf) {
    double h = 0.0;
    for (double p : pmf)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

inline double entropy_bits(const PamConstellation& c) { return entropy_bits(std::span<const double>(c.pmf)); }

inline PamConstellation uniform_pam(std::size_t m) {
    auto grid = base_grid(m);
    std::vector<double> pmf(m, 1.0 / static_cast<double>(m));
    return make_pam(std::move(grid), std::move(pmf));
}

inline PamConstellation uniform_pam_at_snr(std::size_t m, SnrDb snr) {
    return scaled_to_energy(uniform_pam(m), one_d_energy_for(snr));
}

// Square M^2-QAM as the product of one PAM constellation with itself; the 2D
// PMF is the per-dimension product, so energy and entropy double.
struct ShapedQam {
    PamConstellation pam;

    std::size_t qam_order() const { return pam.size() * pam.size(); }
};

inline double energy_2d(const ShapedQam& q) { return 2.0 * average_energy(q.pam); }
inline double entropy_bits_2d(const ShapedQam& q) { return 2.0 * entropy_bits(q.pam); }

inline ShapedQam uniform_qam_at_snr(std::size_t m, SnrDb snr) {
    return ShapedQam{uniform_pam_at_snr(m, snr)};
}

inline void to_json(nlohmann::json& j, const PamConstellation& c) {
    j = nlohmann::json{{"levels", c.levels}, {"pmf", c.pmf}};
}

inline void from_json(const nlohmann::json& j, PamConstellation& c) {
    c = make_pam(j.at("levels").get<std::vector<double>>(),
                 j.at("pmf").get<std::vector<double>>());
}

}  // namespace pcs
