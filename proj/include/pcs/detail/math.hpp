#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace pcs::detail {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kInvSqrtPi = 1.0 / kSqrtPi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Compensated (Kahan) accumulator; keeps long Monte-Carlo sums order-independent
// to within one ulp per block.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// log(sum_k exp(a_k)) with the usual max shift.
inline double log_sum_exp(std::span<const double> a) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : a)
        if (v > m) m = v;
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

// Nearest-value binary search index into an ascending grid; throws when the
// value is not a grid point (within tol).
inline std::size_t grid_index_of(std::span<const double> grid, double value, double tol) {
    std::size_t lo = 0, hi = grid.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (grid[mid] <= value)
            lo = mid;
        else
            hi = mid;
    }
    std::size_t best = lo;
    if (lo + 1 < grid.size() &&
        std::abs(grid[lo + 1] - value) < std::abs(grid[lo] - value))
        best = lo + 1;
    if (std::abs(grid[best] - value) > tol)
        throw std::invalid_argument("value is not on the grid");
    return best;
}

// Ascending dB grid with exact-decimal points: values are built from integer
// millidB so that 5.0 + 112 steps of 0.1 prints as 16.2, not 16.2000...01.
inline std::vector<double> make_db_grid(double lo_db, double hi_db, double step_db) {
    if (!(step_db > 0.0) || !(hi_db >= lo_db))
        throw std::invalid_argument("bad dB grid bounds/step");
    const long long lo_md = std::llround(lo_db * 1000.0);
    const long long step_md = std::llround(step_db * 1000.0);
    if (step_md <= 0) throw std::invalid_argument("dB grid step below 0.001 resolution");
    const long long hi_md = std::llround(hi_db * 1000.0);
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>((hi_md - lo_md) / step_md) + 1);
    for (long long v = lo_md; v <= hi_md; v += step_md)
        grid.push_back(static_cast<double>(v) / 1000.0);
    return grid;
}

}  // namespace pcs::detail
