#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pcs/constellation.hpp"
#include "pcs/detail/math.hpp"

#include "json.hpp"

namespace pcs {

// Counter-style splittable generator (SplitMix64); one explicit 64-bit seed
// reproduces the whole stream, and sub-streams derive from the master seed.
struct SplitMix64 {
    using result_type = std::uint64_t;
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }      // [0, 1)
    double uniform01_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }  // (0, 1]
};

using Symbol = std::complex<double>;

struct SimConfig {
    std::uint64_t num_symbols = 1;
    SnrDb snr_db{};
    std::uint64_t seed = 0;
    ShapedQam constellation;
};

struct SimReport {
    double air_estimate_bits_per_2d = 0.0;
    double snr_estimate_db = 0.0;
    std::uint64_t symbol_count = 0;
    std::uint64_t seed = 0;
};

// I.i.d. draws from the product PMF by per-quadrature inverse-CDF sampling.
inline std::vector<Symbol> sample_symbols(const ShapedQam& q, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("need at least one symbol");
    const std::size_t m = q.pam.size();
    std::vector<double> cdf(m);
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        acc += q.pam.pmf[k];
        cdf[k] = acc;
    }
    cdf[m - 1] = 1.0;

    SplitMix64 rng(seed);
    auto draw = [&]() {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        return q.pam.levels[static_cast<std::size_t>(it - cdf.begin())];
    };
    std::vector<Symbol> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double re = draw();
        const double im = draw();
        out.emplace_back(re, im);
    }
    return out;
}

// Circularly symmetric complex Gaussian noise with the given total variance
// (N0), Box-Muller so streams are identical across standard libraries.
inline std::vector<Symbol> add_awgn(std::span<const Symbol> tx, double total_variance,
                                    std::uint64_t seed) {
    if (!(total_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
    const double sigma = std::sqrt(total_variance / 2.0);
    SplitMix64 rng(seed);
    std::vector<Symbol> rx;
    rx.reserve(tx.size());
    for (const Symbol& x : tx) {
        const double u1 = rng.uniform01_pos();
        const double u2 = rng.uniform01();
        const double r = sigma * std::sqrt(-2.0 * std::log(u1));
        rx.emplace_back(x.real() + r * std::cos(detail::kTwoPi * u2),
                        x.imag() + r * std::sin(detail::kTwoPi * u2));
    }
    return rx;
}

// Monte-Carlo achievable rate for a decoder using circularly symmetric
// Gaussian statistics with the given total variance:
//   (1/N) sum_n log2[ q(y_n|x_n) / sum_x P(x) q(y_n|x) ].
// The metric and the product input both factor per quadrature, so each term
// splits into two 1D log-ratios; the average uses compensated summation so
// block order cannot change the result.
inline double air_gaussian_metric(std::span<const Symbol> tx, std::span<const Symbol> rx,
                                  const ShapedQam& q, double metric_total_variance) {
    if (tx.size() != rx.size()) throw std::invalid_argument("tx/rx length mismatch");
    if (tx.empty()) throw std::invalid_argument("need at least one symbol");
    if (!(metric_total_variance > 0.0)) throw std::invalid_argument("metric variance must be positive");

    const std::size_t m = q.pam.size();
    const double inv2v = 1.0 / metric_total_variance;  // = 1 / (2 * per-dim variance)
    std::vector<double> ln_pmf(m);
    for (std::size_t k = 0; k < m; ++k) ln_pmf[k] = std::log(q.pam.pmf[k]);

    std::vector<double> expo(m);
    auto dim_log_ratio = [&](double x, double y) {
        double max_e = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k) {
            const double d = y - q.pam.levels[k];
            const double e = ln_pmf[k] - d * d * inv2v;
            expo[k] = e;
            if (e > max_e) max_e = e;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += std::exp(expo[k] - max_e);
        const double dxy = y - x;
        return -dxy * dxy * inv2v - (max_e + std::log(s));
    };

    detail::KahanSum nats;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        nats.add(dim_log_ratio(tx[i].real(), rx[i].real()));
        nats.add(dim_log_ratio(tx[i].imag(), rx[i].imag()));
    }
    return nats.value() / (static_cast<double>(tx.size()) * detail::kLn2);
}

// Block SNR estimate from transmitted and received symbols. Zero noise energy
// reports the +infinity sentinel.
inline SnrDb estimate_snr(std::span<const Symbol> tx, std::span<const Symbol> rx) {
    if (tx.size() != rx.size() || tx.size() < 2)
        throw std::invalid_argument("need matched sequences of at least two symbols");
    detail::KahanSum signal, noise;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        signal.add(std::norm(tx[i]));
        noise.add(std::norm(rx[i] - tx[i]));
    }
    if (noise.value() <= 0.0) return SnrDb{std::numeric_limits<double>::infinity()};
    return SnrDb{detail::linear_to_db(signal.value() / noise.value())};
}

enum class VarianceMode {
    genie,      // decoder metric uses the true channel variance
    estimated,  // decoder metric uses the variance measured from the block
};

// Full transceiver pass: shaped source, complex AWGN with N0 = 1, SNR
// estimate and Gaussian-metric AIR. Symbol and noise streams derive from the
// master seed, so a config reproduces its report bit for bit.
inline SimReport run_simulation(const SimConfig& cfg, VarianceMode mode = VarianceMode::genie) {
    if (cfg.num_symbols < 1) throw std::invalid_argument("num_symbols must be at least 1");
    const double want = cfg.snr_db.linear();
    if (std::abs(energy_2d(cfg.constellation) - want) > 1e-6 * want)
        throw std::invalid_argument("constellation is not power-matched to the configured SNR");

    SplitMix64 root(cfg.seed);
    const std::uint64_t symbol_seed = root();
    const std::uint64_t noise_seed = root();

    const auto tx = sample_symbols(cfg.constellation, cfg.num_symbols, symbol_seed);
    const auto rx = add_awgn(tx, 1.0, noise_seed);

    double metric_variance = 1.0;
    if (mode == VarianceMode::estimated) {
        detail::KahanSum noise;
        for (std::size_t i = 0; i < tx.size(); ++i) noise.add(std::norm(rx[i] - tx[i]));
        metric_variance = noise.value() / static_cast<double>(tx.size());
    }

    SimReport report;
    report.air_estimate_bits_per_2d = air_gaussian_metric(tx, rx, cfg.constellation, metric_variance);
    report.snr_estimate_db = estimate_snr(tx, rx).value;
    report.symbol_count = cfg.num_symbols;
    report.seed = cfg.seed;
    return report;
}

inline void to_json(nlohmann::json& j, const SimReport& r) {
    j = nlohmann::json{{"air", r.air_estimate_bits_per_2d},
                       {"snr_est_db", r.snr_estimate_db},
                       {"n", r.symbol_count},
                       {"seed", r.seed}};
}

}  // namespace pcs
