#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "pcs/infotheory.hpp"
#include "pcs/mcsim.hpp"
#include "pcs/shaping.hpp"

using namespace pcs;

namespace {

ShapedQam shaped_qam_at(double snr_db) {
    return ShapedQam{optimize_shaping(8, SnrDb{snr_db}).scaled};
}

}  // namespace

TEST_CASE("sampling is reproducible for a fixed seed") {
    const auto q = shaped_qam_at(18.0);
    const auto a = sample_symbols(q, 1, 42);
    const auto b = sample_symbols(q, 1, 42);
    REQUIRE(a.size() == 1);
    CHECK(a[0] == b[0]);
    const auto c = sample_symbols(q, 1000, 42);
    const auto d = sample_symbols(q, 1000, 43);
    CHECK(c != d);
}

TEST_CASE("uniform input sampling matches multinomial bounds") {
    const auto q = uniform_qam_at_snr(8, SnrDb{18.0});
    const std::size_t n = 200000;
    const auto tx = sample_symbols(q, n, 7);
    std::map<double, std::size_t> counts;
    for (const auto& s : tx) ++counts[s.real()];
    REQUIRE(counts.size() == 8);
    const double p = 1.0 / 8.0;
    const double sigma = std::sqrt(p * (1.0 - p) / double(n));
    for (const auto& [level, count] : counts) {
        const double freq = double(count) / double(n);
        CHECK(std::abs(freq - p) < 3.5 * sigma);
    }
}

TEST_CASE("shaped sampling reproduces the PMF within binomial confidence bounds") {
    // Known-good shaped design point; frequencies must sit within +-0.003,
    // which is > 7 binomial sigma at this block size.
    const auto q = shaped_qam_at(14.5);
    const std::size_t n = 1000000;
    const auto tx = sample_symbols(q, n, 12345);
    std::vector<std::size_t> counts(8, 0);
    for (const auto& s : tx) {
        for (std::size_t k = 0; k < 8; ++k)
            if (s.imag() == q.pam.levels[k]) {
                ++counts[k];
                break;
            }
    }
    for (std::size_t k = 0; k < 8; ++k) {
        const double freq = double(counts[k]) / double(n);
        CHECK(std::abs(freq - q.pam.pmf[k]) < 0.003);
    }
}

TEST_CASE("snr estimate concentrates around the configured value") {
    const auto q = shaped_qam_at(15.0);
    const auto tx = sample_symbols(q, 1000000, 99);
    const auto rx = add_awgn(tx, 1.0, 100);
    // Chi-square concentration: the noise-energy estimate has relative sigma
    // sqrt(2/n) ~ 0.0014, i.e. well under 0.05 dB at n = 1e6.
    CHECK(estimate_snr(tx, rx).value == doctest::Approx(15.0).epsilon(0.0034));
}

TEST_CASE("snr estimate reports the infinity sentinel on a clean channel") {
    const auto q = shaped_qam_at(15.0);
    const auto tx = sample_symbols(q, 16, 1);
    CHECK(std::isinf(estimate_snr(tx, tx).value));
}

TEST_CASE("halving the noise power raises the estimate by 3 dB") {
    const auto q = shaped_qam_at(15.0);
    const auto tx = sample_symbols(q, 400000, 5);
    const auto rx = add_awgn(tx, 0.5, 6);
    CHECK(estimate_snr(tx, rx).value == doctest::Approx(15.0 + 3.0103).epsilon(0.002));
}

TEST_CASE("noiseless AIR equals the empirical input entropy") {
    const auto q = shaped_qam_at(18.0);
    const auto tx = sample_symbols(q, 2000, 3);
    // With rx = tx and a vanishing metric variance every cross term
    // underflows, so the estimate reduces to the empirical -log2 p(x).
    double empirical = 0.0;
    for (const auto& s : tx) {
        for (std::size_t k = 0; k < 8; ++k) {
            if (s.real() == q.pam.levels[k]) empirical -= std::log2(q.pam.pmf[k]);
            if (s.imag() == q.pam.levels[k]) empirical -= std::log2(q.pam.pmf[k]);
        }
    }
    empirical /= double(tx.size());
    const double air = air_gaussian_metric(tx, tx, q, 1e-12);
    CHECK(air == doctest::Approx(empirical).epsilon(1e-12));
    CHECK(air == doctest::Approx(entropy_bits_2d(q)).epsilon(0.05));  // statistical
}

TEST_CASE("a mismatched metric variance lowers the estimated rate") {
    const auto q = shaped_qam_at(12.0);
    const auto tx = sample_symbols(q, 100000, 21);
    const auto rx = add_awgn(tx, 1.0, 22);
    const double matched = air_gaussian_metric(tx, rx, q, 1.0);
    const double mismatched = air_gaussian_metric(tx, rx, q, 2.0);
    CHECK(mismatched < matched);
}

TEST_CASE("estimator converges to the quadrature MI with shrinking tolerance") {
    const double snr = 18.0;
    const auto q = shaped_qam_at(snr);
    const double reference = mi_awgn_2d(q, SnrDb{snr}).mi_bits_per_2d;
    const std::vector<std::pair<std::size_t, double>> stages{
        {10000, 0.05}, {100000, 0.02}, {1000000, 0.01}};
    for (const auto& [n, tol] : stages) {
        const SimReport report = run_simulation(SimConfig{n, SnrDb{snr}, 2024, q});
        CHECK(std::abs(report.air_estimate_bits_per_2d - reference) < tol);
        CHECK(report.air_estimate_bits_per_2d <= entropy_bits_2d(q) + 0.05);
    }
}

TEST_CASE("quadrature MI cross-checked against a long Monte-Carlo run") {
    // Independent oracle for the deterministic integration path.
    const double snr = 16.0;
    const auto q = shaped_qam_at(snr);
    const double reference = mi_awgn_2d(q, SnrDb{snr}).mi_bits_per_2d;
    const SimReport rep = run_simulation(SimConfig{10000000, SnrDb{snr}, 424242, q});
    CHECK(std::abs(rep.air_estimate_bits_per_2d - reference) < 0.005);
}

TEST_CASE("estimated-variance mode stays close to the genie metric") {
    const auto q = shaped_qam_at(14.0);
    const SimConfig cfg{200000, SnrDb{14.0}, 77, q};
    const auto genie = run_simulation(cfg, VarianceMode::genie);
    const auto est = run_simulation(cfg, VarianceMode::estimated);
    CHECK(std::abs(est.air_estimate_bits_per_2d - genie.air_estimate_bits_per_2d) < 0.01);
}

TEST_CASE("identical configs give bit-identical reports") {
    const auto q = shaped_qam_at(16.0);
    const SimConfig cfg{50000, SnrDb{16.0}, 31337, q};
    const auto a = run_simulation(cfg);
    const auto b = run_simulation(cfg);
    CHECK(a.air_estimate_bits_per_2d == b.air_estimate_bits_per_2d);
    CHECK(a.snr_estimate_db == b.snr_estimate_db);
    CHECK(a.symbol_count == b.symbol_count);
    CHECK(a.seed == b.seed);
    nlohmann::json ja = a, jb = b;
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("simulation rejects inconsistent configs") {
    const auto q = shaped_qam_at(16.0);
    CHECK_THROWS_AS(run_simulation(SimConfig{0, SnrDb{16.0}, 1, q}), std::invalid_argument);
    CHECK_THROWS_AS(run_simulation(SimConfig{10, SnrDb{18.0}, 1, q}), std::invalid_argument);
    const auto tx = sample_symbols(q, 10, 1);
    const auto rx = add_awgn(tx, 1.0, 2);
    CHECK_THROWS_AS(air_gaussian_metric(tx, std::span<const Symbol>(rx.data(), 5), q, 1.0),
                    std::invalid_argument);
}
