#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "spintrans/dynamics.hpp"
#include "spintrans/oracle.hpp"

using namespace spintrans;

namespace {

double sup_diff(const dynamics::TransferSeries& a, const dynamics::TransferSeries& b) {
    return (a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff();
}

spectra::SpectralData single_mode(double eps) {
    spectra::SpectralData spec;
    spec.eigenvalues = Eigen::VectorXd::Constant(1, eps);
    spec.eigenvectors = Eigen::MatrixXcd::Identity(1, 1);
    return spec;
}

}  // namespace

TEST_CASE("bare transfer basics") {
    const auto chain = model::ChainSpec::uniform(4);
    const auto times = dynamics::time_grid(5.0, 0.01);
    const auto stay = dynamics::bare_transfer(chain, 2, 2, times);
    CHECK(std::abs(stay.amplitudes(0) - 1.0) <= 1e-12);
    const auto hop = dynamics::bare_transfer(chain, 1, 4, times);
    CHECK(std::abs(hop.amplitudes(0)) <= 1e-12);
    CHECK_THROWS_AS(dynamics::bare_transfer(chain, 0, 1, times), std::out_of_range);
    CHECK_THROWS_AS(dynamics::bare_transfer(chain, 1, 5, times), std::out_of_range);
}

TEST_CASE("two-site bare transfer is |sin t|") {
    const auto chain = model::ChainSpec::nearest_neighbor({1.0});
    const auto times = dynamics::time_grid(3.2, 0.001);
    const auto series = dynamics::bare_transfer(chain, 1, 2, times);
    for (int i = 0; i < series.size(); ++i) {
        CHECK(std::abs(series.amplitudes(i)) ==
              doctest::Approx(std::abs(std::sin(series.times(i)))).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("engineered chain reaches perfect transfer at t = pi/2") {
    const int n = 5;
    const auto chain = model::ChainSpec::nearest_neighbor(spectra::engineered_couplings(n));
    Eigen::VectorXd probe(1);
    probe << M_PI / 2.0;
    const auto at_star = dynamics::bare_transfer(chain, 1, n, probe);
    CHECK(std::abs(at_star.amplitudes(0)) >= 1.0 - 1e-12);

    const auto times = dynamics::time_grid(4.0, 0.002);
    const auto series = dynamics::bare_transfer(chain, 1, n, times);
    const auto peak = dynamics::first_peak(series);
    REQUIRE(peak.has_value());
    CHECK(peak->magnitude >= 1.0 - 1e-6);
    CHECK(peak->time == doctest::Approx(M_PI / 2.0).epsilon(1e-4));

    // cross-check against the brute-force propagator with no baths attached
    const auto full = oracle::build_full(chain, model::BathSpec::none(n));
    const auto reference = oracle::oracle_transfer(full, 1, n, times);
    CHECK(sup_diff(series, reference) <= 1e-10);
}

TEST_CASE("exact transfer reduces to bare at G = 0") {
    const auto chain = model::ChainSpec::uniform(7);
    const auto spec = spectra::eigendecompose(chain);
    const auto times = dynamics::time_grid(20.0, 0.05);
    const auto bare = dynamics::bare_transfer(spec, 1, 7, times);
    const auto exact = dynamics::exact_transfer(spectra::dress(spec, 0.0), 1, 7, times);
    CHECK(sup_diff(exact, bare) <= 1e-12);
}

TEST_CASE("exact transfer starts at the identity") {
    const auto spec = spectra::eigendecompose(model::ChainSpec::uniform(5));
    const auto dressed = spectra::dress(spec, 2.0);
    const auto times = dynamics::time_grid(1.0, 0.5);
    for (int target = 1; target <= 5; ++target) {
        const auto series = dynamics::exact_transfer(dressed, 2, target, times);
        const double expected = target == 2 ? 1.0 : 0.0;
        CHECK(std::abs(series.amplitudes(0) - expected) <= 1e-12);
    }
}

TEST_CASE("exact transfer matches the brute-force oracle for a homogeneous bath") {
    const int n = 4;
    const auto chain = model::ChainSpec::uniform(n);
    const auto bath = oracle::random_bath({2, 3, 1, 4}, {1.0, 1.0, 1.0, 1.0}, 99);
    const auto times = dynamics::time_grid(20.0, 0.02);

    const auto spec = spectra::eigendecompose(chain);
    const auto exact = dynamics::exact_transfer(spectra::dress(spec, 1.0), 1, n, times);
    const auto reference = oracle::oracle_transfer(oracle::build_full(chain, bath), 1, n, times);
    CHECK(sup_diff(exact, reference) <= 1e-9);
}

TEST_CASE("weak correction") {
    const auto spec = spectra::eigendecompose(model::ChainSpec::uniform(6));
    SUBCASE("vanishes at G = 0") {
        CHECK(std::abs(dynamics::weak_correction(spec, 1, 6, 3.0, 0.0)) == 0.0);
    }
    SUBCASE("vanishes at t = 0") {
        CHECK(std::abs(dynamics::weak_correction(spec, 1, 6, 0.0, 0.5)) <= 1e-15);
    }
    SUBCASE("zero-mode bracket tends to -t^2/2") {
        // single mode at eps = 1e-4 against the analytic eps -> 0 limit;
        // the truncation error is O(eps t^3)
        const double t = 3.0;
        const auto finite = dynamics::weak_correction(single_mode(1e-4), 1, 1, t, 1.0);
        const auto limit = dynamics::weak_correction(single_mode(0.0), 1, 1, t, 1.0);
        CHECK(std::abs(limit - std::complex<double>(-t * t / 2.0, 0.0)) <= 1e-12);
        CHECK(std::abs(finite - limit) <= 2e-3);
    }
    SUBCASE("corrected series tracks the exact one to higher order") {
        const auto times = dynamics::time_grid(10.0, 0.02);
        const double g = 0.01;
        const auto exact = dynamics::exact_transfer(spectra::dress(spec, g), 1, 6, times);
        const auto bare = dynamics::bare_transfer(spec, 1, 6, times);
        const auto corrected = dynamics::weak_corrected_transfer(spec, 1, 6, times, g);
        const double raw = sup_diff(exact, bare);
        const double refined = sup_diff(exact, corrected);
        CHECK(refined < 0.05 * raw);
    }
}

TEST_CASE("strong-coupling approximation") {
    const auto chain = model::ChainSpec::uniform(10);
    const auto spec = spectra::eigendecompose(chain);

    SUBCASE("zeros of the modulation") {
        const double g = 3.0;
        Eigen::VectorXd times(2);
        times << 0.0, M_PI / (2.0 * g);
        const auto series = dynamics::strong_coupling_approx(spec, 1, 10, times, g);
        CHECK(std::abs(series.amplitudes(1)) <= 1e-12);
    }
    SUBCASE("half-time series contract") {
        const auto times = dynamics::time_grid(8.0, 0.01);
        const auto direct = dynamics::strong_coupling_approx(spec, 1, 10, times, 4.0);
        const auto bare_half = dynamics::bare_transfer(spec, 1, 10, (0.5 * times).eval());
        const auto from_series = dynamics::strong_coupling_approx(bare_half, 4.0);
        CHECK(sup_diff(direct, from_series) == 0.0);
        CHECK((direct.times - times).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK_THROWS_AS(dynamics::strong_coupling_approx(direct, 4.0), std::invalid_argument);
        CHECK_THROWS_AS(dynamics::strong_coupling_approx(bare_half, 0.0), std::invalid_argument);
    }
    SUBCASE("peak survives when 2 t0 is a multiple of pi/G") {
        const auto times = dynamics::time_grid(20.0, 0.005);
        const auto bare = dynamics::bare_transfer(spec, 1, 10, times);
        const auto peak = dynamics::first_peak(bare);
        REQUIRE(peak.has_value());
        const double t0 = peak->time;
        const int j = 3;
        const double g = j * M_PI / (2.0 * t0);
        Eigen::VectorXd probe(1);
        probe << 2.0 * t0;
        const auto approx = dynamics::strong_coupling_approx(spec, 1, 10, probe, g);
        Eigen::VectorXd half(1);
        half << t0;
        const auto bare_at_t0 = dynamics::bare_transfer(spec, 1, 10, half);
        CHECK(std::abs(approx.amplitudes(0)) ==
              doctest::Approx(std::abs(bare_at_t0.amplitudes(0))).epsilon(1e-12));
    }
    SUBCASE("approximation error shrinks monotonically with G") {
        std::vector<double> gap;
        for (const double g : {2.0, 4.0, 8.0, 16.0}) {
            const auto times = dynamics::time_grid(40.0, dynamics::default_dt(g, spec.norm_bound()));
            const auto exact = dynamics::exact_transfer(spectra::dress(spec, g), 1, 10, times);
            const auto approx = dynamics::strong_coupling_approx(spec, 1, 10, times, g);
            gap.push_back(sup_diff(exact, approx));
        }
        CHECK(gap[1] < gap[0]);
        CHECK(gap[2] < gap[1]);
        CHECK(gap[3] < gap[2]);
        // G = 4 level frozen from an independent dense-propagator computation
        CHECK(gap[1] == doctest::Approx(0.4361).epsilon(0.01));
    }
}

TEST_CASE("first peak") {
    SUBCASE("|sin t| sampled finely") {
        const auto chain = model::ChainSpec::nearest_neighbor({1.0});
        const auto times = dynamics::time_grid(4.0, 0.001);
        const auto series = dynamics::bare_transfer(chain, 1, 2, times);
        const auto peak = dynamics::first_peak(series);
        REQUIRE(peak.has_value());
        CHECK(peak->time == doctest::Approx(M_PI / 2.0).epsilon(1e-6));
        CHECK(peak->magnitude == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("monotone series has no peak") {
        dynamics::TransferSeries series;
        series.times = dynamics::time_grid(1.0, 0.1);
        series.amplitudes.resize(series.times.size());
        for (int i = 0; i < series.size(); ++i) {
            series.amplitudes(i) = std::exp(-series.times(i));
        }
        CHECK_FALSE(dynamics::first_peak(series).has_value());
    }
    SUBCASE("constant series has no peak") {
        dynamics::TransferSeries series;
        series.times = dynamics::time_grid(1.0, 0.1);
        series.amplitudes = Eigen::VectorXcd::Constant(series.times.size(), 0.5);
        CHECK_FALSE(dynamics::first_peak(series).has_value());
    }
    SUBCASE("peaks below the floor are skipped") {
        dynamics::TransferSeries series;
        series.times = dynamics::time_grid(1.0, 0.25);
        series.amplitudes.resize(5);
        series.amplitudes << 0.0, 0.04, 0.03, 0.5, 0.2;  // first bump sits under 0.05
        const auto peak = dynamics::first_peak(series);
        REQUIRE(peak.has_value());
        CHECK(peak->magnitude >= 0.5);
    }
    SUBCASE("too few points") {
        dynamics::TransferSeries series;
        series.times = Eigen::VectorXd::Zero(2);
        series.amplitudes = Eigen::VectorXcd::Zero(2);
        CHECK_THROWS_AS(dynamics::first_peak(series), std::invalid_argument);
    }
}

TEST_CASE("global peak") {
    SUBCASE("|sin| on a full period") {
        const auto chain = model::ChainSpec::nearest_neighbor({1.0});
        const auto times = dynamics::time_grid(2.0 * M_PI, 0.001);
        const auto series = dynamics::bare_transfer(chain, 1, 2, times);
        const auto peak = dynamics::global_peak(series);
        CHECK(peak.magnitude == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(peak.time == doctest::Approx(M_PI / 2.0).epsilon(1e-3));
    }
    SUBCASE("zero series") {
        dynamics::TransferSeries series;
        series.times = dynamics::time_grid(1.0, 0.1);
        series.amplitudes = Eigen::VectorXcd::Zero(series.times.size());
        CHECK(dynamics::global_peak(series).magnitude == 0.0);
    }
    SUBCASE("empty series") {
        dynamics::TransferSeries series;
        CHECK_THROWS_AS(dynamics::global_peak(series), std::invalid_argument);
    }
    SUBCASE("uniform ten-site chain: global equals first peak over [0, 20]") {
        const auto spec = spectra::eigendecompose(model::ChainSpec::uniform(10));
        const auto times = dynamics::time_grid(20.0, 0.005);
        const auto series = dynamics::bare_transfer(spec, 1, 10, times);
        const auto first = dynamics::first_peak(series);
        REQUIRE(first.has_value());
        const auto global = dynamics::global_peak(series);
        CHECK(first->time == doctest::Approx(global.time).epsilon(1e-12));
        CHECK(first->magnitude == doctest::Approx(global.magnitude).epsilon(1e-12));
    }
}

TEST_CASE("chain contractivity and full-space unitarity within the reduction") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> draw(0.3, 1.5);
    for (const double g : {0.5, 3.0}) {
        std::vector<double> j(6);
        for (double& x : j) x = draw(rng);
        const auto chain = model::ChainSpec::nearest_neighbor(j);
        const int n = chain.n_sites();
        const auto spec = spectra::eigendecompose(chain);
        const auto dressed = spectra::dress(spec, g);
        const auto times = dynamics::time_grid(15.0, 0.25);

        Eigen::VectorXd chain_sum = Eigen::VectorXd::Zero(times.size());
        Eigen::VectorXd total = Eigen::VectorXd::Zero(times.size());
        for (int site = 1; site <= n; ++site) {
            const auto f = dynamics::exact_transfer(dressed, 1, site, times);
            const auto b = dynamics::exact_bath_transfer(dressed, 1, site, times);
            chain_sum += f.amplitudes.cwiseAbs2();
            total += f.amplitudes.cwiseAbs2() + b.amplitudes.cwiseAbs2();
        }
        CHECK(chain_sum.maxCoeff() <= 1.0 + 1e-9);
        CHECK((total.array() - 1.0).abs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("exact transfer is continuous at G -> 0") {
    const auto spec = spectra::eigendecompose(model::ChainSpec::uniform(6));
    const auto times = dynamics::time_grid(20.0, 0.02);
    const auto bare = dynamics::bare_transfer(spec, 1, 6, times);
    const auto nearly = dynamics::exact_transfer(spectra::dress(spec, 1e-6), 1, 6, times);
    CHECK(sup_diff(nearly, bare) <= 1e-4);
}

TEST_CASE("transfer is symmetric for real symmetric hopping") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> draw(0.2, 2.0);
    std::vector<double> j(6);
    for (double& x : j) x = draw(rng);
    const auto spec = spectra::eigendecompose(model::ChainSpec::nearest_neighbor(j));
    const auto times = dynamics::time_grid(12.0, 0.1);
    const auto forward = dynamics::bare_transfer(spec, 2, 6, times);
    const auto backward = dynamics::bare_transfer(spec, 6, 2, times);
    CHECK(sup_diff(forward, backward) <= 1e-12);

    const auto dressed = spectra::dress(spec, 1.2);
    const auto forward_exact = dynamics::exact_transfer(dressed, 2, 6, times);
    const auto backward_exact = dynamics::exact_transfer(dressed, 6, 2, times);
    CHECK(sup_diff(forward_exact, backward_exact) <= 1e-12);
}

TEST_CASE("transfer is invariant under rotations within degenerate subspaces") {
    // J = [1, 0, 1] disconnects the chain into two identical pairs, so both
    // bare eigenvalues -1 and +1 are doubly degenerate
    const auto chain = model::ChainSpec::nearest_neighbor({1.0, 0.0, 1.0});
    const auto spec = spectra::eigendecompose(chain);
    REQUIRE(std::abs(spec.eigenvalues(0) - spec.eigenvalues(1)) < 1e-12);
    REQUIRE(std::abs(spec.eigenvalues(2) - spec.eigenvalues(3)) < 1e-12);

    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    spectra::SpectralData rotated = spec;
    for (const int base : {0, 2}) {
        const double theta = angle(rng);
        const Eigen::RowVectorXcd r0 = spec.eigenvectors.row(base);
        const Eigen::RowVectorXcd r1 = spec.eigenvectors.row(base + 1);
        rotated.eigenvectors.row(base) = std::cos(theta) * r0 + std::sin(theta) * r1;
        rotated.eigenvectors.row(base + 1) = -std::sin(theta) * r0 + std::cos(theta) * r1;
    }

    const auto times = dynamics::time_grid(10.0, 0.05);
    for (const double g : {0.0, 1.5}) {
        const auto original = dynamics::exact_transfer(spectra::dress(spec, g), 1, 2, times);
        const auto mixed = dynamics::exact_transfer(spectra::dress(rotated, g), 1, 2, times);
        CHECK(sup_diff(original, mixed) <= 1e-10);
    }
}

TEST_CASE("series magnitudes never exceed unity") {
    const auto spec = spectra::eigendecompose(model::ChainSpec::uniform(9));
    const auto times = dynamics::time_grid(25.0, 0.01);
    for (const double g : {0.0, 0.4, 2.0, 6.0}) {
        const auto exact = dynamics::exact_transfer(spectra::dress(spec, g), 1, 9, times);
        CHECK(exact.amplitudes.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
        if (g > 0.0) {
            const auto approx = dynamics::strong_coupling_approx(spec, 1, 9, times, g);
            CHECK(approx.amplitudes.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("time grids") {
    const auto times = dynamics::time_grid(10.0, 0.3);
    CHECK(times(0) == 0.0);
    CHECK(times(times.size() - 1) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(times(1) - times(0) <= 0.3 + 1e-15);
    CHECK_THROWS_AS(dynamics::time_grid(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(dynamics::time_grid(1.0, 0.0), std::invalid_argument);
    CHECK(dynamics::default_dt(0.0, 0.5) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(dynamics::default_dt(4.0, 2.0) == doctest::Approx(0.0125).epsilon(1e-15));
}
