#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "demuxsr/errors.hpp"
#include "demuxsr/photostats.hpp"
#include "oracles.hpp"

using namespace demuxsr;

namespace {

const SourceEnsemble& fig1_ensemble() {
    static const SourceEnsemble ensemble = symmetric_pair(0.05, 0.025);
    return ensemble;
}

double normal_density(double x, double sigma) {
    return std::exp(-x * x / (2.0 * sigma * sigma)) /
           std::sqrt(2.0 * 3.14159265358979323846 * sigma * sigma);
}

}  // namespace

TEST_CASE("exact detection probability at the centroid") {
    const ModeBasis basis = derivative_mode(TransferFunction::gaussian(1.0));
    const double p = detection_probability_exact(fig1_ensemble(), basis, 0.025);
    CHECK(p == doctest::Approx(6.246e-4).epsilon(1e-3));
    CHECK(p == doctest::Approx(6.246094970448852e-4).epsilon(1e-12));

    const SourceEnsemble single({0.4}, {1.0});
    CHECK(detection_probability_exact(single, basis, 0.4) == 0.0);
}

TEST_CASE("exact detection probability away from the centroid") {
    const ModeBasis basis = derivative_mode(TransferFunction::gaussian(1.0));
    const double p = detection_probability_exact(fig1_ensemble(), basis, 0.0);
    double reference = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        const double x_j = fig1_ensemble().positions()[j];
        const double c = oracles::simpson(
            [&](double y) { return basis.v(y) * basis.u(y - x_j); }, -12.5,
            12.5, 8192);
        reference += 0.5 * c * c;
    }
    CHECK(p == doctest::Approx(reference).epsilon(1e-9));
    // Close to the parallel-axis approximation 0.78125e-3.
    CHECK(p == doctest::Approx(0.78125e-3).epsilon(2e-3));
}

TEST_CASE("linearized probability and parallel-axis identity") {
    CHECK(detection_probability_linearized(fig1_ensemble(), 1.0, 0.025) ==
          doctest::Approx(0.625e-3).epsilon(1e-12));
    CHECK(detection_probability_linearized(SourceEnsemble({0.7}, {1.0}), 1.0,
                                           0.7) == 0.0);

    oracles::ValueStream stream(21);
    for (int trial = 0; trial < 100; ++trial) {
        const double d = stream.uniform(0.0, 0.5);
        const double x_c = stream.uniform(-1.0, 1.0);
        const double sigma = stream.uniform(0.5, 3.0);
        const double x_r = stream.uniform(-1.5, 1.5);
        const SourceEnsemble pair = symmetric_pair(d, x_c);
        const double linear =
            detection_probability_linearized(pair, sigma, x_r);
        const double steiner = steiner_probability(i_centroid(pair, sigma),
                                                   x_c, sigma, x_r);
        CHECK(linear == doctest::Approx(steiner).epsilon(1e-12));
    }
}

TEST_CASE("linearization error grows at fourth order") {
    // Per source the gap is (delta^2/4)(1 - exp(-delta^2/4)) <= delta^4/16.
    const ModeBasis basis = derivative_mode(TransferFunction::gaussian(1.0));
    for (int k = 0; k <= 40; ++k) {
        const double x_r = -0.5 + 0.025 * k;
        const double exact =
            detection_probability_exact(fig1_ensemble(), basis, x_r);
        const double linear =
            detection_probability_linearized(fig1_ensemble(), 1.0, x_r);
        double reach = 0.0;
        for (double x_j : fig1_ensemble().positions())
            reach = std::max(reach, std::abs(x_j - x_r));
        CHECK(std::abs(exact - linear) <= 0.07 * std::pow(reach, 4));
    }
}

TEST_CASE("centroid intensity examples") {
    CHECK(i_centroid(symmetric_pair(0.05, 0.3), 1.0) ==
          doctest::Approx(0.625e-3).epsilon(1e-12));
    CHECK(i_centroid(SourceEnsemble({1.2}, {1.0}), 1.0) == 0.0);
    CHECK(i_centroid(SourceEnsemble({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}),
                     1.0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK_THROWS_AS(i_centroid(symmetric_pair(0.1, 0.0), 0.0), model_error);
}

TEST_CASE("steiner probability") {
    CHECK(steiner_probability(0.625e-3, 0.025, 1.0, 0.025) ==
          doctest::Approx(0.625e-3));
    CHECK(steiner_probability(0.625e-3, 0.025, 1.0, 0.0) ==
          doctest::Approx(0.78125e-3).epsilon(1e-12));
    // The reference position minimizing the intensity is the centroid.
    const double at_centroid = steiner_probability(0.625e-3, 0.025, 1.0, 0.025);
    for (double shift : {-0.1, -0.01, 0.01, 0.1})
        CHECK(steiner_probability(0.625e-3, 0.025, 1.0, 0.025 + shift) >
              at_centroid);
    CHECK_THROWS_AS(steiner_probability(-1e-3, 0.0, 1.0, 0.0), model_error);
}

TEST_CASE("direct-imaging density") {
    const TransferFunction psf = TransferFunction::gaussian(1.0);
    const SourceEnsemble single({0.0}, {1.0});
    for (double x : {-2.0, -0.5, 0.0, 1.0})
        CHECK(direct_pdf(single, psf, x) ==
              doctest::Approx(normal_density(x, 1.0)).epsilon(1e-12));

    const double at_centroid = direct_pdf(fig1_ensemble(), psf, 0.025);
    CHECK(at_centroid ==
          doctest::Approx(0.5 * (normal_density(0.05, 1.0) +
                                 normal_density(-0.05, 1.0)))
              .epsilon(1e-12));

    const double total = oracles::simpson(
        [&](double x) { return direct_pdf(fig1_ensemble(), psf, x); }, -13.0,
        13.0, 8192);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("direct-imaging variance") {
    const TransferFunction psf = TransferFunction::gaussian(1.0);
    CHECK(direct_variance(fig1_ensemble(), psf) ==
          doctest::Approx(1.0025).epsilon(1e-12));
    CHECK(direct_variance(SourceEnsemble({0.3}, {1.0}), psf) ==
          doctest::Approx(1.0).epsilon(1e-12));

    oracles::ValueStream stream(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double d = stream.uniform(0.0, 1.0);
        const double sigma = stream.uniform(0.5, 2.0);
        CHECK(direct_variance(symmetric_pair(d, 0.0),
                              TransferFunction::gaussian(sigma)) ==
              doctest::Approx(sigma * sigma + d * d).epsilon(1e-12));
    }

    // Tabulated PSFs go through quadrature of x^2 u^2.
    std::vector<double> x(4096), u(4096);
    for (int i = 0; i < 4096; ++i) {
        x[i] = -10.0 + 20.0 * i / 4095.0;
        u[i] = psf(x[i]);
    }
    const TransferFunction tabulated = TransferFunction::tabulated(x, u);
    CHECK(direct_variance(fig1_ensemble(), tabulated) ==
          doctest::Approx(1.0025).epsilon(1e-6));
}

TEST_CASE("mode-count sampling") {
    Rng rng(99);
    CHECK(sample_mode_counts(0.0, 1000, rng) == 0);
    CHECK(sample_mode_counts(1.0, 7, rng) == 7);
    CHECK_THROWS_AS(sample_mode_counts(1.5, 10, rng), model_error);
    CHECK_THROWS_AS(sample_mode_counts(-0.1, 10, rng), model_error);

    // Binomial moments at the reference operating point.
    const double p = 0.625e-3;
    const std::int64_t n = 100000;
    const int draws = 30000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i)
        sum += static_cast<double>(sample_mode_counts(p, n, rng));
    const double mean = sum / draws;
    const double expected = p * static_cast<double>(n);
    const double se = std::sqrt(expected * (1.0 - p) / draws);
    CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("position sampling moments") {
    const TransferFunction psf = TransferFunction::gaussian(1.0);
    Rng rng(2024);
    CHECK(sample_positions(fig1_ensemble(), psf, 0, rng).positions.empty());

    const std::int64_t n = 1000000;
    const DirectSamples samples = sample_positions(fig1_ensemble(), psf, n, rng);
    double mean = 0.0;
    for (double x : samples.positions) mean += x;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean - 0.025) <=
          3.0 * std::sqrt(1.0025 / static_cast<double>(n)));

    double var = 0.0;
    for (double x : samples.positions) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    const double se_var = 1.0025 * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::abs(var - 1.0025) <= 3.0 * se_var);
}

TEST_CASE("samplers reject unsupported inputs") {
    std::vector<double> x(128), u(128);
    for (int i = 0; i < 128; ++i) {
        x[i] = -8.0 + 16.0 * i / 127.0;
        u[i] = TransferFunction::gaussian(1.0)(x[i]);
    }
    const TransferFunction tabulated = TransferFunction::tabulated(x, u);
    Rng rng(1);
    CHECK_THROWS_AS(sample_positions(fig1_ensemble(), tabulated, 10, rng),
                    model_error);
}

TEST_CASE("sampling is reproducible bit for bit") {
    const TransferFunction psf = TransferFunction::gaussian(1.0);
    Rng rng_a(77), rng_b(77);
    const DirectSamples a = sample_positions(fig1_ensemble(), psf, 500, rng_a);
    const DirectSamples b = sample_positions(fig1_ensemble(), psf, 500, rng_b);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t i = 0; i < a.positions.size(); ++i)
        CHECK(a.positions[i] == b.positions[i]);

    CHECK(sample_mode_counts(0.3, 1000, rng_a) ==
          sample_mode_counts(0.3, 1000, rng_b));
}
