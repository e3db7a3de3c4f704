#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "demuxsr/errors.hpp"
#include "demuxsr/experiment.hpp"
#include "demuxsr/optics.hpp"
#include "oracles.hpp"

using namespace demuxsr;

namespace {

// Independent re-derivation of the noiseless scan fit: closed-form overlap
// intensities and a plain-loop iteratively reweighted affine fit, no
// shared code with the library fitter.
struct PlainFit {
    double i_c;
    double x_c;
};

PlainFit plain_irls_fit(const std::vector<double>& grid,
                        const std::vector<double>& y,
                        const std::vector<double>& photons, double sigma) {
    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    std::vector<double> w(grid.size(), 1.0);
    double a = 0.0, b = 0.0;
    for (int iteration = 0; iteration < 100; ++iteration) {
        double sw = 0.0, sx = 0.0, sxx = 0.0, sz = 0.0, sxz = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double z = y[i] - grid[i] * grid[i] * inv4s2;
            sw += w[i];
            sx += w[i] * grid[i];
            sxx += w[i] * grid[i] * grid[i];
            sz += w[i] * z;
            sxz += w[i] * grid[i] * z;
        }
        const double det = sw * sxx - sx * sx;
        const double a_next = (sxx * sz - sx * sxz) / det;
        const double b_next = (sw * sxz - sx * sz) / det;
        const bool settled =
            std::abs(a_next - a) <= 1e-13 && std::abs(b_next - b) <= 1e-13;
        a = a_next;
        b = b_next;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double floor_p = 0.5 / photons[i];
            double model = a + b * grid[i] + grid[i] * grid[i] * inv4s2;
            model = std::min(std::max(model, floor_p), 1.0 - floor_p);
            w[i] = photons[i] / (model * (1.0 - model));
        }
        if (settled) break;
    }
    PlainFit fit;
    fit.x_c = -2.0 * sigma * sigma * b;
    fit.i_c = a - sigma * sigma * b * b;
    return fit;
}

}  // namespace

TEST_CASE("scan runs are deterministic for a fixed seed") {
    const ExperimentConfig config = parse_config("seed: 33\n");
    const ScanRunResult a = run_scan(config, false);
    const ScanRunResult b = run_scan(config, false);
    REQUIRE(a.dataset.points.size() == b.dataset.points.size());
    for (std::size_t i = 0; i < a.dataset.points.size(); ++i) {
        CHECK(a.dataset.points[i].counts_v == b.dataset.points[i].counts_v);
        CHECK(a.dataset.points[i].photons_allocated ==
              b.dataset.points[i].photons_allocated);
    }
    CHECK(a.fit.i_c_hat == b.fit.i_c_hat);
    CHECK(a.fit.x_c_hat == b.fit.x_c_hat);
}

TEST_CASE("noiseless scan matches an independent refit") {
    const ExperimentConfig config = parse_config("");
    const ScanRunResult run = run_scan(config, true);

    // Rebuild the expected fractions from the closed-form overlap.
    std::vector<double> grid, y, photons;
    const double sigma = config.sigma;
    for (const ScanPoint& point : run.dataset.points) {
        grid.push_back(point.x_r);
        photons.push_back(static_cast<double>(point.photons_allocated));
        double p = 0.0;
        for (std::size_t j = 0; j < config.source_x.size(); ++j) {
            const double delta = config.source_x[j] - point.x_r;
            const double c = delta / (2.0 * sigma) *
                             std::exp(-delta * delta / (8.0 * sigma * sigma));
            p += config.source_w[j] * c * c;
        }
        y.push_back(p);
    }
    const PlainFit reference = plain_irls_fit(grid, y, photons, sigma);
    CHECK(run.fit.i_c_hat == doctest::Approx(reference.i_c).epsilon(1e-10));
    CHECK(run.fit.x_c_hat == doctest::Approx(reference.x_c).epsilon(1e-10));

    // The exact intensity curve is slightly flatter than the parabola, so
    // even the noiseless fit sits a little below the exact value 6.246e-4
    // (and just off the true centroid 0.025).
    CHECK(run.fit.i_c_hat < 6.246094970448852e-4);
    CHECK(run.fit.i_c_hat == doctest::Approx(6.246e-4).epsilon(0.03));
    CHECK(run.fit.x_c_hat == doctest::Approx(0.025).epsilon(0.02));
}

TEST_CASE("repeated study: bias below the exact intensity") {
    const ExperimentConfig config = parse_config("repetitions: 3000\nseed: 2\n");
    const Fig2Result result = replicate_fig2(config, 2);
    REQUIRE(result.i_c_estimates.size() == 3000);

    CHECK(result.mean > 0.59e-3);
    CHECK(result.mean < 0.63e-3);
    CHECK(result.mean < 6.246e-4 - 3.0 * result.sem);

    // Standard error of the mean is the sample spread over sqrt(R).
    CHECK(result.sem ==
          doctest::Approx(result.std_dev / std::sqrt(3000.0)).epsilon(1e-12));

    // Histogram covers every repetition.
    std::int64_t total = 0;
    for (const HistogramBin& bin : result.histogram) total += bin.count;
    CHECK(total == 3000);

    // Gaussian fit agrees with the sample mean at the few-sem level.
    CHECK(std::abs(result.gauss_fit_mean - result.mean) <= 5.0 * result.sem);
}

TEST_CASE("doubling repetitions shrinks the standard error as sqrt(2)") {
    const ExperimentConfig half = parse_config("repetitions: 2000\nseed: 6\n");
    const ExperimentConfig full = parse_config("repetitions: 4000\nseed: 6\n");
    const Fig2Result a = replicate_fig2(half, 2);
    const Fig2Result b = replicate_fig2(full, 2);
    CHECK(a.sem / b.sem == doctest::Approx(std::sqrt(2.0)).epsilon(0.10));
}

TEST_CASE("repetition substreams do not depend on the repetition count") {
    const ExperimentConfig small = parse_config("repetitions: 50\nseed: 8\n");
    const ExperimentConfig large = parse_config("repetitions: 100\nseed: 8\n");
    const Fig2Result a = replicate_fig2(small, 1);
    const Fig2Result b = replicate_fig2(large, 1);
    for (std::size_t k = 0; k < 50; ++k)
        CHECK(a.i_c_estimates[k] == b.i_c_estimates[k]);
}

TEST_CASE("thread count never changes results") {
    const ExperimentConfig config = parse_config("repetitions: 400\nseed: 13\n");
    const Fig2Result serial = replicate_fig2(config, 1);
    const Fig2Result threaded = replicate_fig2(config, 4);
    REQUIRE(serial.i_c_estimates.size() == threaded.i_c_estimates.size());
    for (std::size_t k = 0; k < serial.i_c_estimates.size(); ++k)
        CHECK(serial.i_c_estimates[k] == threaded.i_c_estimates[k]);
    CHECK(serial.mean == threaded.mean);
}

TEST_CASE("explicit scan grids and proportional allocation") {
    const ExperimentConfig config = parse_config(
        "scan_grid: [0.1, -0.1, 0.0, 0.2, -0.2, 0.15, -0.15]\n"
        "allocation: proportional\nn_photons: 5000\nseed: 3\n");
    const ScanRunResult run = run_scan(config, false);
    REQUIRE(run.dataset.points.size() == 7);
    // Points are processed in ascending order regardless of config order.
    for (std::size_t i = 1; i < run.dataset.points.size(); ++i)
        CHECK(run.dataset.points[i].x_r > run.dataset.points[i - 1].x_r);
    std::int64_t total = 0;
    for (const ScanPoint& point : run.dataset.points) {
        CHECK(point.photons_allocated >= 1);
        CHECK(point.counts_v <= point.photons_allocated);
        total += point.photons_allocated;
    }
    CHECK(total == 5000);
    CHECK(run.dataset.points.front().photons_allocated >
          run.dataset.points[3].photons_allocated);
    CHECK(run.fit.dof == 5);
}

TEST_CASE("histogram bin override") {
    const ExperimentConfig config =
        parse_config("repetitions: 500\nhistogram_bins: 12\nseed: 4\n");
    const Fig2Result result = replicate_fig2(config, 1);
    CHECK(result.histogram.size() == 12);
}

TEST_CASE("precision sweep columns") {
    const ExperimentConfig config = parse_config(
        "sweep_d: [0.01, 0.025, 0.05, 0.1]\nsweep_n: [100000]\n"
        "repetitions: 1200\nseed: 10\n");
    const std::vector<SweepRow> rows = sweep_precision(config, 2);
    REQUIRE(rows.size() == 4);

    // The demultiplexing bound barely moves across the sweep...
    double lo = 1e9, hi = 0.0;
    for (const SweepRow& row : rows) {
        lo = std::min(lo, row.demux_crlb);
        hi = std::max(hi, row.demux_crlb);
    }
    CHECK((hi - lo) / lo <= 0.002);

    // ...while the direct-imaging bound doubles whenever d halves.
    CHECK(rows[0].direct_crlb / rows[2].direct_crlb ==
          doctest::Approx(5.0).epsilon(0.10));
    CHECK(rows[2].direct_crlb / rows[3].direct_crlb ==
          doctest::Approx(2.0).epsilon(0.10));

    // Monte-Carlo spread tracks the bound away from the few-count regime.
    CHECK(rows[2].demux_mc_std ==
          doctest::Approx(rows[2].demux_crlb).epsilon(0.10));

    // Reference contrast at d = 0.05, N = 1e5.
    CHECK(rows[2].direct_crlb ==
          doctest::Approx(0.0894).epsilon(0.10));
    CHECK(rows[2].direct_crlb / rows[2].demux_crlb >= 20.0);

    const ExperimentConfig bad =
        parse_config("sweep_d: [3.0]\nsweep_n: [1000]\n");
    CHECK_THROWS_AS(sweep_precision(bad, 1), model_error);
}

TEST_CASE("qubit report fields") {
    const std::string text = report_qubit(1e-3, 1e-3, 10000);
    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j["schema"] == "demux-sr/v1");
    CHECK(std::abs(j["qfi"][0][0].get<double>() - 1.0) <= 1e-5);
    CHECK(std::abs(j["qfi"][1][1].get<double>() - 1.0) <= 1e-5);
    CHECK(std::abs(j["qfi"][0][1].get<double>()) <= 1e-5);
    CHECK(j["traced_commutator"].get<double>() <= 1e-10);
    CHECK(j["bases_commute"].get<bool>() == false);
    CHECK(j["bounds"]["delta_eps"].get<double>() ==
          doctest::Approx(0.01).epsilon(1e-4));

    CHECK_THROWS_AS(report_qubit(0.0, 0.0, 100), singular_model_error);
}
