#include "demuxsr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "demuxsr/errors.hpp"
#include "demuxsr/io_util.hpp"
#include "demuxsr/optics.hpp"
#include "demuxsr/parallel.hpp"
#include "demuxsr/qubit_model.hpp"
#include "demuxsr/rng.hpp"

namespace demuxsr {

namespace {

ModeBasis basis_for(const ExperimentConfig& config) {
    if (config.psf_path.empty())
        return derivative_mode(TransferFunction::gaussian(config.sigma));
    return derivative_mode(TransferFunction::load(config.psf_path));
}

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
             static_cast<double>(xs.size());
    if (xs.size() < 2) return m;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return m;
}

std::vector<HistogramBin> build_histogram(const std::vector<double>& xs,
                                          int bins_override) {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    int bins = bins_override;
    if (bins <= 0) {
        // Freedman-Diaconis; falls back to a single bin for degenerate data.
        const std::size_t n = sorted.size();
        const double q1 = sorted[n / 4];
        const double q3 = sorted[(3 * n) / 4];
        const double width = 2.0 * (q3 - q1) /
                             std::cbrt(static_cast<double>(n));
        bins = width > 0.0 && hi > lo
                   ? static_cast<int>(std::ceil((hi - lo) / width))
                   : 1;
        bins = std::clamp(bins, 1, 100000);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<HistogramBin> histogram(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        histogram[static_cast<std::size_t>(b)].left =
            lo + span * static_cast<double>(b) / static_cast<double>(bins);
        histogram[static_cast<std::size_t>(b)].right =
            lo + span * static_cast<double>(b + 1) / static_cast<double>(bins);
    }
    for (double x : xs) {
        auto b = static_cast<int>((x - lo) / span * static_cast<double>(bins));
        b = std::clamp(b, 0, bins - 1);
        ++histogram[static_cast<std::size_t>(b)].count;
    }
    return histogram;
}

// Least-squares Gaussian a exp(-(x - mu)^2 / 2 s^2) through bin centres,
// Gauss-Newton with step halving.
Moments gaussian_fit(const std::vector<HistogramBin>& histogram,
                     const Moments& init) {
    Moments fit = init;
    if (histogram.size() < 4 || !(init.std_dev > 0.0)) return fit;
    std::vector<double> x(histogram.size());
    std::vector<double> y(histogram.size());
    double amplitude = 0.0;
    for (std::size_t i = 0; i < histogram.size(); ++i) {
        x[i] = 0.5 * (histogram[i].left + histogram[i].right);
        y[i] = static_cast<double>(histogram[i].count);
        amplitude = std::max(amplitude, y[i]);
    }
    Eigen::Vector3d params(amplitude, init.mean, init.std_dev);
    const auto sse = [&](const Eigen::Vector3d& p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = (x[i] - p(1)) / p(2);
            const double r = p(0) * std::exp(-0.5 * t * t) - y[i];
            acc += r * r;
        }
        return acc;
    };
    double current = sse(params);
    for (int iter = 0; iter < 60; ++iter) {
        Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
        Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = (x[i] - params(1)) / params(2);
            const double e = std::exp(-0.5 * t * t);
            const double f = params(0) * e;
            const Eigen::Vector3d jac(e, f * t / params(2),
                                      f * t * t / params(2));
            normal += jac * jac.transpose();
            rhs += jac * (y[i] - f);
        }
        normal.diagonal() += Eigen::Vector3d::Constant(1e-12);
        Eigen::Vector3d step = normal.ldlt().solve(rhs);
        double scale = 1.0;
        bool improved = false;
        for (int half = 0; half < 12; ++half) {
            Eigen::Vector3d trial = params + scale * step;
            if (trial(2) > 0.0) {
                const double trial_sse = sse(trial);
                if (trial_sse < current) {
                    params = trial;
                    current = trial_sse;
                    improved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!improved) break;
    }
    fit.mean = params(1);
    fit.std_dev = std::abs(params(2));
    return fit;
}

void metadata_header(std::ostream& out, const std::string& kind,
                     const ExperimentConfig& config) {
    out << "# demux-sr/v1 " << kind << "\n";
    out << "# seed: " << config.seed << "\n";
    out << "# config_hash: " << config.hash() << "\n";
    out << "# sigma: " << fmt_double(config.sigma) << "\n";
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write output file: " + path);
    return out;
}

nlohmann::json json_skeleton(const std::string& kind,
                             const ExperimentConfig& config) {
    nlohmann::json j;
    j["schema"] = "demux-sr/v1";
    j["kind"] = kind;
    j["seed"] = config.seed;
    j["config_hash"] = config.hash();
    return j;
}

}  // namespace

std::vector<std::int64_t> allocate_photons(std::int64_t n_photons,
                                           const std::vector<double>& grid,
                                           const std::string& allocation) {
    const auto points = static_cast<std::int64_t>(grid.size());
    if (points < 1) throw model_error("allocate_photons: empty grid");
    if (n_photons < points)
        throw model_error("allocate_photons: need at least one photon per point");
    std::vector<std::int64_t> shares(grid.size(), 0);
    if (allocation == "equal") {
        const std::int64_t base = n_photons / points;
        const std::int64_t remainder = n_photons % points;
        for (std::int64_t i = 0; i < points; ++i)
            shares[static_cast<std::size_t>(i)] = base + (i < remainder ? 1 : 0);
        return shares;
    }
    if (allocation != "proportional")
        throw model_error("allocate_photons: unknown allocation '" +
                          allocation + "'");
    // Weight grows linearly with distance from the grid centre (wings pin
    // down slope and curvature of the parabola). Largest-remainder split
    // on top of one guaranteed photon per point.
    const double mid = 0.5 * (grid.front() + grid.back());
    const double half_span =
        std::max(std::abs(grid.front() - mid), std::abs(grid.back() - mid));
    std::vector<double> weight(grid.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        weight[i] = half_span > 0.0
                        ? 1.0 + std::abs(grid[i] - mid) / half_span
                        : 1.0;
        total += weight[i];
    }
    std::int64_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders(grid.size());
    const auto spare = n_photons - points;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = static_cast<double>(spare) * weight[i] / total;
        const auto floor_share = static_cast<std::int64_t>(std::floor(exact));
        shares[i] = 1 + floor_share;
        assigned += 1 + floor_share;
        remainders[i] = {exact - std::floor(exact), i};
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                  return a.first != b.first ? a.first > b.first
                                            : a.second < b.second;
              });
    for (std::size_t k = 0; assigned < n_photons; ++k, ++assigned)
        ++shares[remainders[k % remainders.size()].second];
    return shares;
}

ScanRunResult run_scan(const ExperimentConfig& config, bool expected_counts,
                       std::uint64_t rep_index) {
    const SourceEnsemble ensemble = config.ensemble();
    const ModeBasis basis = basis_for(config);
    std::vector<double> grid = config.grid_positions();
    std::sort(grid.begin(), grid.end());
    const std::vector<std::int64_t> shares =
        allocate_photons(config.n_photons, grid, config.allocation);

    ScanRunResult run;
    run.noiseless = expected_counts;
    run.dataset.sigma = config.sigma;
    run.dataset.seed = config.seed;
    run.fractions.resize(grid.size());
    run.dataset.points.resize(grid.size());

    Rng rng = Rng::substream(config.seed, rep_index);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p = detection_probability_exact(ensemble, basis, grid[i]);
        ScanPoint& point = run.dataset.points[i];
        point.x_r = grid[i];
        point.photons_allocated = shares[i];
        if (expected_counts) {
            run.fractions[i] = p;
            point.counts_v = std::llround(p * static_cast<double>(shares[i]));
        } else {
            point.counts_v = sample_mode_counts(p, shares[i], rng);
            run.fractions[i] = static_cast<double>(point.counts_v) /
                               static_cast<double>(shares[i]);
        }
    }
    run.fit = fit_parabola(grid, run.fractions, shares, config.sigma);
    return run;
}

Fig2Result replicate_fig2(const ExperimentConfig& config, int threads) {
    const int reps = config.repetitions;
    Fig2Result result;
    result.i_c_estimates.resize(static_cast<std::size_t>(reps));
    result.x_c_estimates.resize(static_cast<std::size_t>(reps));
    parallel_for_index(reps, threads, [&](std::int64_t rep) {
        const ScanRunResult run =
            run_scan(config, false, static_cast<std::uint64_t>(rep));
        result.i_c_estimates[static_cast<std::size_t>(rep)] = run.fit.i_c_hat;
        result.x_c_estimates[static_cast<std::size_t>(rep)] = run.fit.x_c_hat;
    });
    const Moments m = moments(result.i_c_estimates);
    result.mean = m.mean;
    result.std_dev = m.std_dev;
    result.sem = m.std_dev / std::sqrt(static_cast<double>(reps));
    result.histogram =
        build_histogram(result.i_c_estimates, config.histogram_bins);
    const Moments fit = gaussian_fit(result.histogram, m);
    result.gauss_fit_mean = fit.mean;
    result.gauss_fit_sigma = fit.std_dev;
    return result;
}

std::vector<SweepRow> sweep_precision(const ExperimentConfig& config,
                                      int threads) {
    if (config.sweep_d.empty() || config.sweep_n.empty())
        throw config_error("sweep: sweep_d and sweep_n must be nonempty");
    const ModeBasis basis =
        derivative_mode(TransferFunction::gaussian(config.sigma));
    std::vector<SweepRow> rows;
    for (double d : config.sweep_d) {
        if (!(d > 0.0) || d >= 2.0 * config.sigma)
            throw model_error("sweep: d must satisfy 0 < d < 2 sigma");
        const SourceEnsemble pair = symmetric_pair(d, 0.0);
        const double p = detection_probability_exact(pair, basis, 0.0);
        const double f_direct = fisher_direct(d, config.sigma);
        for (double n_raw : config.sweep_n) {
            const auto n = static_cast<std::int64_t>(std::llround(n_raw));
            if (n < 1) throw model_error("sweep: photon counts must be >= 1");
            std::vector<double> d_hat(
                static_cast<std::size_t>(config.repetitions));
            parallel_for_index(config.repetitions, threads,
                               [&](std::int64_t rep) {
                Rng rng = Rng::substream(config.seed,
                                         static_cast<std::uint64_t>(rep));
                const std::int64_t counts = rng.binomial(n, p);
                d_hat[static_cast<std::size_t>(rep)] =
                    mle_separation(counts, n, config.sigma).value;
            });
            SweepRow row;
            row.d = d;
            row.n_photons = n;
            row.demux_mc_std = moments(d_hat).std_dev;
            row.demux_crlb =
                1.0 / std::sqrt(static_cast<double>(n) *
                                fisher_demux(d, config.sigma));
            row.direct_crlb =
                1.0 / std::sqrt(static_cast<double>(n) * f_direct);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string report_qubit(double eps, double theta, std::int64_t n) {
    const QubitState state = density_matrix(eps, theta);
    const BlochVector bloch = bloch_vector(state);
    const Eigen::Matrix2d info = qfi_matrix(eps, theta);
    const PrecisionBounds bounds = precision_bounds(eps, theta, n);
    const CompatibilityDiagnostics diag = compatibility_diagnostics(eps, theta);

    nlohmann::json j;
    j["schema"] = "demux-sr/v1";
    j["kind"] = "qubit_report";
    j["eps"] = eps;
    j["theta"] = theta;
    j["n_photons"] = n;
    j["bloch"] = {bloch.s1, bloch.s2, bloch.s3};
    j["qfi"] = {{info(0, 0), info(0, 1)}, {info(1, 0), info(1, 1)}};
    j["bounds"] = {{"delta_eps", bounds.delta_eps},
                   {"delta_theta", bounds.delta_theta}};
    j["traced_commutator"] = diag.traced_commutator;
    j["sld_commutator_norm"] = diag.sld_commutator_norm;
    j["bases_commute"] = diag.bases_commute;
    return j.dump(2) + "\n";
}

void write_scan_csv(const std::string& path, const ScanRunResult& run,
                    const ExperimentConfig& config) {
    std::ofstream out = open_output(path);
    metadata_header(out, run.noiseless ? "scan expected-counts" : "scan",
                    config);
    out << "x_R,photons_allocated,counts_v\n";
    for (std::size_t i = 0; i < run.dataset.points.size(); ++i) {
        const ScanPoint& point = run.dataset.points[i];
        out << fmt_double(point.x_r) << "," << point.photons_allocated << ",";
        if (run.noiseless)
            out << fmt_double(run.fractions[i] *
                              static_cast<double>(point.photons_allocated));
        else
            out << point.counts_v;
        out << "\n";
    }
}

void write_fit_json(const std::string& path, const ParabolaFitResult& fit,
                    const ExperimentConfig& config) {
    nlohmann::json j = json_skeleton("scan_fit", config);
    j["i_c_hat"] = fit.i_c_hat;
    j["x_c_hat"] = fit.x_c_hat;
    j["cov"] = {{fit.covariance(0, 0), fit.covariance(0, 1)},
                {fit.covariance(1, 0), fit.covariance(1, 1)}};
    j["chi_square"] = fit.chi_square;
    j["dof"] = fit.dof;
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_fig2_csv(const std::string& path, const Fig2Result& result,
                    const ExperimentConfig& config) {
    std::ofstream out = open_output(path);
    metadata_header(out, "fig2 histogram", config);
    out << "# repetitions: " << config.repetitions << "\n";
    out << "# mean: " << fmt_double(result.mean) << "\n";
    out << "# sem: " << fmt_double(result.sem) << "\n";
    out << "# gauss_fit_mean: " << fmt_double(result.gauss_fit_mean) << "\n";
    out << "bin_left,bin_right,count\n";
    for (const HistogramBin& bin : result.histogram)
        out << fmt_double(bin.left) << "," << fmt_double(bin.right) << ","
            << bin.count << "\n";
}

void write_fig2_json(const std::string& path, const Fig2Result& result,
                     const ExperimentConfig& config) {
    nlohmann::json j = json_skeleton("fig2_summary", config);
    j["repetitions"] = config.repetitions;
    j["n_photons"] = config.n_photons;
    j["mean"] = result.mean;
    j["std"] = result.std_dev;
    j["sem"] = result.sem;
    j["gauss_fit_mean"] = result.gauss_fit_mean;
    j["gauss_fit_sigma"] = result.gauss_fit_sigma;
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows,
                     const ExperimentConfig& config) {
    std::ofstream out = open_output(path);
    metadata_header(out, "sweep", config);
    out << "# repetitions: " << config.repetitions << "\n";
    out << "d,n_photons,demux_mc_std,demux_crlb,direct_crlb\n";
    for (const SweepRow& row : rows)
        out << fmt_double(row.d) << "," << row.n_photons << ","
            << fmt_double(row.demux_mc_std) << ","
            << fmt_double(row.demux_crlb) << ","
            << fmt_double(row.direct_crlb) << "\n";
}

void write_budget_csv(const std::string& path, const BudgetSweepResult& sweep,
                      const ExperimentConfig& config) {
    std::ofstream out = open_output(path);
    metadata_header(out, "budget", config);
    out << "alpha,n_centroid,rmse,rmse_stderr\n";
    for (const BudgetCell& cell : sweep.cells)
        out << fmt_double(cell.alpha) << "," << cell.n_centroid << ","
            << fmt_double(cell.rmse) << "," << fmt_double(cell.rmse_stderr)
            << "\n";
}

void write_budget_json(const std::string& path, const BudgetSweepResult& sweep,
                       const ExperimentConfig& config) {
    nlohmann::json j = json_skeleton("budget_best", config);
    j["n_total"] = sweep.best.n_total;
    j["n_centroid"] = sweep.best.n_centroid;
    j["alpha"] = sweep.best.alpha;
    j["rmse"] = sweep.best_rmse;
    j["rmse_stderr"] = sweep.best_rmse_stderr;
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out = open_output(path);
    out << text;
}

}  // namespace demuxsr
