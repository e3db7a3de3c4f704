#include "demuxsr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "demuxsr/errors.hpp"
#include "demuxsr/parallel.hpp"
#include "demuxsr/quadrature.hpp"

namespace demuxsr {

EstimateReport estimate_centroid(const DirectSamples& samples) {
    const auto n = static_cast<std::int64_t>(samples.positions.size());
    if (n < 2)
        throw model_error("estimate_centroid: need at least two samples");
    double mean = 0.0;
    for (double x : samples.positions) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples.positions) ss += (x - mean) * (x - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(n - 1));
    EstimateReport report;
    report.value = mean;
    report.std_error = stddev / std::sqrt(static_cast<double>(n));
    report.n_used = n;
    return report;
}

EstimateReport mle_separation(std::int64_t counts_v, std::int64_t n,
                              double sigma) {
    if (n < 1) throw model_error("mle_separation: n must be >= 1");
    if (counts_v < 0 || counts_v > n)
        throw model_error("mle_separation: counts_v must lie in [0, n]");
    if (!(sigma > 0.0)) throw model_error("mle_separation: sigma must be > 0");
    const double fraction =
        static_cast<double>(counts_v) / static_cast<double>(n);
    EstimateReport report;
    report.value = 2.0 * sigma * std::sqrt(fraction);
    report.std_error =
        sigma / std::sqrt(static_cast<double>(n)) * std::sqrt(1.0 - fraction);
    report.n_used = n;
    if (counts_v > 0)
        // Second-order delta method for d = 2 sigma sqrt(p).
        report.bias_estimate = -sigma * (1.0 - fraction) /
                               (4.0 * static_cast<double>(n) *
                                std::sqrt(fraction));
    if (counts_v == n)
        report.warning =
            "all photons in the derivative mode: estimate sits on the "
            "boundary of the linearized model";
    return report;
}

ParabolaFitResult fit_parabola(const std::vector<double>& x_r,
                               const std::vector<double>& fraction,
                               const std::vector<std::int64_t>& photons,
                               double sigma) {
    const std::size_t n = x_r.size();
    if (fraction.size() != n || photons.size() != n)
        throw fit_error("fit_parabola: input lengths differ");
    if (!(sigma > 0.0)) throw fit_error("fit_parabola: sigma must be > 0");
    if (std::set<double>(x_r.begin(), x_r.end()).size() < 3)
        throw fit_error("fit_parabola: need >= 3 distinct reference points");
    bool any_signal = false;
    for (double f : fraction)
        if (f > 0.0) any_signal = true;
    if (!any_signal)
        throw fit_error("fit_parabola: no nonzero counts to fit");

    // The model i_c + (x - x_c)^2 / 4 sigma^2 has fixed curvature, so after
    // subtracting x^2 / 4 sigma^2 it is affine in x: z = a + b x with
    // a = i_c + x_c^2 / 4 sigma^2 and b = -x_c / 2 sigma^2. Weights are
    // inverse binomial variances evaluated at the fitted model (not at the
    // observed fractions, which at a few counts per point would overweight
    // downward fluctuations and bias i_c low by tens of percent), so the
    // least squares is iterated until the weights settle.
    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (photons[i] < 1)
            throw fit_error("fit_parabola: every point needs >= 1 photon");
        z[i] = fraction[i] - x_r[i] * x_r[i] * inv4s2;
    }

    std::vector<double> weight(n, 1.0);
    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d beta = Eigen::Vector2d::Zero();
    bool converged = false;
    for (int iteration = 0; iteration < 100 && !converged; ++iteration) {
        normal.setZero();
        Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector2d row(1.0, x_r[i]);
            normal += weight[i] * row * row.transpose();
            rhs += weight[i] * z[i] * row;
        }
        const double det = normal.determinant();
        if (!(std::abs(det) > 1e-12 * normal(0, 0) * normal(1, 1) + 1e-300))
            throw fit_error("fit_parabola: degenerate design");
        const Eigen::Vector2d next = normal.ldlt().solve(rhs);
        converged = (next - beta).cwiseAbs().maxCoeff() <=
                    1e-12 * (1.0 + beta.cwiseAbs().maxCoeff());
        beta = next;
        for (std::size_t i = 0; i < n; ++i) {
            const double n_i = static_cast<double>(photons[i]);
            const double floor_p = 0.5 / n_i;
            const double model =
                beta(0) + beta(1) * x_r[i] + x_r[i] * x_r[i] * inv4s2;
            const double p = std::clamp(model, floor_p, 1.0 - floor_p);
            weight[i] = n_i / (p * (1.0 - p));
        }
    }
    if (!converged)
        throw fit_error("fit_parabola: weights did not settle in 100 "
                        "iterations");
    const double a = beta(0);
    const double b = beta(1);
    ParabolaFitResult result;
    result.x_c_hat = -2.0 * sigma * sigma * b;
    result.i_c_hat = a - sigma * sigma * b * b;
    result.dof = static_cast<int>(n) - 2;

    const Eigen::Matrix2d cov_ab = normal.inverse();
    Eigen::Matrix2d jac;
    jac << 1.0, -2.0 * sigma * sigma * b, 0.0, -2.0 * sigma * sigma;
    result.covariance = jac * cov_ab * jac.transpose();

    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = z[i] - a - b * x_r[i];
        chi2 += weight[i] * res * res;
    }
    result.chi_square = chi2;
    return result;
}

ParabolaFitResult fit_parabola(const ScanDataset& scan) {
    if (!(scan.sigma > 0.0)) throw fit_error("fit_parabola: sigma must be > 0");
    std::vector<double> x_r, fraction;
    std::vector<std::int64_t> photons;
    x_r.reserve(scan.points.size());
    for (const ScanPoint& point : scan.points) {
        if (point.photons_allocated < 1)
            throw fit_error("fit_parabola: every point needs >= 1 photon");
        if (point.counts_v < 0 || point.counts_v > point.photons_allocated)
            throw fit_error(
                "fit_parabola: counts_v must lie in [0, photons_allocated]");
        x_r.push_back(point.x_r);
        fraction.push_back(static_cast<double>(point.counts_v) /
                           static_cast<double>(point.photons_allocated));
        photons.push_back(point.photons_allocated);
    }
    return fit_parabola(x_r, fraction, photons, scan.sigma);
}

double fisher_demux(double d, double sigma) {
    if (!(sigma > 0.0)) throw model_error("fisher_demux: sigma must be > 0");
    if (!(d >= 0.0) || d >= 2.0 * sigma)
        throw model_error(
            "fisher_demux: requires 0 <= d < 2 sigma (linearized model)");
    const double ratio = d / (2.0 * sigma);
    return 1.0 / (sigma * sigma * (1.0 - ratio * ratio));
}

double fisher_direct(double d, double sigma) {
    if (!(d > 0.0)) throw model_error("fisher_direct: d must be > 0");
    if (!(sigma > 0.0)) throw model_error("fisher_direct: sigma must be > 0");
    const double s2 = sigma * sigma;
    const double norm = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * s2);
    const auto density = [&](double y) { return norm * std::exp(-y * y / (2.0 * s2)); };
    // Arrival density of the pair at -+d and its derivative with respect
    // to the full separation s = 2d (half of the d-derivative).
    const auto integrand = [&](double x) {
        const double gm = density(x - d);
        const double gp = density(x + d);
        const double p = 0.5 * (gm + gp);
        const double dp_dd =
            0.5 * (-(x + d) / s2 * gp + (x - d) / s2 * gm);
        const double dp_ds = 0.5 * dp_dd;
        if (p <= 0.0) return 0.0;
        return dp_ds * dp_ds / p;
    };
    const double reach = 12.0 * sigma + d;
    return integrate_adaptive(integrand, -reach, reach, 1e-12);
}

BudgetSweepResult optimize_budget(std::int64_t n_total,
                                  const SourceEnsemble& ensemble, double sigma,
                                  int repetitions, std::uint64_t seed,
                                  int threads) {
    if (n_total < 10)
        throw model_error("optimize_budget: n_total must be >= 10");
    if (repetitions < 100)
        throw model_error("optimize_budget: repetitions must be >= 100");
    if (!(sigma > 0.0))
        throw model_error("optimize_budget: sigma must be > 0");

    // Candidate splits: ceil(N^alpha) on a uniform alpha grid plus the
    // extreme feasible splits.
    std::set<std::int64_t> candidates{2, n_total - 1};
    for (int k = 1; k <= 9; ++k) {
        const double alpha = 0.1 * static_cast<double>(k);
        const auto n = static_cast<std::int64_t>(
            std::ceil(std::pow(static_cast<double>(n_total), alpha)));
        candidates.insert(std::clamp<std::int64_t>(n, 2, n_total - 1));
    }
    if (candidates.size() < 2)
        throw model_error("optimize_budget: n_total too small for a split grid");

    const TransferFunction psf = TransferFunction::gaussian(sigma);
    const ModeBasis basis = derivative_mode(psf);
    const double d_true = std::sqrt(summarize(ensemble, sigma).second_moment);
    const double log_n = std::log(static_cast<double>(n_total));

    BudgetSweepResult result;
    for (std::int64_t n_centroid : candidates) {
        std::vector<double> sq_err(static_cast<std::size_t>(repetitions));
        parallel_for_index(repetitions, threads, [&](std::int64_t rep) {
            // Common random numbers: the substream depends only on the
            // repetition, so every split replays the same photons.
            Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(rep));
            const DirectSamples samples =
                sample_positions(ensemble, psf, n_centroid, rng);
            const double x_hat = estimate_centroid(samples).value;
            const std::int64_t n_demux = n_total - n_centroid;
            const double p = detection_probability_exact(ensemble, basis, x_hat);
            const std::int64_t counts = rng.binomial(n_demux, p);
            const double d_hat = mle_separation(counts, n_demux, sigma).value;
            const double err = d_hat - d_true;
            sq_err[static_cast<std::size_t>(rep)] = err * err;
        });
        double mean_sq = 0.0;
        for (double e : sq_err) mean_sq += e;
        mean_sq /= static_cast<double>(repetitions);
        double var_sq = 0.0;
        for (double e : sq_err) var_sq += (e - mean_sq) * (e - mean_sq);
        var_sq /= static_cast<double>(repetitions) *
                  static_cast<double>(repetitions - 1);
        BudgetCell cell;
        cell.n_centroid = n_centroid;
        cell.alpha = std::log(static_cast<double>(n_centroid)) / log_n;
        cell.rmse = std::sqrt(mean_sq);
        cell.rmse_stderr =
            cell.rmse > 0.0 ? 0.5 * std::sqrt(var_sq) / cell.rmse : 0.0;
        result.cells.push_back(cell);
    }

    const auto best = std::min_element(
        result.cells.begin(), result.cells.end(),
        [](const BudgetCell& a, const BudgetCell& b) { return a.rmse < b.rmse; });
    result.best = BudgetPlan{n_total, best->n_centroid, best->alpha};
    result.best_rmse = best->rmse;
    result.best_rmse_stderr = best->rmse_stderr;
    return result;
}

}  // namespace demuxsr
