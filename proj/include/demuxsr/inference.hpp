#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "demuxsr/photostats.hpp"
#include "demuxsr/source_model.hpp"

namespace demuxsr {

struct EstimateReport {
    double value = 0.0;
    double std_error = 0.0;
    std::optional<double> bias_estimate;
    std::int64_t n_used = 0;
    std::optional<std::string> warning;
};

/// Weighted least-squares fit of the intensity parabola
/// i_c + (x_r - x_c)^2 / (4 sigma^2). Covariance rows/columns are ordered
/// (i_c, x_c).
struct ParabolaFitResult {
    double i_c_hat = 0.0;
    double x_c_hat = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
    double chi_square = 0.0;
    int dof = 0;
};

/// Photon split for the two-stage protocol: n_centroid direct-imaging
/// photons locate the centroid, the rest are demultiplexed there.
struct BudgetPlan {
    std::int64_t n_total = 0;
    std::int64_t n_centroid = 0;
    double alpha = 0.0;  // log(n_centroid) / log(n_total)
};

struct BudgetCell {
    double alpha = 0.0;
    std::int64_t n_centroid = 0;
    double rmse = 0.0;
    double rmse_stderr = 0.0;
};

struct BudgetSweepResult {
    std::vector<BudgetCell> cells;  // ascending in n_centroid
    BudgetPlan best;
    double best_rmse = 0.0;
    double best_rmse_stderr = 0.0;
};

/// Sample mean of direct-imaging positions with its standard error.
/// Requires at least two samples.
EstimateReport estimate_centroid(const DirectSamples& samples);

/// Maximum-likelihood half-separation from derivative-mode counts:
/// d = 2 sigma sqrt(counts_v / n), with the delta-method standard error
/// (sigma / sqrt(n)) sqrt(1 - counts_v / n). counts_v = n sits on the
/// boundary of the linearized model and is flagged in the report.
EstimateReport mle_separation(std::int64_t counts_v, std::int64_t n,
                              double sigma);

/// Parabola fit of mode-v count fractions against reference position.
/// Weights are inverse binomial variances with the fraction floored at
/// 1/(2 n_i) so zero-count points keep finite weight.
ParabolaFitResult fit_parabola(const std::vector<double>& x_r,
                               const std::vector<double>& fraction,
                               const std::vector<std::int64_t>& photons,
                               double sigma);
ParabolaFitResult fit_parabola(const ScanDataset& scan);

/// Per-photon Fisher information of the demultiplexed two-outcome
/// measurement about the half-separation d of an equal pair:
/// 1 / (sigma^2 (1 - d^2 / 4 sigma^2)). Valid for d < 2 sigma.
double fisher_demux(double d, double sigma);

/// Per-photon Fisher information of direct imaging about the pair
/// separation 2d, by adaptive quadrature of (dp/d(2d))^2 / p for the
/// two-Gaussian arrival density. Approaches d^2 / (2 sigma^4) as
/// d / sigma -> 0, which reproduces the small-separation precision law
/// (sigma^2/d) sqrt(2/N).
double fisher_direct(double d, double sigma);

/// Grid search over two-stage splits n_centroid = ceil(n_total^alpha),
/// alpha in {0.1, ..., 0.9} plus the extreme feasible splits. Every split
/// replays the same per-repetition substreams (common random numbers) and
/// is scored by the empirical RMSE of the half-separation estimate. The
/// centroid stage inflates the demultiplexed intensity by 1/(4 n_centroid)
/// on average, so splits only become competitive once n_centroid is well
/// above 1/(4 i_c).
BudgetSweepResult optimize_budget(std::int64_t n_total,
                                  const SourceEnsemble& ensemble, double sigma,
                                  int repetitions, std::uint64_t seed,
                                  int threads = 1);

}  // namespace demuxsr
