#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demuxsr/config.hpp"
#include "demuxsr/inference.hpp"
#include "demuxsr/photostats.hpp"

namespace demuxsr {

/// One simulated (or noiseless) scan plus its parabola fit. In noiseless
/// mode `fractions` holds the exact detection probabilities that were fed
/// to the fitter instead of sampled count fractions.
struct ScanRunResult {
    ScanDataset dataset;
    std::vector<double> fractions;
    ParabolaFitResult fit;
    bool noiseless = false;
};

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::int64_t count = 0;
};

struct Fig2Result {
    std::vector<double> i_c_estimates;  // indexed by repetition
    std::vector<double> x_c_estimates;
    std::vector<HistogramBin> histogram;
    double mean = 0.0;
    double std_dev = 0.0;
    double sem = 0.0;
    double gauss_fit_mean = 0.0;
    double gauss_fit_sigma = 0.0;
};

struct SweepRow {
    double d = 0.0;
    std::int64_t n_photons = 0;
    double demux_mc_std = 0.0;
    double demux_crlb = 0.0;   // Fisher bound of the two-outcome measurement
    double direct_crlb = 0.0;  // direct-imaging bound, separation convention
};

/// Split a photon budget over scan points: equal shares with the
/// remainder on the leftmost points, or shares growing with distance from
/// the grid centre ("proportional").
std::vector<std::int64_t> allocate_photons(std::int64_t n_photons,
                                           const std::vector<double>& grid,
                                           const std::string& allocation);

/// Simulate one scan at exact detection probabilities and fit the
/// intensity parabola. rep_index selects the random substream, so run k
/// of a repeated study is reproducible in isolation.
ScanRunResult run_scan(const ExperimentConfig& config, bool expected_counts,
                       std::uint64_t rep_index = 0);

/// Monte-Carlo study of the fitted centroid intensity over
/// config.repetitions independent scans, with histogram and Gaussian-fit
/// summary.
Fig2Result replicate_fig2(const ExperimentConfig& config, int threads = 1);

/// Demultiplexing vs direct imaging across (d, N) cells: Monte-Carlo
/// spread of the half-separation estimator at a known centroid next to
/// both Cramer-Rao predictions.
std::vector<SweepRow> sweep_precision(const ExperimentConfig& config,
                                      int threads = 1);

/// Qubit-model report as JSON text: Bloch vector, QFI matrix, precision
/// bounds and the traced SLD commutator.
std::string report_qubit(double eps, double theta, std::int64_t n);

// Output writers. Every file carries the seed and the config hash.
void write_scan_csv(const std::string& path, const ScanRunResult& run,
                    const ExperimentConfig& config);
void write_fit_json(const std::string& path, const ParabolaFitResult& fit,
                    const ExperimentConfig& config);
void write_fig2_csv(const std::string& path, const Fig2Result& result,
                    const ExperimentConfig& config);
void write_fig2_json(const std::string& path, const Fig2Result& result,
                     const ExperimentConfig& config);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows,
                     const ExperimentConfig& config);
void write_budget_csv(const std::string& path, const BudgetSweepResult& sweep,
                      const ExperimentConfig& config);
void write_budget_json(const std::string& path, const BudgetSweepResult& sweep,
                       const ExperimentConfig& config);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace demuxsr
