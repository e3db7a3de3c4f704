#pragma once

#include <vector>

namespace demuxsr {

/// Ensemble of mutually incoherent point sources on a line. Positions are
/// in the same length units as the transfer-function width; weights are
/// relative strengths summing to one. Immutable after construction.
class SourceEnsemble {
public:
    /// Throws model_error unless positions/weights have equal nonzero
    /// length, all entries are finite, every weight is positive and the
    /// weights sum to 1 within 1e-12. Weights are never renormalized;
    /// callers must pass an exactly normalized set.
    SourceEnsemble(std::vector<double> positions, std::vector<double> weights);

    const std::vector<double>& positions() const { return positions_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return positions_.size(); }

private:
    std::vector<double> positions_;
    std::vector<double> weights_;
};

/// Geometric summary of an ensemble relative to its centroid.
struct EnsembleSummary {
    double centroid = 0.0;
    std::vector<double> offsets;       // x_j - centroid
    double second_moment = 0.0;        // sum_j w_j offsets_j^2
    double effective_radius_eps = 0.0; // sqrt(sum_j w_j (offsets_j/sigma)^2)
};

/// Intensity-weighted mean position sum_j w_j x_j.
double centroid(const SourceEnsemble& ensemble);

/// Centroid, per-source offsets, weighted second moment and the
/// dimensionless effective radius for the given transfer-function width.
/// Throws model_error when sigma <= 0.
EnsembleSummary summarize(const SourceEnsemble& ensemble, double sigma);

/// Two equal-brightness sources at x_c -+ d. Throws model_error when d < 0.
SourceEnsemble symmetric_pair(double d, double x_c);

}  // namespace demuxsr
