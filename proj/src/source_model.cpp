#include "demuxsr/source_model.hpp"

#include <cmath>
#include <utility>

#include "demuxsr/errors.hpp"

namespace demuxsr {

SourceEnsemble::SourceEnsemble(std::vector<double> positions,
                               std::vector<double> weights)
    : positions_(std::move(positions)), weights_(std::move(weights)) {
    if (positions_.empty())
        throw model_error("SourceEnsemble: at least one source required");
    if (positions_.size() != weights_.size())
        throw model_error(
            "SourceEnsemble: positions and weights must have equal length");
    double weight_sum = 0.0;
    for (std::size_t j = 0; j < positions_.size(); ++j) {
        if (!std::isfinite(positions_[j]))
            throw model_error("SourceEnsemble: positions must be finite");
        if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j]))
            throw model_error("SourceEnsemble: weights must be positive");
        weight_sum += weights_[j];
    }
    if (std::abs(weight_sum - 1.0) > 1e-12)
        throw model_error("SourceEnsemble: weights must sum to 1 (got " +
                          std::to_string(weight_sum) + ")");
}

double centroid(const SourceEnsemble& ensemble) {
    double sum = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j)
        sum += ensemble.weights()[j] * ensemble.positions()[j];
    return sum;
}

EnsembleSummary summarize(const SourceEnsemble& ensemble, double sigma) {
    if (!(sigma > 0.0))
        throw model_error("summarize: sigma must be > 0");
    EnsembleSummary summary;
    summary.centroid = centroid(ensemble);
    summary.offsets.reserve(ensemble.size());
    double second = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double offset = ensemble.positions()[j] - summary.centroid;
        summary.offsets.push_back(offset);
        second += ensemble.weights()[j] * offset * offset;
    }
    summary.second_moment = second;
    summary.effective_radius_eps = std::sqrt(second) / sigma;
    return summary;
}

SourceEnsemble symmetric_pair(double d, double x_c) {
    if (!(d >= 0.0))
        throw model_error("symmetric_pair: separation half-width must be >= 0");
    return SourceEnsemble({x_c - d, x_c + d}, {0.5, 0.5});
}

}  // namespace demuxsr
