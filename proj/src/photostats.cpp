#include "demuxsr/photostats.hpp"

#include <cmath>

#include "demuxsr/errors.hpp"
#include "demuxsr/quadrature.hpp"

namespace demuxsr {

double detection_probability_exact(const SourceEnsemble& ensemble,
                                   const ModeBasis& basis, double x_r) {
    double p = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double c =
            projection_amplitude(basis, x_r, ensemble.positions()[j]);
        p += ensemble.weights()[j] * c * c;
    }
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw model_error("detection_probability_exact: probability " +
                          std::to_string(p) + " outside [0, 1]");
    return std::min(std::max(p, 0.0), 1.0);
}

double detection_probability_linearized(const SourceEnsemble& ensemble,
                                        double sigma, double x_r) {
    if (!(sigma > 0.0))
        throw model_error("detection_probability_linearized: sigma must be > 0");
    double moment = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double dx = ensemble.positions()[j] - x_r;
        moment += ensemble.weights()[j] * dx * dx;
    }
    return moment / (4.0 * sigma * sigma);
}

double i_centroid(const SourceEnsemble& ensemble, double sigma) {
    if (!(sigma > 0.0)) throw model_error("i_centroid: sigma must be > 0");
    return summarize(ensemble, sigma).second_moment / (4.0 * sigma * sigma);
}

double steiner_probability(double i_c, double x_c, double sigma, double x_r) {
    if (!(i_c >= 0.0))
        throw model_error("steiner_probability: i_c must be >= 0");
    if (!(sigma > 0.0))
        throw model_error("steiner_probability: sigma must be > 0");
    const double shift = x_r - x_c;
    return i_c + shift * shift / (4.0 * sigma * sigma);
}

double direct_pdf(const SourceEnsemble& ensemble, const TransferFunction& psf,
                  double x) {
    double p = 0.0;
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double amp = psf(x - ensemble.positions()[j]);
        p += ensemble.weights()[j] * amp * amp;
    }
    return p;
}

double direct_variance(const SourceEnsemble& ensemble,
                       const TransferFunction& psf) {
    const double sigma = sigma_from_psf(psf);
    const EnsembleSummary summary = summarize(ensemble, sigma);
    double psf_moment;
    if (psf.is_gaussian()) {
        psf_moment = sigma * sigma;
    } else {
        const auto integrand = [&](double x) {
            const double u = psf(x);
            return x * x * u * u;
        };
        const double half = psf.support_half_width();
        psf_moment = integrate_adaptive(integrand, -half, half, 1e-10);
    }
    return summary.second_moment + psf_moment;
}

std::int64_t sample_mode_counts(double p, std::int64_t n, Rng& rng) {
    return rng.binomial(n, p);
}

DirectSamples sample_positions(const SourceEnsemble& ensemble,
                               const TransferFunction& psf, std::int64_t n,
                               Rng& rng) {
    if (n < 0) throw model_error("sample_positions: n must be >= 0");
    if (!psf.is_gaussian())
        throw model_error(
            "sample_positions: only Gaussian PSFs support position sampling");
    const double sigma = psf.gaussian_sigma();
    DirectSamples samples;
    samples.positions.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        double cdf = 0.0;
        std::size_t j = 0;
        for (; j + 1 < ensemble.size(); ++j) {
            cdf += ensemble.weights()[j];
            if (u < cdf) break;
        }
        samples.positions.push_back(
            rng.normal(ensemble.positions()[j], sigma));
    }
    return samples;
}

}  // namespace demuxsr
