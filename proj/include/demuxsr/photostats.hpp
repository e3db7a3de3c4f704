#pragma once

#include <cstdint>
#include <vector>

#include "demuxsr/optics.hpp"
#include "demuxsr/rng.hpp"
#include "demuxsr/source_model.hpp"

namespace demuxsr {

/// One reference position of a demultiplexed scan: photons allocated to
/// the position and how many landed in the derivative mode.
struct ScanPoint {
    double x_r = 0.0;
    std::int64_t photons_allocated = 0;
    std::int64_t counts_v = 0;
};

/// A full scan record with the width and seed it was produced under.
struct ScanDataset {
    std::vector<ScanPoint> points;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Photon arrival positions from spatially resolved (direct) detection.
struct DirectSamples {
    std::vector<double> positions;
};

/// Fraction of the source intensity coupled into the derivative mode
/// centred at x_r, from the exact overlap amplitudes. Clamped to [0, 1];
/// violations beyond 1e-9 raise model_error.
double detection_probability_exact(const SourceEnsemble& ensemble,
                                   const ModeBasis& basis, double x_r);

/// Small-extent expansion of the same probability:
/// (1/4 sigma^2) sum_j w_j (x_j - x_r)^2.
double detection_probability_linearized(const SourceEnsemble& ensemble,
                                        double sigma, double x_r);

/// Derivative-mode intensity at the centroid: the weighted second moment
/// of source offsets in units of (2 sigma)^2.
double i_centroid(const SourceEnsemble& ensemble, double sigma);

/// Parallel-axis form of the linearized intensity:
/// i_c + (x_r - x_c)^2 / (2 sigma)^2.
double steiner_probability(double i_c, double x_c, double sigma, double x_r);

/// Direct-imaging photon arrival density sum_j w_j u(x - x_j)^2.
double direct_pdf(const SourceEnsemble& ensemble, const TransferFunction& psf,
                  double x);

/// Variance of the direct-imaging density: weighted second moment of the
/// sources plus the second moment of u^2 (sigma^2 for Gaussian PSFs).
double direct_variance(const SourceEnsemble& ensemble,
                       const TransferFunction& psf);

/// Binomial(n, p) draw from the stream. Deterministic given the stream
/// state; throws model_error for p outside [0, 1] or n < 0.
std::int64_t sample_mode_counts(double p, std::int64_t n, Rng& rng);

/// n i.i.d. draws from the direct-imaging density: pick a source by
/// weight, then a normal position around it. Gaussian PSFs only.
DirectSamples sample_positions(const SourceEnsemble& ensemble,
                               const TransferFunction& psf, std::int64_t n,
                               Rng& rng);

}  // namespace demuxsr
