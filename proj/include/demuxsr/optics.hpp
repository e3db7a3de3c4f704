#pragma once

#include <string>
#include <utility>
#include <vector>

namespace demuxsr {

/// Amplitude point-spread function u(x), real, even and L2-normalized.
/// Either an analytic Gaussian of width sigma or a tabulated profile on a
/// uniform grid. Tabulated profiles are resampled to a uniform grid at
/// construction and validated for evenness and unit norm.
class TransferFunction {
public:
    static TransferFunction gaussian(double sigma);

    /// Tabulated profile; x must be strictly increasing. Non-uniform grids
    /// are resampled by cubic interpolation.
    static TransferFunction tabulated(const std::vector<double>& x,
                                      const std::vector<double>& values);

    /// Two-column whitespace-separated text file with header "# psf v1".
    static TransferFunction load(const std::string& path);

    bool is_gaussian() const { return is_gaussian_; }
    double gaussian_sigma() const;

    /// Evaluate u(x); cubic interpolation for tabulated profiles, zero
    /// outside the tabulated support.
    double operator()(double x) const;

    double grid_min() const { return grid_min_; }
    double grid_step() const { return grid_step_; }
    const std::vector<double>& values() const { return values_; }
    double support_half_width() const;

private:
    TransferFunction() = default;

    bool is_gaussian_ = false;
    double sigma_ = 0.0;  // Gaussian only
    double grid_min_ = 0.0;
    double grid_step_ = 0.0;
    std::vector<double> values_;
};

/// Orthonormal mode pair {u, v}: the PSF and its normalized derivative
/// v = -2 sigma du/dx, with sigma the width functional that makes v unit
/// norm (equal to the Gaussian width for Gaussian PSFs).
class ModeBasis {
public:
    const TransferFunction& psf() const { return psf_; }
    double sigma() const { return sigma_; }

    double u(double x) const { return psf_(x); }
    double v(double x) const;

private:
    friend ModeBasis derivative_mode(const TransferFunction& psf);

    explicit ModeBasis(TransferFunction psf) : psf_(std::move(psf)) {}

    TransferFunction psf_;
    double sigma_ = 0.0;
    // Tabulated v on the same grid as the PSF; empty for Gaussian PSFs.
    std::vector<double> v_values_;
};

/// Width functional (1/2) (integral (du/dx)^2 dx)^(-1/2). Returns sigma
/// exactly for Gaussian PSFs; tabulated PSFs use a fourth-order finite
/// difference plus trapezoidal quadrature. Throws model_error for
/// degenerate profiles.
double sigma_from_psf(const TransferFunction& psf);

/// Build the {u, v} basis for a PSF. Throws model_error when the basis
/// fails orthonormality validation.
ModeBasis derivative_mode(const TransferFunction& psf);

/// Overlap amplitude integral v(x - x_r) u(x - x_j) dx. Gaussian PSFs use
/// the closed form (delta/2sigma) exp(-delta^2/8sigma^2) with
/// delta = x_j - x_r; tabulated PSFs integrate numerically.
double projection_amplitude(const ModeBasis& basis, double x_r, double x_j);

/// Same overlap evaluated by adaptive quadrature for any basis, including
/// Gaussian ones. Reference route for validating the closed form.
double projection_amplitude_quadrature(const ModeBasis& basis, double x_r,
                                       double x_j);

/// First-order expansion of the overlap: (x_j - x_r) / (2 sigma).
double linearized_amplitude(double sigma, double x_r, double x_j);

}  // namespace demuxsr
