#include "demuxsr/optics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "demuxsr/errors.hpp"
#include "demuxsr/quadrature.hpp"

namespace demuxsr {

namespace {

constexpr double pi = 3.14159265358979323846;

// Cubic Lagrange interpolation on a uniform grid, zero outside support.
double interp_uniform(double grid_min, double step,
                      const std::vector<double>& values, double x) {
    const double t = (x - grid_min) / step;
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    if (t < 0.0 || t > static_cast<double>(n - 1)) return 0.0;
    auto i = static_cast<std::ptrdiff_t>(std::floor(t));
    i = std::clamp(i, std::ptrdiff_t{1}, n - 3);
    const double s = t - static_cast<double>(i);
    const double ym = values[i - 1];
    const double y0 = values[i];
    const double y1 = values[i + 1];
    const double y2 = values[i + 2];
    return y0 +
           s * (0.5 * (y1 - ym) +
                s * (ym - 2.5 * y0 + 2.0 * y1 - 0.5 * y2 +
                     s * (0.5 * (y2 - ym) + 1.5 * (y0 - y1))));
}

// d/dx on a uniform grid: fourth-order central stencil in the interior,
// second-order near the edges (edge values carry negligible mass for any
// admissible PSF).
std::vector<double> grid_derivative(const std::vector<double>& u, double h) {
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    std::vector<double> du(u.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (i >= 2 && i < n - 2) {
            du[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) /
                    (12.0 * h);
        } else if (i >= 1 && i < n - 1) {
            du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        } else if (i == 0) {
            du[i] = (u[1] - u[0]) / h;
        } else {
            du[i] = (u[n - 1] - u[n - 2]) / h;
        }
    }
    return du;
}

}  // namespace

TransferFunction TransferFunction::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw model_error("TransferFunction: Gaussian sigma must be > 0");
    TransferFunction tf;
    tf.is_gaussian_ = true;
    tf.sigma_ = sigma;
    return tf;
}

TransferFunction TransferFunction::tabulated(const std::vector<double>& x,
                                             const std::vector<double>& values) {
    if (x.size() != values.size() || x.size() < 64)
        throw model_error(
            "TransferFunction: tabulated PSF needs >= 64 (x, u) samples");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        if (!(x[i + 1] > x[i]))
            throw model_error("TransferFunction: x must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v))
            throw model_error("TransferFunction: values must be finite");

    const std::size_t n = x.size();
    const double span = x.back() - x.front();
    const double step = span / static_cast<double>(n - 1);

    TransferFunction tf;
    tf.grid_min_ = x.front();
    tf.grid_step_ = step;

    bool uniform = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double expected = x.front() + step * static_cast<double>(i);
        if (std::abs(x[i] - expected) > 1e-9 * std::max(1.0, span)) {
            uniform = false;
            break;
        }
    }
    if (uniform) {
        tf.values_ = values;
    } else {
        // Resample by local cubic Lagrange interpolation on the input grid.
        tf.values_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double xk = x.front() + step * static_cast<double>(k);
            auto upper = std::upper_bound(x.begin(), x.end(), xk);
            auto i = static_cast<std::ptrdiff_t>(upper - x.begin()) - 1;
            i = std::clamp(i, std::ptrdiff_t{1},
                           static_cast<std::ptrdiff_t>(n) - 3);
            double acc = 0.0;
            for (std::ptrdiff_t a = i - 1; a <= i + 2; ++a) {
                double basis = 1.0;
                for (std::ptrdiff_t b = i - 1; b <= i + 2; ++b)
                    if (b != a) basis *= (xk - x[b]) / (x[a] - x[b]);
                acc += basis * values[a];
            }
            tf.values_[k] = acc;
        }
    }

    // An even profile needs a grid symmetric about zero; evenness is then
    // an index mirror. Unit L2 norm by trapezoid.
    if (std::abs(x.front() + x.back()) > 1e-9 * std::max(1.0, span))
        throw model_error(
            "TransferFunction: tabulated grid must be symmetric about 0");
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(tf.values_[i] - tf.values_[n - 1 - i]) > 1e-9)
            throw model_error("TransferFunction: tabulated PSF is not even");
        sq[i] = tf.values_[i] * tf.values_[i];
    }
    const double norm = integrate_trapezoid(sq, step);
    if (std::abs(norm - 1.0) > 1e-9)
        throw model_error(
            "TransferFunction: tabulated PSF is not L2-normalized (norm^2 = " +
            std::to_string(norm) + ")");
    return tf;
}

TransferFunction TransferFunction::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open PSF file: " + path);
    std::string header;
    std::getline(in, header);
    if (header.rfind("# psf v1", 0) != 0)
        throw config_error("PSF file " + path + ": missing '# psf v1' header");
    std::vector<double> x, u;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double xi = 0.0, ui = 0.0;
        if (!(ss >> xi >> ui))
            throw config_error("PSF file " + path + ": malformed line '" +
                               line + "'");
        x.push_back(xi);
        u.push_back(ui);
    }
    return tabulated(x, u);
}

double TransferFunction::gaussian_sigma() const {
    if (!is_gaussian_)
        throw model_error("TransferFunction: not a Gaussian PSF");
    return sigma_;
}

double TransferFunction::operator()(double x) const {
    if (is_gaussian_) {
        const double s2 = sigma_ * sigma_;
        return std::pow(2.0 * pi * s2, -0.25) * std::exp(-x * x / (4.0 * s2));
    }
    return interp_uniform(grid_min_, grid_step_, values_, x);
}

double TransferFunction::support_half_width() const {
    if (is_gaussian_) return 12.0 * sigma_;
    const double span = grid_step_ * static_cast<double>(values_.size() - 1);
    return 0.5 * span;
}

double ModeBasis::v(double x) const {
    if (psf_.is_gaussian()) return x / sigma_ * psf_(x);
    return interp_uniform(psf_.grid_min(), psf_.grid_step(), v_values_, x);
}

double sigma_from_psf(const TransferFunction& psf) {
    if (psf.is_gaussian()) return psf.gaussian_sigma();
    const double h = psf.grid_step();
    const std::vector<double> du = grid_derivative(psf.values(), h);
    std::vector<double> sq(du.size());
    for (std::size_t i = 0; i < du.size(); ++i) sq[i] = du[i] * du[i];
    const double integral = integrate_trapezoid(sq, h);
    if (!(integral > 0.0) || !std::isfinite(integral))
        throw model_error("sigma_from_psf: degenerate PSF derivative");
    return 0.5 / std::sqrt(integral);
}

ModeBasis derivative_mode(const TransferFunction& psf) {
    ModeBasis basis(psf);
    basis.sigma_ = sigma_from_psf(psf);
    if (psf.is_gaussian()) return basis;

    const double h = psf.grid_step();
    const std::vector<double> du = grid_derivative(psf.values(), h);
    basis.v_values_.resize(du.size());
    for (std::size_t i = 0; i < du.size(); ++i)
        basis.v_values_[i] = -2.0 * basis.sigma_ * du[i];

    std::vector<double> uv(du.size());
    std::vector<double> vv(du.size());
    for (std::size_t i = 0; i < du.size(); ++i) {
        uv[i] = psf.values()[i] * basis.v_values_[i];
        vv[i] = basis.v_values_[i] * basis.v_values_[i];
    }
    if (std::abs(integrate_trapezoid(uv, h)) > 1e-9)
        throw model_error("derivative_mode: u and v are not orthogonal");
    if (std::abs(integrate_trapezoid(vv, h) - 1.0) > 1e-9)
        throw model_error("derivative_mode: v is not normalized");
    return basis;
}

double projection_amplitude(const ModeBasis& basis, double x_r, double x_j) {
    const double delta = x_j - x_r;
    if (basis.psf().is_gaussian()) {
        const double sigma = basis.sigma();
        return delta / (2.0 * sigma) *
               std::exp(-delta * delta / (8.0 * sigma * sigma));
    }
    if (std::abs(delta) > basis.psf().support_half_width())
        throw accuracy_error(
            "projection_amplitude: shift exceeds tabulated PSF support");
    return projection_amplitude_quadrature(basis, x_r, x_j);
}

double projection_amplitude_quadrature(const ModeBasis& basis, double x_r,
                                       double x_j) {
    const double delta = x_j - x_r;
    double lo, hi;
    if (basis.psf().is_gaussian()) {
        const double reach = 12.0 * basis.sigma();
        lo = std::min(0.0, delta) - reach;
        hi = std::max(0.0, delta) + reach;
    } else {
        const double half = basis.psf().support_half_width();
        lo = std::max(-half, delta - half);
        hi = std::min(half, delta + half);
        if (!(hi > lo))
            throw accuracy_error(
                "projection_amplitude: tabulated supports do not overlap");
    }
    const auto integrand = [&](double y) {
        return basis.v(y) * basis.u(y - delta);
    };
    return integrate_adaptive(integrand, lo, hi, 1e-10);
}

double linearized_amplitude(double sigma, double x_r, double x_j) {
    if (!(sigma > 0.0))
        throw model_error("linearized_amplitude: sigma must be > 0");
    return (x_j - x_r) / (2.0 * sigma);
}

}  // namespace demuxsr
