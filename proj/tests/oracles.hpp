// Test-only reference computations, independent of the library paths they
// check: fixed-grid Simpson quadrature, finite differences with Richardson
// extrapolation, and a Bures-fidelity route to the quantum Fisher
// information.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

// Plain composite Simpson on a fixed grid (n even).
template <typename F>
double simpson(F&& f, double a, double b, int n = 4096) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        acc += f(a + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Central difference with one Richardson step: error O(h^4).
inline double derivative(const std::function<double(double)>& f, double x,
                         double h) {
    const auto central = [&](double step) {
        return (f(x + step) - f(x - step)) / (2.0 * step);
    };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

// Rotation-contraction qubit family: Bloch vector of length 1 - eps^2/2
// at angle theta in the s1-s3 plane.
inline Eigen::Matrix2cd polar_state(double eps, double theta) {
    const double r = 1.0 - 0.5 * eps * eps;
    Eigen::Matrix2cd rho;
    const double s1 = r * std::sin(theta);
    const double s3 = r * std::cos(theta);
    rho << 0.5 * (1.0 + s3), 0.5 * s1, 0.5 * s1, 0.5 * (1.0 - s3);
    return rho;
}

// Uhlmann fidelity of two qubit states: Tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double fidelity(const Eigen::Matrix2cd& rho,
                       const Eigen::Matrix2cd& sigma) {
    const double overlap = (rho * sigma).trace().real();
    const double dets =
        std::max(0.0, rho.determinant().real() * sigma.determinant().real());
    return overlap + 2.0 * std::sqrt(dets);
}

// QFI along direction (de, dt) from the Bures distance between states a
// half-step apart in each direction: d_B^2 = F_Q h^2 shrunk by 4.
inline double qfi_directional(double eps, double theta, double de, double dt,
                              double h) {
    const Eigen::Matrix2cd lo = polar_state(eps - h * de, theta - h * dt);
    const Eigen::Matrix2cd hi = polar_state(eps + h * de, theta + h * dt);
    const double root_fid = std::sqrt(fidelity(lo, hi));
    return 2.0 * (1.0 - root_fid) / (h * h);
}

struct QfiEstimate {
    double eps_eps;
    double eps_theta;
    double theta_theta;
};

// Full QFI matrix by finite differences of the fidelity (delta = 1e-4).
inline QfiEstimate qfi_fidelity(double eps, double theta, double h = 1e-4) {
    QfiEstimate est{};
    est.eps_eps = qfi_directional(eps, theta, 1.0, 0.0, h);
    est.theta_theta = qfi_directional(eps, theta, 0.0, 1.0, h);
    const double diag_plus = qfi_directional(eps, theta, 1.0, 1.0, h);
    const double diag_minus = qfi_directional(eps, theta, 1.0, -1.0, h);
    est.eps_theta = 0.25 * (diag_plus - diag_minus);
    return est;
}

// Deterministic scalar stream for property-style tests.
class ValueStream {
public:
    explicit ValueStream(unsigned seed) : engine_(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    int integer(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

private:
    std::mt19937 engine_;
};

}  // namespace oracles
