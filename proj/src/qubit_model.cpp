#include "demuxsr/qubit_model.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "demuxsr/errors.hpp"

namespace demuxsr {

namespace {

using Eigen::Vector2d;
using std::complex;

constexpr double hermitian_tol = 1e-12;
constexpr double trace_tol = 1e-12;
constexpr double eigenvalue_tol = 1e-12;
constexpr double null_space_tol = 1e-14;
constexpr double psd_tol = 1e-10;
constexpr double commute_tol = 1e-10;

const Matrix2cd pauli_x = (Matrix2cd() << 0, 1, 1, 0).finished();
const Matrix2cd pauli_y =
    (Matrix2cd() << 0, complex<double>(0, -1), complex<double>(0, 1), 0)
        .finished();
const Matrix2cd pauli_z = (Matrix2cd() << 1, 0, 0, -1).finished();

bool is_hermitian(const Matrix2cd& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Closed-form eigendecomposition of a 2x2 Hermitian matrix. Columns of
// the returned basis are orthonormal eigenvectors; eigenvalues descend.
struct EigenPair {
    Vector2d eigenvalues;
    Matrix2cd eigenvectors;
};

EigenPair eigen_hermitian(const Matrix2cd& m) {
    const double a = m(0, 0).real();
    const double c = m(1, 1).real();
    const complex<double> b = m(0, 1);
    const double mean = 0.5 * (a + c);
    const double disc = std::hypot(0.5 * (a - c), std::abs(b));

    EigenPair result;
    result.eigenvalues << mean + disc, mean - disc;
    // Eigenvector of the larger eigenvalue is (b, lambda_plus - a); its
    // orthogonal complement belongs to the smaller one. A vanishing norm
    // means the standard basis already diagonalizes the matrix.
    const double bottom = result.eigenvalues(0) - a;
    const double norm = std::sqrt(std::norm(b) + bottom * bottom);
    if (norm <= null_space_tol) {
        result.eigenvectors = Matrix2cd::Identity();
        return result;
    }
    result.eigenvectors.col(0) << b / norm, bottom / norm;
    result.eigenvectors.col(1) << -bottom / norm, std::conj(b) / norm;
    return result;
}

}  // namespace

QubitState::QubitState(const Matrix2cd& matrix) : matrix_(matrix) {
    if (!is_hermitian(matrix_, hermitian_tol))
        throw model_error("QubitState: matrix is not Hermitian");
    const double trace = matrix_.trace().real();
    if (std::abs(trace - 1.0) > trace_tol)
        throw model_error("QubitState: trace must be 1, got " +
                          std::to_string(trace));
    const EigenPair eig = eigen_hermitian(matrix_);
    if (eig.eigenvalues.minCoeff() < -eigenvalue_tol)
        throw model_error("QubitState: matrix has a negative eigenvalue");
}

QubitState density_matrix(double eps, double theta) {
    if (!(eps >= 0.0))
        throw model_error("density_matrix: eps must be >= 0");
    const double quad = 0.25 * (eps * eps + theta * theta);
    const double norm = 1.0 / (1.0 + quad);
    Matrix2cd m;
    m << norm, 0.5 * theta * norm, 0.5 * theta * norm, quad * norm;
    return QubitState(m);
}

QubitState rotation_contraction_state(double eps, double theta) {
    if (!(eps >= 0.0) || eps * eps > 2.0)
        throw model_error(
            "rotation_contraction_state: eps must lie in [0, sqrt(2)]");
    const double r = 1.0 - 0.5 * eps * eps;
    const Matrix2cd m = 0.5 * (Matrix2cd::Identity() +
                               r * std::sin(theta) * pauli_x +
                               r * std::cos(theta) * pauli_z);
    return QubitState(m);
}

BlochVector bloch_vector(const QubitState& state) {
    BlochVector s;
    s.s1 = (state.matrix() * pauli_x).trace().real();
    s.s2 = (state.matrix() * pauli_y).trace().real();
    s.s3 = (state.matrix() * pauli_z).trace().real();
    return s;
}

Matrix2cd sld(const QubitState& state, const Matrix2cd& d_state) {
    if (!is_hermitian(d_state, hermitian_tol))
        throw model_error("sld: state derivative must be Hermitian");
    const EigenPair eig = eigen_hermitian(state.matrix());
    const Matrix2cd d_eig =
        eig.eigenvectors.adjoint() * d_state * eig.eigenvectors;
    Matrix2cd l_eig = Matrix2cd::Zero();
    for (int m = 0; m < 2; ++m) {
        for (int n = 0; n < 2; ++n) {
            const double denom = eig.eigenvalues(m) + eig.eigenvalues(n);
            if (denom < null_space_tol) {
                if (std::abs(d_eig(m, n)) >= null_space_tol)
                    throw singular_model_error(
                        "sld: derivative is nonzero on a null eigenvalue "
                        "pair of the state");
                continue;
            }
            l_eig(m, n) = 2.0 * d_eig(m, n) / denom;
        }
    }
    return eig.eigenvectors * l_eig * eig.eigenvectors.adjoint();
}

SLDPair sld_pair(double eps, double theta) {
    if (eps == 0.0 && theta == 0.0)
        throw singular_model_error(
            "sld_pair: the eps information is undefined at the exact origin; "
            "evaluate at a small positive eps instead");
    const QubitState state = rotation_contraction_state(eps, theta);
    const double r = 1.0 - 0.5 * eps * eps;
    const Matrix2cd d_eps = -0.5 * eps *
                            (std::sin(theta) * pauli_x +
                             std::cos(theta) * pauli_z);
    const Matrix2cd d_theta = 0.5 * r *
                              (std::cos(theta) * pauli_x -
                               std::sin(theta) * pauli_z);
    SLDPair pair;
    pair.l_eps = sld(state, d_eps);
    pair.l_theta = sld(state, d_theta);
    return pair;
}

Eigen::Matrix2d qfi_matrix(double eps, double theta) {
    const SLDPair pair = sld_pair(eps, theta);
    const Matrix2cd rho = rotation_contraction_state(eps, theta).matrix();
    const auto entry = [&](const Matrix2cd& lm, const Matrix2cd& ln) {
        return 0.5 * (rho * (lm * ln + ln * lm)).trace().real();
    };
    Eigen::Matrix2d info;
    info(0, 0) = entry(pair.l_eps, pair.l_eps);
    info(1, 1) = entry(pair.l_theta, pair.l_theta);
    info(0, 1) = info(1, 0) = entry(pair.l_eps, pair.l_theta);
    const double disc = std::hypot(0.5 * (info(0, 0) - info(1, 1)), info(0, 1));
    if (0.5 * (info(0, 0) + info(1, 1)) - disc < -psd_tol)
        throw model_error("qfi_matrix: information matrix is not PSD");
    return info;
}

PrecisionBounds precision_bounds(double eps, double theta, std::int64_t n) {
    (void)theta;  // leading-order bounds depend on eps only
    if (n < 1) throw model_error("precision_bounds: n must be >= 1");
    if (!(eps >= 0.0))
        throw model_error("precision_bounds: eps must be >= 0");
    const double root_n = std::sqrt(static_cast<double>(n));
    PrecisionBounds bounds;
    bounds.delta_eps = std::sqrt(1.0 - 0.25 * eps * eps) / root_n;
    bounds.delta_theta = std::sqrt(1.0 + eps * eps) / root_n;
    return bounds;
}

CompatibilityDiagnostics compatibility_diagnostics(double eps, double theta) {
    const SLDPair pair = sld_pair(eps, theta);
    const Matrix2cd rho = rotation_contraction_state(eps, theta).matrix();
    const Matrix2cd comm =
        pair.l_eps * pair.l_theta - pair.l_theta * pair.l_eps;
    CompatibilityDiagnostics diag;
    diag.traced_commutator = std::abs((rho * comm).trace());
    diag.sld_commutator_norm = comm.operatorNorm();
    diag.bases_commute = diag.sld_commutator_norm <= commute_tol;
    return diag;
}

}  // namespace demuxsr
