#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace demuxsr {

using Matrix2cd = Eigen::Matrix2cd;

/// Validated qubit density matrix: Hermitian, unit trace, positive
/// semidefinite (all within module tolerances).
class QubitState {
public:
    explicit QubitState(const Matrix2cd& matrix);

    const Matrix2cd& matrix() const { return matrix_; }

private:
    Matrix2cd matrix_;
};

struct BlochVector {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
};

struct SLDPair {
    Matrix2cd l_eps;
    Matrix2cd l_theta;
};

struct CompatibilityDiagnostics {
    double traced_commutator = 0.0;   // |Tr(rho [L_eps, L_theta])|
    double sld_commutator_norm = 0.0; // operator norm of [L_eps, L_theta]
    bool bases_commute = false;
};

/// Normalized two-mode density matrix in the {u, v} basis for a source of
/// effective radius eps whose centroid sits theta mode-widths from the
/// reference point:
///   (1 / (1 + eps^2/4 + theta^2/4)) [[1, theta/2], [theta/2, eps^2/4 + theta^2/4]].
QubitState density_matrix(double eps, double theta);

/// The estimation model behind the Fisher analysis: theta rotates the
/// Bloch vector in the s1-s3 plane, eps contracts its length to
/// 1 - eps^2/2. Agrees with density_matrix to second order in (eps, theta)
/// and keeps the derivative-mode population at exactly eps^2/4 when
/// theta = 0. Requires 0 <= eps <= sqrt(2).
QubitState rotation_contraction_state(double eps, double theta);

/// Pauli expectation values (s1, s2, s3) of a state.
BlochVector bloch_vector(const QubitState& state);

/// Symmetric logarithmic derivative: the Hermitian solution L of
/// d_state = (L rho + rho L) / 2, solved in the eigenbasis of rho with
/// L_mn = 2 (d_state)_mn / (lambda_m + lambda_n). Entries on a null
/// eigenvalue pair must vanish in d_state (then L_mn = 0); otherwise a
/// singular_model_error is thrown.
Matrix2cd sld(const QubitState& state, const Matrix2cd& d_state);

/// Both SLDs of the rotation-contraction model at (eps, theta). The exact
/// origin eps = theta = 0 is refused (the eps derivative of the state
/// vanishes identically there, so the eps information is defined only as
/// a limit).
SLDPair sld_pair(double eps, double theta);

/// Quantum Fisher information matrix Re Tr(rho L_mu L_nu) of the
/// rotation-contraction model, ordered (eps, theta). Equals
/// diag(1/(1 - eps^2/4), (1 - eps^2/2)^2), i.e. diag(1 + eps^2/4, 1 - eps^2)
/// up to fourth-order corrections.
Eigen::Matrix2d qfi_matrix(double eps, double theta);

/// Cramer-Rao bounds for n detected photons in the leading order of eps:
/// delta eps >= sqrt(1 - eps^2/4) / sqrt(n),
/// delta theta >= sqrt(1 + eps^2) / sqrt(n).
struct PrecisionBounds {
    double delta_eps = 0.0;
    double delta_theta = 0.0;
};
PrecisionBounds precision_bounds(double eps, double theta, std::int64_t n);

/// Whether the two optimal measurements are jointly performable: the
/// commutator of the SLDs traced against the state (zero for this model)
/// and whether the SLDs commute as operators (they do not, away from
/// degenerate points).
CompatibilityDiagnostics compatibility_diagnostics(double eps, double theta);

}  // namespace demuxsr
