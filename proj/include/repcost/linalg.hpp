#pragma once

#include <Eigen/Dense>

namespace repcost {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Thin SVD M = U * diag(sigma) * V^T with U (rows x r), V (cols x r),
/// r = min(rows, cols), sigma nonincreasing.
///
/// Deterministic sign convention: the first entry of each V column whose
/// magnitude exceeds 1e-12 * max|column| is made positive (U flipped to
/// match), so algebraically equal inputs produce identical factors.
struct SvdResult {
    Mat U;
    Vec sigma;
    Mat V;
    double rank_tol = 1e-10; // singular values below rank_tol * sigma(0) count as zero

    /// Number of singular values above the rank tolerance.
    int rank() const;
};

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const Mat& M, const char* what);
void require_finite(const Vec& v, const char* what);

SvdResult svd(const Mat& M);

/// Sum of sigma_i^q over singular values above the rank tolerance
/// (the q-th power of the Schatten-q quasi-norm; nuclear norm for q = 1).
/// Requires q in (0, 1].
double schatten_qnorm_pow(const Mat& M, double q);

/// Largest singular value.
double spectral_norm(const Mat& M);

/// Nearest matrix (in Frobenius distance) with spectral norm <= 1:
/// singular values are clipped at 1. Feasible inputs are returned unchanged.
Mat project_spectral_ball(const Mat& M);

/// Orthonormal-columns deviation max|B^T B - I| (used by invariant checks).
double gram_deviation(const Mat& B);

} // namespace repcost
