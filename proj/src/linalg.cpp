#include "repcost/linalg.hpp"

#include "repcost/errors.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace repcost {

void require_finite(const Mat& M, const char* what) {
    if (!M.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
    if (M.rows() < 1 || M.cols() < 1) throw InvalidInput(std::string(what) + ": empty matrix");
}

void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
    if (v.size() < 1) throw InvalidInput(std::string(what) + ": empty vector");
}

int SvdResult::rank() const {
    if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
    const double cut = rank_tol * sigma(0);
    int r = 0;
    while (r < sigma.size() && sigma(r) > cut) ++r;
    return r;
}

SvdResult svd(const Mat& M) {
    require_finite(M, "svd");
    Eigen::JacobiSVD<Mat> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out;
    out.U = dec.matrixU();
    out.sigma = dec.singularValues();
    out.V = dec.matrixV();
    for (int j = 0; j < out.V.cols(); ++j) {
        const double big = out.V.col(j).cwiseAbs().maxCoeff();
        for (int i = 0; i < out.V.rows(); ++i) {
            const double v = out.V(i, j);
            if (std::abs(v) > 1e-12 * big) {
                if (v < 0.0) {
                    out.V.col(j) = -out.V.col(j);
                    out.U.col(j) = -out.U.col(j);
                }
                break;
            }
        }
    }
    return out;
}

double schatten_qnorm_pow(const Mat& M, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("schatten_qnorm_pow: q must be in (0, 1]");
    require_finite(M, "schatten_qnorm_pow");
    Eigen::JacobiSVD<Mat> dec(M);
    const Vec& s = dec.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0.0;
    const double cut = 1e-10 * s(0);
    double acc = 0.0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > cut) acc += std::pow(s(i), q);
    return acc;
}

double spectral_norm(const Mat& M) {
    return svd(M).sigma(0);
}

Mat project_spectral_ball(const Mat& M) {
    SvdResult d = svd(M);
    if (d.sigma.size() == 0 || d.sigma(0) <= 1.0) return M;
    Vec clipped = d.sigma.cwiseMin(1.0);
    return d.U * clipped.asDiagonal() * d.V.transpose();
}

double gram_deviation(const Mat& B) {
    Mat G = B.transpose() * B;
    G -= Mat::Identity(B.cols(), B.cols());
    return G.cwiseAbs().maxCoeff();
}

} // namespace repcost
