#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "repcost/errors.hpp"
#include "repcost/linalg.hpp"
#include "repcost/random.hpp"

#include <cmath>

using namespace repcost;

namespace {

Mat random_mat(std::uint64_t seed, int r, int c) {
    Rng rng(seed);
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
    return M;
}

Mat random_orthogonal(std::uint64_t seed, int n) {
    Eigen::HouseholderQR<Mat> qr(random_mat(seed, n, n));
    return qr.householderQ() * Mat::Identity(n, n);
}

} // namespace

TEST_CASE("svd of the identity") {
    SvdResult d = svd(Mat::Identity(2, 2));
    CHECK(d.sigma(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.sigma(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd sorts singular values") {
    Mat M = Mat::Zero(2, 2);
    M(0, 0) = 3.0;
    M(1, 1) = 4.0;
    SvdResult d = svd(M);
    CHECK(d.sigma(0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(d.sigma(1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("svd reconstructs and has orthonormal factors") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        Mat M = random_mat(seed, 3, 2);
        SvdResult d = svd(M);
        Mat rec = d.U * d.sigma.asDiagonal() * d.V.transpose();
        CHECK((rec - M).norm() / M.norm() < 1e-10);
        CHECK(gram_deviation(d.U) < 1e-10);
        CHECK(gram_deviation(d.V) < 1e-10);
        for (int i = 1; i < d.sigma.size(); ++i) CHECK(d.sigma(i) <= d.sigma(i - 1));
    }
}

TEST_CASE("svd sign convention is deterministic") {
    Mat M = random_mat(9, 4, 3);
    SvdResult d1 = svd(M), d2 = svd(M);
    CHECK((d1.V - d2.V).norm() == 0.0);
    for (int j = 0; j < d1.V.cols(); ++j) {
        int lead = 0;
        while (std::abs(d1.V(lead, j)) <= 1e-12 * d1.V.col(j).cwiseAbs().maxCoeff()) ++lead;
        CHECK(d1.V(lead, j) > 0.0);
    }
}

TEST_CASE("svd rejects non-finite input") {
    Mat M = Mat::Zero(2, 2);
    M(0, 0) = std::nan("");
    CHECK_THROWS_AS(svd(M), InvalidInput);
}

TEST_CASE("schatten power sums") {
    CHECK(schatten_qnorm_pow(Mat::Identity(2, 2), 1.0) == doctest::Approx(2.0).epsilon(1e-12));

    Mat col(2, 1);
    col << 1.0, 1.0; // single singular value sqrt(2)
    CHECK(schatten_qnorm_pow(col, 2.0 / 3.0) == doctest::Approx(std::pow(2.0, 1.0 / 3.0)).epsilon(1e-12));

    Rng rng(7);
    Vec u(4), v(3);
    for (int i = 0; i < 4; ++i) u(i) = rng.normal();
    for (int i = 0; i < 3; ++i) v(i) = rng.normal();
    u.normalize();
    v.normalize();
    Mat rank_one = u * v.transpose();
    for (double q : {0.4, 2.0 / 3.0, 1.0})
        CHECK(schatten_qnorm_pow(rank_one, q) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("schatten rejects q outside (0, 1]") {
    CHECK_THROWS_AS(schatten_qnorm_pow(Mat::Identity(2, 2), 0.0), InvalidInput);
    CHECK_THROWS_AS(schatten_qnorm_pow(Mat::Identity(2, 2), 1.5), InvalidInput);
    CHECK_NOTHROW(schatten_qnorm_pow(Mat::Identity(2, 2), 1.0));
}

TEST_CASE("spectral norm") {
    CHECK(spectral_norm(Mat::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-14));
    Mat M = Mat::Zero(2, 2);
    M(0, 0) = 2.0;
    M(1, 1) = 5.0;
    CHECK(spectral_norm(M) == doctest::Approx(5.0).epsilon(1e-14));
    Mat R = random_mat(11, 4, 3);
    CHECK(spectral_norm(R) == svd(R).sigma(0)); // same code path, exact
}

TEST_CASE("spectral ball projection") {
    Mat half = 0.5 * Mat::Identity(2, 2);
    CHECK((project_spectral_ball(half) - half).norm() == 0.0); // already feasible: untouched

    Mat M = Mat::Zero(2, 2);
    M(0, 0) = 3.0;
    M(1, 1) = 0.5;
    Mat P = project_spectral_ball(M);
    CHECK(P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(P(1, 1) == doctest::Approx(0.5).epsilon(1e-12));

    Mat R = 4.0 * random_mat(13, 3, 3);
    REQUIRE(spectral_norm(R) > 1.0);
    CHECK(spectral_norm(project_spectral_ball(R)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("norm ordering and scale homogeneity") {
    for (std::uint64_t seed = 20; seed < 40; ++seed) {
        Mat M = random_mat(seed, 2 + seed % 4, 2 + seed % 3);
        CHECK(spectral_norm(M) <= schatten_qnorm_pow(M, 1.0) * (1 + 1e-12));
        for (double q : {0.5, 1.0}) {
            const double c = -2.7;
            const double lhs = schatten_qnorm_pow(c * M, q);
            const double rhs = std::pow(std::abs(c), q) * schatten_qnorm_pow(M, q);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("orthogonal invariance of schatten values") {
    Mat M = random_mat(55, 4, 3);
    Mat L = random_orthogonal(56, 4), R = random_orthogonal(57, 3);
    for (double q : {0.5, 1.0}) {
        const double base = schatten_qnorm_pow(M, q);
        CHECK(schatten_qnorm_pow(L * M, q) == doctest::Approx(base).epsilon(1e-10));
        CHECK(schatten_qnorm_pow(M * R, q) == doctest::Approx(base).epsilon(1e-10));
        CHECK(schatten_qnorm_pow(L * M * R, q) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("rank uses the tolerance") {
    Mat M = Mat::Zero(3, 3);
    M(0, 0) = 1.0;
    M(1, 1) = 1e-14; // below 1e-10 * sigma_1
    CHECK(svd(M).rank() == 1);
    M(1, 1) = 1e-3;
    CHECK(svd(M).rank() == 2);
    CHECK(svd(Mat::Zero(2, 2)).rank() == 0);
}
