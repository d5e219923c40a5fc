#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "lmmcal/rank.hpp"

using namespace lmmcal;

namespace {

Eigen::MatrixXd reference_covariance() {
    Eigen::MatrixXd m(5, 5);
    m << 0.64, 0.59, 0.32, 0.12, 0.06,
         0.59, 1.00, 0.67, 0.28, 0.13,
         0.32, 0.67, 0.64, 0.29, 0.14,
         0.12, 0.28, 0.29, 0.36, 0.11,
         0.06, 0.13, 0.14, 0.11, 0.16;
    return 0.11 * m;
}

}  // namespace

TEST_CASE("spectrum reconstructs the input matrix") {
    const Eigen::MatrixXd X = reference_covariance();
    const auto s = spectrum(X);
    REQUIRE(s.eigenvalues.size() == 5);
    const Eigen::MatrixXd rebuilt =
        s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    CHECK((rebuilt - X).norm() <= 1e-10 * X.norm());
    // orthonormal columns
    const Eigen::MatrixXd gram = s.eigenvectors.transpose() * s.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    // descending order and normalized fractions
    for (int i = 0; i + 1 < 5; ++i) CHECK(s.eigenvalues[i] >= s.eigenvalues[i + 1]);
    CHECK(s.fractions.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectrum on simple matrices") {
    const auto id = spectrum(Eigen::MatrixXd::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-14));

    Eigen::VectorXd w(4);
    w << 0.4, 0.3, 0.2, 0.1;
    const auto r1 = spectrum((w * w.transpose()).eval());
    CHECK(r1.eigenvalues[0] == doctest::Approx(w.squaredNorm()).epsilon(1e-12));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(r1.eigenvalues[i]) < 1e-14);
    CHECK(r1.fractions[0] == doctest::Approx(1.0).epsilon(1e-10));

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5,
            0.2, 1.0;
    CHECK_THROWS_AS(spectrum(asym), std::invalid_argument);
}

TEST_CASE("reference covariance has the frozen eigenstructure") {
    const auto s = spectrum(reference_covariance());
    const double eig[5] = {0.21999046962389518, 0.04612522976434453, 0.021404618691126417,
                           0.012329107188773647, 0.008150574731860082};
    const double frac[5] = {0.7142547715061535, 0.14975723949462516, 0.06949551523092995,
                            0.040029568794719646, 0.026462904973571705};
    for (int i = 0; i < 5; ++i) {
        CHECK(s.eigenvalues[i] == doctest::Approx(eig[i]).epsilon(1e-10));
        CHECK(s.fractions[i] == doctest::Approx(frac[i]).epsilon(1e-10));
    }
    // level then spread: first eigenvector single-signed, second changes sign once
    CHECK(count_sign_changes(s.eigenvectors.col(0)) == 0);
    CHECK(count_sign_changes(s.eigenvectors.col(1)) == 1);
}

TEST_CASE("eigenvector sign convention is plot-stable") {
    const auto s = spectrum(reference_covariance());
    for (int c = 0; c < 5; ++c) {
        int imax = 0;
        for (int i = 1; i < 5; ++i)
            if (std::abs(s.eigenvectors(i, c)) > std::abs(s.eigenvectors(imax, c))) imax = i;
        CHECK(s.eigenvectors(imax, c) > 0.0);
    }
}

TEST_CASE("reduce_rank keeps the top eigenpairs and stays PSD") {
    const Eigen::MatrixXd X = reference_covariance();
    // full rank request returns the matrix itself
    CHECK((reduce_rank(X, 5) - X).cwiseAbs().maxCoeff() < 1e-12);

    const auto s = spectrum(X);
    for (int d : {1, 2, 3}) {
        const Eigen::MatrixXd R = reduce_rank(X, d);
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 5);
        for (int i = 0; i < d; ++i)
            expect +=
                s.eigenvalues[i] * s.eigenvectors.col(i) * s.eigenvectors.col(i).transpose();
        CHECK((R - expect).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
        CHECK(es.eigenvalues().minCoeff() > -1e-13);
    }

    // indefinite input: negative eigenvalues are dropped, not kept
    Eigen::MatrixXd indef(2, 2);
    indef << 1.0, 2.0,
             2.0, 1.0;
    const Eigen::MatrixXd R = reduce_rank(indef, 2);
    Eigen::MatrixXd expect(2, 2);
    expect << 1.5, 1.5,
              1.5, 1.5;
    CHECK((R - expect).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(reduce_rank(X, 0), std::invalid_argument);
}

TEST_CASE("rank reduction is Frobenius-optimal among low-rank PSD matrices") {
    const Eigen::MatrixXd X = reference_covariance();
    const Eigen::MatrixXd best = reduce_rank(X, 2);
    const double dbest = (X - best).norm();
    // random rank-2 PSD competitors never beat the truncated spectrum
    std::srand(12345);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd B = best + 0.05 * Eigen::MatrixXd::Random(5, 2) *
                                       Eigen::MatrixXd::Random(2, 5);
        B = 0.5 * (B + B.transpose().eval());
        const Eigen::MatrixXd cand = reduce_rank(B, 2);
        CHECK((X - cand).norm() >= dbest - 1e-12);
    }
}

TEST_CASE("factor_loadings reproduce the reduced matrix") {
    const Eigen::MatrixXd X = reference_covariance();
    for (int d : {1, 2, 5}) {
        const Eigen::MatrixXd B = factor_loadings(X, d);
        REQUIRE(B.rows() == 5);
        REQUIRE(B.cols() == d);
        CHECK((B * B.transpose() - reduce_rank(X, d)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("count_sign_changes skips exact zeros") {
    Eigen::VectorXd v(3);
    v << 1.0, 1.0, 1.0;
    CHECK(count_sign_changes(v) == 0);
    v << 1.0, -1.0, 1.0;
    CHECK(count_sign_changes(v) == 2);
    v << 1.0, 0.0, -1.0;
    CHECK(count_sign_changes(v) == 1);
    Eigen::VectorXd w(5);
    w << -0.2, -0.1, 0.0, 0.3, 0.4;
    CHECK(count_sign_changes(w) == 1);
}
