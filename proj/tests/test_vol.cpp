#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lmmcal/vol.hpp"

using namespace lmmcal;

namespace {

VolSpec two_period_spec() {
    Eigen::MatrixXd s1(3, 2), s2(3, 2);
    s1 << 0.20, 0.00,
          0.15, 0.05,
          0.10, 0.08;
    s2 << 0.18, 0.02,
          0.12, 0.06,
          0.09, 0.09;
    return VolSpec({0.0, 1.0, 2.5}, {s1, s2});
}

}  // namespace

TEST_CASE("VolSpec from vectors exposes Gamma = sigma sigma^T per period") {
    const auto v = two_period_spec();
    CHECK(v.periods() == 2);
    CHECK(v.assets() == 3);
    CHECK(v.dim() == 2);
    CHECK(v.has_vectors());
    for (int p = 0; p < 2; ++p) {
        const Eigen::MatrixXd expect = v.loadings(p) * v.loadings(p).transpose();
        CHECK((v.gamma(p) - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("VolSpec construction validates shapes and boundaries") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(2, 1, 0.2);
    CHECK_THROWS_AS(VolSpec({0.0, 1.0, 2.0}, {s}), std::invalid_argument);
    CHECK_THROWS_AS(VolSpec({1.0, 0.0}, {s}), std::invalid_argument);
    CHECK_THROWS_AS(VolSpec({0.0, 0.0}, {s}), std::invalid_argument);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(3, 1, 0.2);
    CHECK_THROWS_AS(VolSpec({0.0, 1.0, 2.0}, {s, bad}), std::invalid_argument);
    CHECK_THROWS_AS(VolSpec({}, std::vector<Eigen::MatrixXd>{}), std::invalid_argument);
}

TEST_CASE("covariance-form spec factorizes to matching loadings") {
    Eigen::MatrixXd g(2, 2);
    g << 0.04, 0.01,
         0.01, 0.02;
    const auto v = VolSpec::from_covariances({0.0, 2.0}, {g});
    CHECK_FALSE(v.has_vectors());
    const Eigen::MatrixXd L = v.loadings(0);
    CHECK((L * L.transpose() - g).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::MatrixXd asym(2, 2);
    asym << 0.04, 0.02,
            0.01, 0.02;
    CHECK_THROWS_AS(VolSpec::from_covariances({0.0, 1.0}, {asym}), std::invalid_argument);
}

TEST_CASE("stationary spec covers a single period") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2) * 0.04;
    const auto v = VolSpec::stationary(g, 5.0);
    CHECK(v.periods() == 1);
    CHECK(v.start() == 0.0);
    CHECK(v.end() == 5.0);
    CHECK((v.gamma(0) - g).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(VolSpec::stationary(g, 0.0), std::invalid_argument);
}

TEST_CASE("period_index respects boundaries") {
    const auto v = two_period_spec();
    CHECK(v.period_index(0.0) == 0);
    CHECK(v.period_index(0.999) == 0);
    CHECK(v.period_index(1.0) == 1);
    CHECK(v.period_index(2.5) == 1);
    CHECK_THROWS_AS(v.period_index(-0.5), std::invalid_argument);
    CHECK_THROWS_AS(v.period_index(3.0), std::invalid_argument);
}

TEST_CASE("for_each_piece covers [t,T] exactly and splits additively") {
    const auto v = two_period_spec();

    double len = 0.0;
    v.for_each_piece(0.3, 2.1, [&](int, double a, double b) { len += b - a; });
    CHECK(len == doctest::Approx(1.8).epsilon(1e-15));

    // integral of a per-period constant over [t,T] equals the sum over any split
    auto integrate = [&](double t, double T) {
        double acc = 0.0;
        v.for_each_piece(t, T, [&](int p, double a, double b) {
            acc += (b - a) * v.gamma(p)(0, 0);
        });
        return acc;
    };
    const double whole = integrate(0.1, 2.4);
    for (double s : {0.1 + 1e-9, 0.7, 1.0, 1.3, 2.4 - 1e-9}) {
        CHECK(integrate(0.1, s) + integrate(s, 2.4) == doctest::Approx(whole).epsilon(1e-14));
    }

    CHECK_THROWS_AS(v.for_each_piece(1.0, 0.5, [](int, double, double) {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(v.for_each_piece(0.0, 3.1, [](int, double, double) {}),
                    std::invalid_argument);
}

TEST_CASE("slice restricts the asset range") {
    const auto v = two_period_spec();
    const auto sub = v.slice(1, 2);
    CHECK(sub.assets() == 2);
    CHECK(sub.periods() == 2);
    for (int p = 0; p < 2; ++p)
        CHECK((sub.gamma(p) - v.gamma(p).block(1, 1, 2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(v.slice(2, 2), std::invalid_argument);
    CHECK_THROWS_AS(v.slice(-1, 1), std::invalid_argument);

    // covariance-form specs slice the Gamma blocks directly
    Eigen::MatrixXd g(3, 3);
    g << 0.04, 0.01, 0.00,
         0.01, 0.02, 0.005,
         0.00, 0.005, 0.03;
    const auto cg = VolSpec::from_covariances({0.0, 1.0}, {g}).slice(0, 2);
    CHECK((cg.gamma(0) - g.block(0, 0, 2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("max_vol_norm is the largest per-asset vol over the path") {
    const auto v = two_period_spec();
    double expect = 0.0;
    for (int p = 0; p < v.periods(); ++p)
        for (int i = 0; i < v.assets(); ++i)
            expect = std::max(expect, std::sqrt(v.gamma(p)(i, i)));
    CHECK(v.max_vol_norm() == doctest::Approx(expect).epsilon(1e-15));
}
