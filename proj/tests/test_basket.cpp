#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lmmcal/basket.hpp"
#include "lmmcal/curve.hpp"
#include "lmmcal/math.hpp"
#include "lmmcal/vol.hpp"

using namespace lmmcal;

namespace {

// five-asset reference basket: equal weights, dispersed forwards,
// stationary covariance with level/spread/convexity structure
Eigen::MatrixXd reference_covariance() {
    Eigen::MatrixXd m(5, 5);
    m << 0.64, 0.59, 0.32, 0.12, 0.06,
         0.59, 1.00, 0.67, 0.28, 0.13,
         0.32, 0.67, 0.64, 0.29, 0.14,
         0.12, 0.28, 0.29, 0.36, 0.11,
         0.06, 0.13, 0.14, 0.11, 0.16;
    return 0.11 * m;
}

BasketSpec reference_basket(double strike) {
    BasketSpec b;
    b.weights = Eigen::VectorXd::Constant(5, 0.2);
    b.forwards.resize(5);
    b.forwards << 0.7, 0.5, 0.4, 0.4, 0.4;
    b.strike = strike;
    b.t = 0.0;
    b.T = 5.0;
    return b;
}

VolSpec reference_vols() { return VolSpec::stationary(reference_covariance(), 5.0); }

}  // namespace

TEST_CASE("reference basket variance and Black price are frozen") {
    const auto b = reference_basket(0.48);
    CHECK(b.basket_value() == doctest::Approx(0.48).epsilon(1e-15));
    const Eigen::VectorXd w = b.normalized_weights();
    Eigen::VectorXd expect_w(5);
    expect_w << 0.7, 0.5, 0.4, 0.4, 0.4;
    expect_w /= 2.4;
    CHECK((w - expect_w).cwiseAbs().maxCoeff() < 1e-15);

    const double V = basket_variance(w * w.transpose(), reference_vols(), 0.0, 5.0);
    CHECK(V == doctest::Approx(0.19546006944444444).epsilon(1e-13));
    CHECK(order_zero_price(b, reference_vols()) ==
          doctest::Approx(0.0839759380890413).epsilon(1e-12));
}

TEST_CASE("basket_variance degenerate and additivity properties") {
    Eigen::MatrixXd g(2, 2);
    g << 0.09, 0.02,
         0.02, 0.04;
    const auto v = VolSpec::from_covariances({0.0, 1.0, 3.0}, {g, (2.0 * g).eval()});

    // caplet case: omega = e1 e1' picks the single-asset variance
    Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(2, 2);
    e11(0, 0) = 1.0;
    CHECK(basket_variance(e11, v, 0.0, 1.0) == doctest::Approx(0.09).epsilon(1e-15));

    // constant covariance integrates to Tr(omega Gamma) * (T - t)
    Eigen::MatrixXd omega(2, 2);
    omega << 0.5, 0.2,
             0.2, 0.3;
    const double tr = omega.cwiseProduct(g).sum();
    CHECK(basket_variance(omega, v, 0.2, 0.9) == doctest::Approx(0.7 * tr).epsilon(1e-14));

    // split at an off-grid time is exactly additive
    const double whole = basket_variance(omega, v, 0.0, 3.0);
    for (double s : {0.37, 1.0, 1.61, 2.9}) {
        CHECK(basket_variance(omega, v, 0.0, s) + basket_variance(omega, v, s, 3.0) ==
              doctest::Approx(whole).epsilon(1e-14));
    }

    CHECK_THROWS_AS(basket_variance(Eigen::MatrixXd::Zero(3, 3), v, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("zero volatility prices at intrinsic with no correction") {
    auto b = reference_basket(0.4);
    const auto v = VolSpec::stationary(Eigen::MatrixXd::Zero(5, 5), 5.0);
    CHECK(order_zero_price(b, v) == doctest::Approx(0.08).epsilon(1e-15));
    CHECK(order_one_correction(b, v) == 0.0);
    b.strike = 0.6;
    CHECK(order_zero_price(b, v) == 0.0);
}

TEST_CASE("single-asset basket reduces to the Black formula") {
    BasketSpec b;
    b.weights = Eigen::VectorXd::Constant(1, 1.0);
    b.forwards = Eigen::VectorXd::Constant(1, 0.05);
    b.strike = 0.055;
    b.t = 0.0;
    b.T = 2.0;
    Eigen::MatrixXd s(1, 1);
    s << 0.2;
    const VolSpec v({0.0, 2.0}, {s});
    CHECK(order_zero_price(b, v) ==
          doctest::Approx(black_scholes(0.05, 0.055, 0.04 * 2.0)).epsilon(1e-14));
    // one asset has zero residual volatility, so the correction vanishes
    CHECK(std::abs(order_one_correction(b, v)) < 1e-18);
}

TEST_CASE("equal volatility vectors make the correction vanish") {
    auto b = reference_basket(0.5);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(5, 2);
    for (int i = 0; i < 5; ++i) {
        s(i, 0) = 0.2;
        s(i, 1) = -0.05;
    }
    const VolSpec v({0.0, 5.0}, {s});
    // residual vols vanish up to the rounding of sum(w) = 1
    CHECK(std::abs(order_one_correction(b, v)) < 1e-14);
    // and the order-zero price is then exact lognormal Black
    const double V = 0.0425 * 5.0;  // |sigma|^2 T
    CHECK(order_zero_price(b, v) ==
          doctest::Approx(black_scholes(0.48, 0.5, V)).epsilon(1e-13));
}

TEST_CASE("price_basket composes the expansion orders") {
    const auto b = reference_basket(0.55);
    const auto v = reference_vols();
    const auto p0 = price_basket(b, v, 0);
    CHECK(p0.order_one == 0.0);
    CHECK(p0.total == doctest::Approx(order_zero_price(b, v)).epsilon(1e-15));
    const auto p1 = price_basket(b, v, 1);
    CHECK(p1.order_zero == doctest::Approx(p0.order_zero).epsilon(1e-15));
    CHECK(p1.total == doctest::Approx(p1.order_zero + p1.order_one).epsilon(1e-15));
    CHECK(p1.order_one != 0.0);
    CHECK(p1.variance == doctest::Approx(0.19546006944444444).epsilon(1e-13));
    CHECK_THROWS_AS(price_basket(b, v, 2), std::invalid_argument);
}

TEST_CASE("expansion prices are scale covariant") {
    const auto v = reference_vols();
    for (double lambda : {0.1, 10.0}) {
        for (double m : {0.85, 1.0, 1.2}) {
            auto b = reference_basket(m * 0.48);
            auto bs = b;
            bs.forwards *= lambda;
            bs.strike *= lambda;
            const auto p = price_basket(b, v, 1);
            const auto ps = price_basket(bs, v, 1);
            CHECK(ps.order_zero == doctest::Approx(lambda * p.order_zero).epsilon(1e-12));
            CHECK(ps.order_one == doctest::Approx(lambda * p.order_one).epsilon(1e-10));
        }
    }
}

TEST_CASE("order-zero price keeps no-arbitrage shape in the strike") {
    const auto v = reference_vols();
    double prev = 1e300;
    for (double m : {0.7, 0.9, 1.0, 1.1, 1.4}) {
        const auto b = reference_basket(m * 0.48);
        const double p = order_zero_price(b, v);
        CHECK(p <= prev);                                    // monotone in strike
        CHECK(p >= std::max(0.48 - b.strike, 0.0) - 1e-15);  // above intrinsic
        CHECK(p <= 0.48);                                    // below the forward
        prev = p;
    }
}

TEST_CASE("correction quadrature refinement is converged at defaults") {
    const auto b = reference_basket(0.55);
    // two periods with different dispersion so the integrand varies in s
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(5, 2), s2 = Eigen::MatrixXd::Zero(5, 2);
    for (int i = 0; i < 5; ++i) {
        s1(i, 0) = 0.18 + 0.03 * i;
        s1(i, 1) = 0.02 * (i - 2);
        s2(i, 0) = 0.22 - 0.02 * i;
        s2(i, 1) = -0.015 * (i - 1);
    }
    const VolSpec v({0.0, 2.0, 5.0}, {s1, s2});
    QuadratureConfig coarse;
    QuadratureConfig fine;
    fine.nodes_per_period = 256;
    fine.rel_tol = 1e-13;
    const double c = order_one_correction(b, v, coarse);
    const double f = order_one_correction(b, v, fine);
    CHECK(std::abs(c - f) < 1e-9);
}

TEST_CASE("swaption price composes level, Black term and correction") {
    std::vector<double> resets, fwds;
    for (int i = 0; i < 8; ++i) {
        resets.push_back(0.5 * (i + 1));
        fwds.push_back(0.04 + 0.002 * i);
    }
    const auto curve = YieldCurve::from_forwards(resets, fwds);
    const SwapSpec spec{2, 5, 0.5};
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(8, 2);
    for (int i = 0; i < 8; ++i) {
        s(i, 0) = 0.20 - 0.005 * i;
        s(i, 1) = 0.01 * i;
    }
    const VolSpec vols({0.0, 10.0}, {s});

    const auto d = basket_weights(curve, spec);
    const auto [swap, level] = swap_rate_and_level(curve, spec);
    const double strike = swap;

    SwaptionOptions opts;
    opts.order = 1;
    const auto bd = price_swaption_breakdown(curve, spec, vols, strike, opts);
    CHECK(bd.total == doctest::Approx(bd.order_zero + bd.order_one).epsilon(1e-14));
    CHECK(price_swaption(curve, spec, vols, strike, opts) ==
          doctest::Approx(bd.total).epsilon(1e-15));

    // the Black term is level * black(swap, k, V) with the basket variance
    const Eigen::VectorXd w = d.normalized_weights;
    const VolSpec sliced = vols.slice(2, 4);
    const double V = basket_variance(w * w.transpose(), sliced, 0.0, 1.5);
    CHECK(bd.variance == doctest::Approx(V).epsilon(1e-14));
    CHECK(bd.order_zero == doctest::Approx(level * black_scholes(swap, strike, V)).epsilon(1e-13));

    // grid-wide and pre-sliced vol specs agree
    CHECK(price_swaption(curve, spec, sliced, strike, opts) ==
          doctest::Approx(bd.total).epsilon(1e-14));

    // the compatibility variant moves the density argument, so it must differ
    SwaptionOptions alt = opts;
    alt.level_in_density = true;
    CHECK(price_swaption(curve, spec, vols, strike, alt) != bd.total);
}

TEST_CASE("weight_contribution_bound is a finite nonnegative diagnostic") {
    std::vector<double> resets = {0.5, 1.0, 1.5, 2.0}, fwds = {0.04, 0.042, 0.045, 0.047};
    const auto curve = YieldCurve::from_forwards(resets, fwds);
    const SwapSpec spec{0, 3, 0.5};
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(4, 1, 0.15);
    const VolSpec vols({0.0, 2.0}, {s});
    const double bound = weight_contribution_bound(curve, spec, vols, 0.2);
    CHECK(bound >= 0.0);
    CHECK(std::isfinite(bound));
    // tighter vol cap shrinks the bound
    CHECK(weight_contribution_bound(curve, spec, vols, 0.16) < bound);
    CHECK_THROWS_AS(weight_contribution_bound(curve, spec, vols, 0.1), std::invalid_argument);
}

TEST_CASE("basket input validation rejects malformed specs") {
    auto b = reference_basket(0.48);
    const auto v = reference_vols();
    auto bad = b;
    bad.T = 0.0;
    CHECK_THROWS_AS(order_zero_price(bad, v), std::invalid_argument);
    bad = b;
    bad.forwards[2] = -0.1;
    CHECK_THROWS_AS(order_zero_price(bad, v), std::invalid_argument);
    bad = b;
    bad.strike = -0.1;
    CHECK_THROWS_AS(order_zero_price(bad, v), std::invalid_argument);
    bad = b;
    bad.weights = Eigen::VectorXd::Constant(4, 0.25);
    CHECK_THROWS_AS(order_zero_price(bad, v), std::invalid_argument);
}
