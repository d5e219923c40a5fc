#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "lmmcal/math.hpp"

using namespace lmmcal;

TEST_CASE("normal_cdf matches reference points and symmetry") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
    for (double x : {-8.0, -3.5, -1.0, -0.1, 0.3, 2.0, 6.0}) {
        CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(normal_cdf(x) >= 0.0);
        CHECK(normal_cdf(x) <= 1.0);
    }
    // deep tails keep relative accuracy (erfc path, no cancellation)
    CHECK(normal_cdf(-10.0) == doctest::Approx(7.619853024160527e-24).epsilon(1e-12));
}

TEST_CASE("inverse_normal_cdf round-trips through normal_cdf") {
    for (double p : {1e-12, 1e-6, 0.025, 0.31830988618, 0.5, 0.68, 0.975, 1.0 - 1e-6}) {
        const double x = inverse_normal_cdf(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    CHECK(std::isinf(inverse_normal_cdf(0.0)));
    CHECK(inverse_normal_cdf(0.0) < 0.0);
    CHECK(std::isinf(inverse_normal_cdf(1.0)));
    CHECK(inverse_normal_cdf(1.0) > 0.0);
    CHECK_THROWS_AS(inverse_normal_cdf(-0.2), std::invalid_argument);
    CHECK_THROWS_AS(inverse_normal_cdf(1.2), std::invalid_argument);
}

TEST_CASE("black_scholes degenerate cases") {
    // zero variance pays intrinsic
    CHECK(black_scholes(1.0, 0.8, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(black_scholes(0.7, 0.8, 0.0) == 0.0);
    // zero strike is certain exercise
    CHECK(black_scholes(0.48, 0.0, 0.3) == doctest::Approx(0.48).epsilon(1e-15));
    CHECK_THROWS_AS(black_scholes(1.0, 0.8, -1e-12), std::invalid_argument);
    CHECK_THROWS_AS(black_scholes(0.0, 0.8, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(black_scholes(-1.0, 0.8, 0.1), std::invalid_argument);
}

TEST_CASE("black_scholes at the money closed form") {
    // ATM price is F * (N(sqrt(V)/2) - N(-sqrt(V)/2))
    const double F = 0.48, V = 0.25;
    const double sd = std::sqrt(V);
    const double expected = F * (normal_cdf(0.5 * sd) - normal_cdf(-0.5 * sd));
    CHECK(black_scholes(F, F, V) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("black_scholes bounds and monotonicity in variance") {
    const double F = 1.1, k = 0.9;
    double prev = black_scholes(F, k, 0.0);
    for (double V : {0.01, 0.04, 0.16, 0.64, 2.56}) {
        const double p = black_scholes(F, k, V);
        CHECK(p >= prev);           // vega is nonnegative
        CHECK(p >= F - k);          // above intrinsic
        CHECK(p <= F);              // below the forward
        prev = p;
    }
}

TEST_CASE("implied_variance inverts black_scholes") {
    for (double F : {0.05, 0.48, 1.0, 3.2}) {
        for (double m : {0.6, 0.9, 1.0, 1.1, 1.7}) {
            for (double V : {1e-6, 0.01, 0.2, 1.5}) {
                const double k = m * F;
                const double price = black_scholes(F, k, V);
                if (price <= std::max(F - k, 0.0) + 1e-300) continue;
                CHECK(implied_variance(F, k, price) == doctest::Approx(V).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("implied_variance rejects prices outside the no-arbitrage range") {
    CHECK_THROWS_AS(implied_variance(1.0, 0.8, 0.19), std::invalid_argument);  // below intrinsic
    CHECK_THROWS_AS(implied_variance(1.0, 0.8, 1.01), std::invalid_argument);  // above forward
}
