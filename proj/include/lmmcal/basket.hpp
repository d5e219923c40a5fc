#pragma once

#include <Eigen/Dense>

#include "lmmcal/curve.hpp"
#include "lmmcal/math.hpp"
#include "lmmcal/vol.hpp"

namespace lmmcal {

// Call on a weighted basket of lognormal forwards, observed at t, paying at T.
struct BasketSpec {
    Eigen::VectorXd weights;
    Eigen::VectorXd forwards;
    double strike = 0.0;
    double t = 0.0;
    double T = 0.0;

    double basket_value() const { return weights.dot(forwards); }
    // w_i = omega_i F_i / F_w, the martingale-weight vector frozen at t
    Eigen::VectorXd normalized_weights() const;
    void validate(const VolSpec& vols) const;
};

struct PriceBreakdown {
    double order_zero = 0.0;
    double order_one = 0.0;
    double total = 0.0;
    double variance = 0.0;  // V_{t,T}
};

struct QuadratureConfig {
    int nodes_per_period = 8;    // initial Simpson subintervals per period slice
    double rel_tol = 1e-10;      // refinement stop: |delta| < rel_tol * F_w
    int max_nodes_per_period = 2048;
};

// V_{t,T} = sum over period slices of |slice| * Tr(omega * Gamma_p).
double basket_variance(const Eigen::MatrixXd& omega, const VolSpec& vols, double t, double T);

double order_zero_price(const BasketSpec& basket, const VolSpec& vols);

// First-order correction of the frozen-weight Black price. The integrand uses
// the per-asset drift shift I_j(s) = int_t^s <xi_j, sigma_w> du inside the
// normal density; I_j accumulates exactly across the piecewise-constant
// periods and the outer integral is composite Simpson, refined until the
// doubling delta drops below rel_tol * F_w.
double order_one_correction(const BasketSpec& basket, const VolSpec& vols,
                            const QuadratureConfig& quad = {});

PriceBreakdown price_basket(const BasketSpec& basket, const VolSpec& vols, int order,
                            const QuadratureConfig& quad = {});

struct SwaptionOptions {
    int order = 0;
    // reproduce the variant that puts ln(level/strike) in the correction's
    // density argument; off by default (ln(swap/strike) is the consistent form)
    bool level_in_density = false;
    QuadratureConfig quad = {};
};

// Payer swaption at t=0: level * (Black on the frozen-weight basket + C1).
// vols may cover the whole curve grid (sliced to the swap's forwards) or
// exactly the swap's forwards.
double price_swaption(const YieldCurve& curve, const SwapSpec& spec, const VolSpec& vols,
                      double strike, const SwaptionOptions& opts = {});

// Same computation with the Black term, correction and variance reported
// separately; all price fields are level-scaled currency values.
PriceBreakdown price_swaption_breakdown(const YieldCurve& curve, const SwapSpec& spec,
                                        const VolSpec& vols, double strike,
                                        const SwaptionOptions& opts = {});

// Conservative diagnostic bound on the weights' volatility contribution:
// max_j (K_j - swap)^2 * M8^2 * M4^2 * gbar^2 * delta^2 * max_j K_j^2 * (N - i_T)^2
// with M_m = exp((T - t) m gbar^2 (1/2 + delta (N - i_T))). Never adjusts prices.
double weight_contribution_bound(const YieldCurve& curve, const SwapSpec& spec,
                                 const VolSpec& vols, double gamma_bar);

}  // namespace lmmcal
