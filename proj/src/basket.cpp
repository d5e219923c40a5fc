#include "lmmcal/basket.hpp"

#include <cmath>
#include <stdexcept>

namespace lmmcal {

Eigen::VectorXd BasketSpec::normalized_weights() const {
    const double fw = basket_value();
    if (!(fw > 0.0)) throw std::invalid_argument("BasketSpec: basket value must be positive");
    return (weights.array() * forwards.array() / fw).matrix();
}

void BasketSpec::validate(const VolSpec& vols) const {
    if (weights.size() != forwards.size() || weights.size() == 0)
        throw std::invalid_argument("BasketSpec: weight/forward size mismatch");
    if (!weights.allFinite() || !forwards.allFinite())
        throw std::invalid_argument("BasketSpec: non-finite inputs");
    if ((forwards.array() < 0.0).any())
        throw std::invalid_argument("BasketSpec: negative forward");
    if (!(T > t)) throw std::invalid_argument("BasketSpec: need T > t");
    if (vols.assets() != static_cast<int>(weights.size()))
        throw std::invalid_argument("BasketSpec: volatility asset count mismatch");
    if (strike < 0.0) throw std::invalid_argument("BasketSpec: negative strike");
}

double basket_variance(const Eigen::MatrixXd& omega, const VolSpec& vols, double t, double T) {
    if (omega.rows() != vols.assets() || omega.cols() != vols.assets())
        throw std::invalid_argument("basket_variance: omega dimension mismatch");
    double v = 0.0;
    vols.for_each_piece(t, T, [&](int p, double a, double b) {
        v += (b - a) * omega.cwiseProduct(vols.gamma(p)).sum();
    });
    return v;
}

double order_zero_price(const BasketSpec& basket, const VolSpec& vols) {
    basket.validate(vols);
    const Eigen::VectorXd w = basket.normalized_weights();
    const double V = basket_variance(w * w.transpose(), vols, basket.t, basket.T);
    return black_scholes(basket.basket_value(), basket.strike, V);
}

namespace {

// Correction integral with an explicit log-moneyness (the swaption wrapper
// swaps in ln(level/strike) behind its compatibility switch).
double correction_with_log_moneyness(const BasketSpec& basket, const VolSpec& vols,
                                     double log_moneyness, const QuadratureConfig& quad) {
    basket.validate(vols);
    const double fw = basket.basket_value();
    const Eigen::VectorXd w = basket.normalized_weights();
    const double V = basket_variance(w * w.transpose(), vols, basket.t, basket.T);
    if (V <= 0.0) return 0.0;             // limit of the formula
    if (basket.strike <= 0.0) return 0.0;  // certain exercise, price is linear
    const double sqrtV = std::sqrt(V);
    const int n = static_cast<int>(w.size());

    // per-period residual inner products c_j = (Gamma w)_j - w'Gamma w
    std::vector<Eigen::VectorXd> c;
    std::vector<std::pair<double, double>> pieces;
    vols.for_each_piece(basket.t, basket.T, [&](int p, double a, double b) {
        const Eigen::VectorXd gw = vols.gamma(p) * w;
        c.push_back(gw.array() - w.dot(gw));
        pieces.emplace_back(a, b);
    });

    const auto evaluate = [&](int nodes_per_piece) {
        double total = 0.0;
        Eigen::VectorXd I = Eigen::VectorXd::Zero(n);  // int_t^s <xi_j, sigma_w> du
        for (std::size_t pc = 0; pc < pieces.size(); ++pc) {
            const auto [a, b] = pieces[pc];
            const Eigen::VectorXd& cj = c[pc];
            const int m = nodes_per_piece;  // even
            const double h = (b - a) / m;
            double piece = 0.0;
            for (int q = 0; q <= m; ++q) {
                const Eigen::VectorXd Iq = I + cj * (h * q);
                double g = 0.0;
                for (int j = 0; j < n; ++j)
                    g += w[j] * cj[j] *
                         normal_pdf((log_moneyness + Iq[j] + 0.5 * V) / sqrtV);
                const double simpson = (q == 0 || q == m) ? 1.0 : (q % 2 ? 4.0 : 2.0);
                piece += simpson * g;
            }
            total += piece * h / 3.0;
            I += cj * (b - a);
        }
        return fw * total / sqrtV;
    };

    int m = std::max(2, quad.nodes_per_period + (quad.nodes_per_period % 2));
    double value = evaluate(m);
    while (m < quad.max_nodes_per_period) {
        m *= 2;
        const double refined = evaluate(m);
        const bool converged = std::abs(refined - value) < quad.rel_tol * fw;
        value = refined;
        if (converged) break;
    }
    return value;
}

}  // namespace

double order_one_correction(const BasketSpec& basket, const VolSpec& vols,
                            const QuadratureConfig& quad) {
    if (basket.strike <= 0.0) return 0.0;
    return correction_with_log_moneyness(
        basket, vols, std::log(basket.basket_value() / basket.strike), quad);
}

PriceBreakdown price_basket(const BasketSpec& basket, const VolSpec& vols, int order,
                            const QuadratureConfig& quad) {
    if (order != 0 && order != 1) throw std::invalid_argument("price_basket: order must be 0 or 1");
    PriceBreakdown out;
    const Eigen::VectorXd w = basket.normalized_weights();
    out.variance = basket_variance(w * w.transpose(), vols, basket.t, basket.T);
    out.order_zero = order_zero_price(basket, vols);
    out.order_one = order ? order_one_correction(basket, vols, quad) : 0.0;
    out.total = out.order_zero + out.order_one;
    return out;
}

namespace {

BasketSpec swap_basket(const YieldCurve& curve, const SwapSpec& spec, double strike) {
    const SwapDecomposition d = basket_weights(curve, spec);
    BasketSpec b;
    b.weights = d.weights;
    b.forwards = d.forwards;
    b.strike = strike;
    b.t = 0.0;
    b.T = curve.tenor_grid()[static_cast<std::size_t>(spec.start_index)];
    return b;
}

VolSpec swap_vols(const YieldCurve& curve, const SwapSpec& spec, const VolSpec& vols) {
    if (vols.assets() == spec.periods()) return vols;
    if (vols.assets() == curve.forward_count())
        return vols.slice(spec.start_index, spec.periods());
    throw std::invalid_argument("price_swaption: vol spec covers neither grid nor swap");
}

}  // namespace

PriceBreakdown price_swaption_breakdown(const YieldCurve& curve, const SwapSpec& spec,
                                        const VolSpec& vols, double strike,
                                        const SwaptionOptions& opts) {
    validate(curve, spec);
    const BasketSpec basket = swap_basket(curve, spec, strike);
    const VolSpec v = swap_vols(curve, spec, vols);
    const auto [swap, level] = swap_rate_and_level(curve, spec);
    (void)swap;
    double price = order_zero_price(basket, v);
    PriceBreakdown out;
    out.order_zero = level * price;
    const Eigen::VectorXd w = basket.normalized_weights();
    out.variance = basket_variance(w * w.transpose(), v, basket.t, basket.T);
    if (opts.order == 1) {
        double c1;
        if (opts.level_in_density && strike > 0.0)
            c1 = correction_with_log_moneyness(basket, v, std::log(level / strike), opts.quad);
        else
            c1 = order_one_correction(basket, v, opts.quad);
        out.order_one = level * c1;
        price += c1;
    } else if (opts.order != 0) {
        throw std::invalid_argument("price_swaption: order must be 0 or 1");
    }
    out.total = level * price;
    return out;
}

double price_swaption(const YieldCurve& curve, const SwapSpec& spec, const VolSpec& vols,
                      double strike, const SwaptionOptions& opts) {
    return price_swaption_breakdown(curve, spec, vols, strike, opts).total;
}

double weight_contribution_bound(const YieldCurve& curve, const SwapSpec& spec,
                                 const VolSpec& vols, double gamma_bar) {
    validate(curve, spec);
    const VolSpec v = swap_vols(curve, spec, vols);
    if (gamma_bar < v.max_vol_norm() - 1e-12)
        throw std::invalid_argument("weight_contribution_bound: gamma_bar below realized vol norm");
    const SwapDecomposition d = basket_weights(curve, spec);
    const double T = curve.tenor_grid()[static_cast<std::size_t>(spec.start_index)];
    const double delta = curve.delta();
    const double nspan = static_cast<double>(spec.end_index - spec.start_index);
    const double g2 = gamma_bar * gamma_bar;
    const auto M = [&](double m) { return std::exp(T * m * g2 * (0.5 + delta * nspan)); };
    const double spread2 = (d.forwards.array() - d.swap_rate).square().maxCoeff();
    const double kmax2 = d.forwards.array().square().maxCoeff();
    const double m8 = M(8.0), m4 = M(4.0);
    return spread2 * m8 * m8 * m4 * m4 * g2 * delta * delta * kmax2 * nspan * nspan;
}

}  // namespace lmmcal
