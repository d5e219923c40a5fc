#include "lmmcal/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace lmmcal {

namespace {
constexpr double kGridTol = 1e-9;
}

YieldCurve::YieldCurve(std::vector<double> tenors, std::vector<double> discounts)
    : tenors_(std::move(tenors)), dfs_(std::move(discounts)) {
    if (tenors_.size() < 2 || tenors_.size() != dfs_.size())
        throw std::invalid_argument("YieldCurve: need >= 2 grid points with matching discounts");
    delta_ = tenors_[1] - tenors_[0];
    if (!(delta_ > 0.0)) throw std::invalid_argument("YieldCurve: grid not increasing");
    for (std::size_t i = 0; i + 1 < tenors_.size(); ++i) {
        if (std::abs((tenors_[i + 1] - tenors_[i]) - delta_) > kGridTol * (1.0 + delta_))
            throw std::invalid_argument("YieldCurve: grid spacing not uniform");
    }
    if (!(tenors_[0] > 0.0)) throw std::invalid_argument("YieldCurve: first tenor must be positive");
    double prev = 1.0 + 1e-15;
    for (double df : dfs_) {
        if (!(df > 0.0) || df >= prev)
            throw std::invalid_argument("YieldCurve: discounts must be positive and strictly decreasing");
        prev = df;
    }
}

YieldCurve YieldCurve::from_forwards(const std::vector<double>& tenors,
                                     const std::vector<double>& forwards) {
    if (tenors.size() != forwards.size() || tenors.empty())
        throw std::invalid_argument("from_forwards: tenor/forward size mismatch");
    const double delta = tenors.size() > 1 ? tenors[1] - tenors[0] : tenors[0];
    std::vector<double> grid(tenors);
    grid.push_back(tenors.back() + delta);
    std::vector<double> dfs(grid.size());
    dfs[0] = 1.0 / (1.0 + tenors[0] * forwards[0]);  // stub convention
    for (std::size_t i = 0; i < forwards.size(); ++i)
        dfs[i + 1] = dfs[i] / (1.0 + delta * forwards[i]);
    return YieldCurve(std::move(grid), std::move(dfs));
}

double YieldCurve::discount(double T) const {
    if (T < -kGridTol || T > tenors_.back() + kGridTol)
        throw std::invalid_argument("YieldCurve::discount: time outside grid");
    if (T <= 0.0) return 1.0;
    if (T <= tenors_.front()) {
        // implied constant stub rate on [0, T_1]
        const double r = -std::log(dfs_.front()) / tenors_.front();
        return std::exp(-r * T);
    }
    const auto it = std::upper_bound(tenors_.begin(), tenors_.end(), T);
    std::size_t hi = std::min<std::size_t>(tenors_.size() - 1,
                                           static_cast<std::size_t>(it - tenors_.begin()));
    std::size_t lo = hi - 1;
    const double a = (T - tenors_[lo]) / (tenors_[hi] - tenors_[lo]);
    return std::exp((1.0 - a) * std::log(dfs_[lo]) + a * std::log(dfs_[hi]));
}

double forward_libor(const YieldCurve& curve, int i) {
    if (i < 0 || i + 1 >= curve.grid_size())
        throw std::out_of_range("forward_libor: index outside grid");
    return (curve.discount_at(i) / curve.discount_at(i + 1) - 1.0) / curve.delta();
}

void validate(const YieldCurve& curve, const SwapSpec& spec) {
    if (spec.start_index < 0 || spec.end_index + 1 >= curve.grid_size())
        throw std::invalid_argument("SwapSpec: indices outside curve grid");
    if (spec.start_index > spec.end_index)
        throw std::invalid_argument("SwapSpec: start after end");
    if (std::abs(spec.coverage - curve.delta()) > kGridTol * (1.0 + curve.delta()))
        throw std::invalid_argument("SwapSpec: coverage does not match curve spacing");
}

std::pair<double, double> swap_rate_and_level(const YieldCurve& curve, const SwapSpec& spec) {
    validate(curve, spec);
    double level = 0.0;
    for (int i = spec.start_index; i <= spec.end_index; ++i)
        level += curve.delta() * curve.discount_at(i + 1);
    const double swap =
        (curve.discount_at(spec.start_index) - curve.discount_at(spec.end_index + 1)) / level;
    return {swap, level};
}

SwapDecomposition basket_weights(const YieldCurve& curve, const SwapSpec& spec) {
    const auto [swap, level] = swap_rate_and_level(curve, spec);
    const int n = spec.periods();
    SwapDecomposition d;
    d.swap_rate = swap;
    d.level = level;
    d.start_index = spec.start_index;
    d.grid_forwards = curve.forward_count();
    d.weights.resize(n);
    d.normalized_weights.resize(n);
    d.forwards.resize(n);
    for (int j = 0; j < n; ++j) {
        const int i = spec.start_index + j;
        d.weights[j] = curve.delta() * curve.discount_at(i + 1) / level;
        d.forwards[j] = forward_libor(curve, i);
        d.normalized_weights[j] = d.weights[j] * d.forwards[j] / swap;
    }
    return d;
}

int grid_index(const YieldCurve& curve, double years) {
    const auto& grid = curve.tenor_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - years) <= 1e-6 * std::max(1.0, std::abs(years)) + 1e-9)
            return static_cast<int>(i);
    }
    throw std::invalid_argument("grid_index: " + std::to_string(years) +
                                " is off the tenor grid");
}

Eigen::MatrixXd omega_matrix(const SwapDecomposition& decomp) {
    const int n = decomp.grid_forwards;
    const int m = static_cast<int>(decomp.normalized_weights.size());
    if (decomp.start_index + m > n)
        throw std::invalid_argument("omega_matrix: decomposition exceeds grid");
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    omega.block(decomp.start_index, decomp.start_index, m, m) =
        decomp.normalized_weights * decomp.normalized_weights.transpose();
    return omega;
}

}  // namespace lmmcal
