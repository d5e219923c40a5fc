#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lmmcal {

// Discount curve on a uniform tenor grid T_1..T_{N+1}, valuation at t = 0.
// Discount factors are canonical; forward-rate construction converts up front.
class YieldCurve {
public:
    YieldCurve(std::vector<double> tenors, std::vector<double> discounts);

    // tenors holds the reset times T_1..T_N; the grid is extended by one period
    // so the last forward has a payment date. The stub discount B(0,T_1) uses
    // the first forward as the [0,T_1] rate.
    static YieldCurve from_forwards(const std::vector<double>& tenors,
                                    const std::vector<double>& forwards);

    const std::vector<double>& tenor_grid() const { return tenors_; }
    const std::vector<double>& discount_factors() const { return dfs_; }
    double delta() const { return delta_; }
    int grid_size() const { return static_cast<int>(tenors_.size()); }
    // number of forwards on the grid
    int forward_count() const { return grid_size() - 1; }

    double discount_at(int i) const { return dfs_.at(static_cast<std::size_t>(i)); }
    // log-linear interpolation between grid points; flat in log beyond the ends
    // is not allowed: T must lie within [T_1, T_{N+1}]. T below T_1 discounts
    // off the implied [0,T_1] stub rate.
    double discount(double T) const;

private:
    std::vector<double> tenors_;
    std::vector<double> dfs_;
    double delta_ = 0.0;
};

struct SwapSpec {
    int start_index = 0;  // i_T: grid index of the swap start / first reset
    int end_index = 0;    // N: grid index of the last floating reset
    double coverage = 0.0;  // delta, must match the curve spacing

    int periods() const { return end_index - start_index + 1; }
};

struct SwapDecomposition {
    double swap_rate = 0.0;
    double level = 0.0;
    Eigen::VectorXd weights;             // omega_i(t), i = i_T..N
    Eigen::VectorXd normalized_weights;  // w_i = omega_i K_i / swap
    Eigen::VectorXd forwards;            // K(t,T_i) over the same range
    int start_index = 0;
    int grid_forwards = 0;  // forward count of the owning curve, for embedding
};

// K(t,T_i) = (B(t,T_i)/B(t,T_{i+1}) - 1)/delta
double forward_libor(const YieldCurve& curve, int i);

// Index of `years` on the tenor grid (1e-6 relative tolerance); throws when
// the time is off-grid.
int grid_index(const YieldCurve& curve, double years);

void validate(const YieldCurve& curve, const SwapSpec& spec);

// level = sum delta * B(t,T_{i+1}); swap = (B(t,T) - B(t,T_{N+1})) / level
std::pair<double, double> swap_rate_and_level(const YieldCurve& curve, const SwapSpec& spec);

SwapDecomposition basket_weights(const YieldCurve& curve, const SwapSpec& spec);

// Rank-1 matrix w w^T embedded at the swap's index range in the full grid.
Eigen::MatrixXd omega_matrix(const SwapDecomposition& decomp);

}  // namespace lmmcal
