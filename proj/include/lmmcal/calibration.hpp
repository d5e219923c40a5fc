#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lmmcal/curve.hpp"

namespace lmmcal {

struct MarketQuote {
    enum class Kind { caplet, swaption };
    Kind kind = Kind::caplet;
    int start_index = 0;  // first reset; caplets have start == end
    int end_index = 0;    // last reset
    double expiry = 0.0;  // T_k, quote maturity in years
    double bid_vol = 0.0;
    double ask_vol = 0.0;
};

// One trace-linear band: lower <= <A, X> <= upper with A = T_k * Omega_k,
// bounds in cumulative-variance units sigma^2 T_k.
struct VarianceBand {
    Eigen::MatrixXd A;
    double lower = 0.0;
    double upper = 0.0;
    double maturity = 0.0;
};

struct CalibrationInstance {
    enum class Mode { single_matrix, per_period };
    int dimension = 0;
    Mode mode = Mode::single_matrix;
    std::vector<VarianceBand> constraints;
    // per-period mode: period p of [boundaries_p, boundaries_{p+1}); the
    // simplified structure ties X_p = s_p * X with scalars s_p >= 0
    std::vector<double> period_boundaries;
};

struct Objective {
    enum class Kind { feasibility, linear_bound, distance, max_entropy, smoothness, tikhonov };
    enum class Norm { frobenius, spectral };

    Kind kind = Kind::feasibility;
    Eigen::MatrixXd target;  // linear_bound direction / distance target / entropy prior
    bool maximize = false;   // linear_bound only
    Norm norm = Norm::frobenius;
    double alpha = 0.0;               // tikhonov ridge weight
    std::vector<double> mid_targets;  // tikhonov, variance units; empty = band midpoints
    double smoothness_weight = 0.0;   // additive extras, composable
    double trace_weight = 0.0;

    static Objective feasibility();
    static Objective linear_bound(const Eigen::MatrixXd& direction, bool maximize);
    static Objective distance_to_target(const Eigen::MatrixXd& A, Norm norm = Norm::frobenius);
    static Objective max_entropy(const Eigen::MatrixXd& prior);
    static Objective smoothness();
    static Objective tikhonov(double alpha, std::vector<double> mid_targets = {});
    Objective& with_smoothness(double weight);
    Objective& with_trace_penalty(double weight);
};

struct SolverConfig {
    double feas_tol = 1e-8;  // absolute band violation, variance units
    double psd_tol = 1e-9;
    double obj_tol = 1e-8;
    int max_iterations = 20000;  // Dykstra sweep budget for feasibility/projection
    int prox_outer = 50000;      // proximal-gradient outer iterations
    int prox_inner_sweeps = 300;
    int subgrad_outer = 4000;    // linear/spectral subgradient iterations
    int subgrad_inner_sweeps = 25;
    double step = 0.0;  // 0 = auto scale
    double unbounded_norm = 1e8;
    double maxent_floor = 1e-12;
};

struct CovarianceResult {
    Eigen::MatrixXd X;
    std::vector<Eigen::MatrixXd> per_period;  // per-period mode only
    std::vector<double> period_scales;
    // frobenius distance reports the squared norm; spectral the norm itself
    double objective_value = 0.0;
    Eigen::VectorXd residuals;  // per-constraint violation, variance units
    int iterations = 0;
    bool converged = false;
    std::string status;  // converged | max_iterations | likely_infeasible | unbounded
    double min_eigenvalue = 0.0;
};

// Maps quotes to rank-1 variance bands on the curve's forward grid.
CalibrationInstance build_instance(const YieldCurve& curve, const std::vector<MarketQuote>& quotes,
                                   CalibrationInstance::Mode mode =
                                       CalibrationInstance::Mode::single_matrix);

CovarianceResult solve(const CalibrationInstance& instance, const Objective& objective,
                       const SolverConfig& config = {});

struct PriceBounds {
    double min_variance = 0.0, max_variance = 0.0;
    double min_price = 0.0, max_price = 0.0;
    bool bounded_above = true;
    std::string min_status, max_status;
};

// Arbitrage bounds for a target swaption: extremize Tr(Omega_target X), then
// convert the variance bounds to prices via the Black formula on the target
// swap (ATM unless a strike is given). An unbounded maximum is reported as a
// status, not a number.
PriceBounds price_bounds(const CalibrationInstance& instance, const YieldCurve& curve,
                         const SwapSpec& target_spec, double T_target,
                         const SolverConfig& config = {}, double strike = -1.0);

// S = sum_{i,j >= 2} (X_ij - X_{i-1,j})^2 + (X_ij - X_{i,j-1})^2; boundary
// terms with out-of-range neighbors are dropped.
double smoothness_value(const Eigen::MatrixXd& X);

// Nearest (Frobenius) positive semidefinite matrix: eigenvalue clipping.
Eigen::MatrixXd project_to_psd_cone(const Eigen::MatrixXd& X);

}  // namespace lmmcal
