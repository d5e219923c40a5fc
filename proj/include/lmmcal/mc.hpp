#pragma once

#include <cstdint>

#include "lmmcal/basket.hpp"
#include "lmmcal/curve.hpp"
#include "lmmcal/vol.hpp"

namespace lmmcal {

struct SimConfig {
    std::int64_t paths = 200000;
    int steps_per_period = 1;   // Euler substeps per volatility period (LMM / path integrals)
    std::uint64_t seed = 0;
    bool antithetic = true;
    double rate_cap = 10.0;     // explosion guard for simulated rates
    double target_ci = 0.0;     // auto path escalation until 1.96*SE <= target; 0 = off
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    std::int64_t paths_used = 0;
};

// Exact per-period lognormal stepping of the basket (no discretization bias);
// payoff (sum omega_i F_i(T) - k)^+.
McEstimate simulate_basket_bs(const BasketSpec& basket, const VolSpec& vols,
                              const SimConfig& config);

// Full Libor-market-model Euler log-scheme under the terminal forward measure
// of the swap's last payment date; prices a payer swaption on `spec`.
McEstimate simulate_lmm_swaption(const YieldCurve& curve, const VolSpec& vols,
                                 const SwapSpec& spec, double strike, const SimConfig& config);

// MC estimate of the expected first-order hedging tracking error
// E[int_t^T sum_i <xi_i, sigma_w> w_{i,s} F_s n(h(V_{s,T}, F_s)) / sqrt(V_{s,T}) ds]
// along exact basket paths; time integral by per-step rectangle rule.
McEstimate mc_tracking_error(const BasketSpec& basket, const VolSpec& vols,
                             const SimConfig& config);

struct WeightStabilityStats {
    Eigen::VectorXd fra_vol;     // realized vol of ln K_i, pooled over paths
    Eigen::VectorXd weight_vol;  // realized vol of ln omega_i(s)
    Eigen::VectorXd ratio;       // QV(ln K_i) / QV(ln omega_i); +inf when weights never move
    std::int64_t paths_used = 0;
};

// Simulates the swap's weights omega_i(s) over [0, T_start] and reports the
// quadratic-variation ratio vol(FRA)/vol(weight) per weight.
WeightStabilityStats simulate_swap_weight_paths(const YieldCurve& curve, const VolSpec& vols,
                                                const SwapSpec& spec, const SimConfig& config);

// Thread budget for path-parallel loops: hardware concurrency capped by the
// LMM_CALIB_THREADS environment variable. Results are independent of the
// budget (fixed-block deterministic reduction).
int mc_thread_budget();

}  // namespace lmmcal
