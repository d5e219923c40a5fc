#pragma once

#include <cmath>
#include <stdexcept>

namespace lmmcal {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

inline double normal_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

// |error| < 1e-15 over the whole real line (erfc-based, no tail cancellation).
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Wichura's PPND16: inverse normal CDF to ~1e-15 relative accuracy.
double inverse_normal_cdf(double p);

// Undiscounted Black price of a call on forward F, strike k, cumulative variance V.
// V = 0 degenerates to intrinsic; k = 0 to certain exercise.
double black_scholes(double F, double k, double V);

// Implied cumulative variance: inverse of black_scholes in V (bisection + Newton polish).
double implied_variance(double F, double k, double price);

}  // namespace lmmcal
