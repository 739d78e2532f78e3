#pragma once

#include <utility>
#include <vector>

#include "elcb/data.hpp"

namespace elcb {

// Plain inverse-propensity-scoring mean (1/N) sum w_n r_n.
double ips(const Dataset& ds);
double ips(const std::vector<Atom>& atoms);

// Self-normalized variant sum w_n r_n / sum w_n (0 when all weights vanish).
double snips(const Dataset& ds);
double snips(const std::vector<Atom>& atoms);

/**
 * Doubly robust estimate with the constant reward predictor 1/2, clipped to
 * the unit interval: clip(1/2 + (1/N) sum w_n (r_n - 1/2)).
 */
double clipped_dr_const_half(const Dataset& ds);
double clipped_dr_const_half(const std::vector<Atom>& atoms);

/**
 * Tilt coefficient of the empirical-likelihood weight distribution.
 *
 * Maximizes sum_n log(1 + beta (w_n - 1)) subject to positivity of the tilt
 * at both ends of the weight range.  The derivative is strictly decreasing,
 * so the maximizer is pinned by a sign bracket and polished by Newton steps;
 * at a feasibility boundary the maximizer is the boundary itself.
 */
double el_beta_star(const std::vector<Atom>& atoms, const WeightRange& range);

/**
 * Empirical-likelihood point estimate of the policy value at hypothesized
 * missing-mass reward rho: V(rho) = rho (1 - Sw) + Swr where Sw and Swr are
 * tilted means of w and w r.  Always inside [0, 1].
 */
double el_estimate(const Dataset& ds, double rho);
double el_estimate(const std::vector<Atom>& atoms, const WeightRange& range,
                   double n, double rho);

/**
 * The whole band of empirical-likelihood estimates as rho sweeps [0, 1]:
 * the interval [V(0), V(1)] (ordered).  is_point is true when the tilted
 * weight mean equals 1 so rho does not matter.
 */
struct ElEstimateInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool is_point = false;
};
ElEstimateInterval el_estimate_interval(const Dataset& ds);

/**
 * Plug-in mean under the tilted empirical distribution Q_n
 * proportional to 1 / (1 + beta* (w_n - 1)): sum Q w r / sum Q.
 * Coincides with el_estimate whenever beta* is interior.
 */
double emp_estimate(const Dataset& ds);
double emp_estimate(const std::vector<Atom>& atoms, const WeightRange& range);

// Tilted covariance-style difference (1/N) sum (w_n - 1)(r_n - rho) / D_n;
// the gap between the estimate and rho, useful for diagnostics.
double el_value_difference(const Dataset& ds, double rho);

/**
 * Finite-sample bias envelope 10 sqrt(w_max / n) + 16 w_max / n for the
 * self-normalized family; conservative, used only for reporting.
 */
double bias_bound(double n, double w_max);

}  // namespace elcb
