#pragma once

#include <optional>
#include <string>

#include "elcb/data.hpp"

namespace elcb {

/**
 * Sufficient statistics for the chi-squared-divergence (Cressie-Read
 * lambda = -2) family of estimators and bounds.
 *
 * Everything the closed forms need is six running sums, so estimation over a
 * stream or a sharded dataset needs O(1) state and a trivial merge.
 */
struct SuffStats {
    double n = 0.0;
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    double sum_wr = 0.0;
    double sum_w2r = 0.0;
    double sum_w2r2 = 0.0;
};

void update(SuffStats& stats, double w, double r);
SuffStats merge(const SuffStats& a, const SuffStats& b);
SuffStats suffstats_from(const Dataset& ds);

// Image of the statistics under the reward reflection r -> 1 - r.
SuffStats transform_rewards(const SuffStats& stats);

std::string to_json(const SuffStats& stats);
SuffStats suffstats_from_json(const std::string& text);

struct CrEstimate {
    double value = 0.0;
    // The chi-squared weight solution is a least-squares projection and is
    // not sign-constrained, so unlike the likelihood-based estimators the
    // value can escape [0, 1]; callers are told rather than silently clipped.
    bool in_unit_range = true;
};

/**
 * Closed-form chi-squared-divergence point estimate at hypothesized
 * missing-mass reward rho.
 *
 * Augments the sample with one atom at the nearer weight-range endpoint
 * (w_min when the mean weight is >= 1, else w_max) carrying reward rho,
 * then projects the uniform distribution onto the moment constraints
 * sum q = 1, sum q w = 1 in the chi-squared geometry.  Returns nullopt when
 * the weight second moment degenerates (all augmented weights equal).
 */
std::optional<CrEstimate> cr_estimate(const SuffStats& stats,
                                      const WeightRange& range, double rho);

/**
 * Closed-form chi-squared-divergence lower confidence bound.
 *
 * For each candidate augmentation endpoint the divergence budget
 * chi2_1(alpha) plus the estimator's own divergence is spent to push the
 * value moment as low as the quadratic geometry allows; the bound is the
 * smaller candidate, floored at 0.  Returns nullopt when the quadratic
 * structure is degenerate for every candidate (callers fall back to the
 * likelihood interval).
 */
std::optional<double> cr_lower(const SuffStats& stats, const WeightRange& range,
                               double alpha);

}  // namespace elcb
