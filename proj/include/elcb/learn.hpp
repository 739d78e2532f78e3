#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "elcb/data.hpp"
#include "elcb/confidence.hpp"

namespace elcb {

/**
 * Linear softmax policy over a finite action set:
 * pi(a|x) = softmax(W^T x / T)_a with W stored row-major as dims x actions.
 */
struct LinearSoftmaxPolicy {
    int dims = 0;
    int actions = 0;
    double temperature = 1.0;
    std::vector<double> weights;  // dims * actions, row-major

    double& at(int feature, int action) {
        return weights[static_cast<size_t>(feature) * actions + action];
    }
    double at(int feature, int action) const {
        return weights[static_cast<size_t>(feature) * actions + action];
    }
};

// Action probabilities for one context (numerically stable softmax).
std::vector<double> policy_probs(const LinearSoftmaxPolicy& policy,
                                 const std::vector<double>& x);

std::string policy_to_json(const LinearSoftmaxPolicy& policy);
LinearSoftmaxPolicy policy_from_json(const std::string& text);

// Importance-weighted view of the raw log under `policy`; the weight range is
// [0, 1 / min_n p_n], the widest the propensities allow.
Dataset induced_dataset(const std::vector<RawLoggedExample>& raw,
                        const LinearSoftmaxPolicy& policy);

struct LearnConfig {
    double alpha = 0.95;
    int outer_iters = 4;
    double learning_rate = 0.1;
    int passes_per_iter = 1;
    unsigned long long seed = 0;
};

/**
 * Value of the lower-bound surrogate at fixed dual variables: the profiled
 * objective of the lower-confidence-bound program evaluated on the dataset
 * induced by the current policy.
 */
double lb_objective(const std::vector<RawLoggedExample>& raw,
                    const LinearSoftmaxPolicy& policy, double alpha);

// Re-solve the duals for the current policy (one step of the alternation).
DualSolution dual_step(const std::vector<RawLoggedExample>& raw,
                       const LinearSoftmaxPolicy& policy, double alpha);

/**
 * Fixed-dual surrogate F(pi) = kappa * sum_n log(gamma + beta w_n + w_n r_n)
 * with w_n = pi(a_n|x_n)/p_n: the objective the stochastic policy steps
 * climb.  Every tilt term must be positive at this policy.
 */
double surrogate_value(const LinearSoftmaxPolicy& policy,
                       const DualSolution& duals,
                       const std::vector<RawLoggedExample>& raw);

/**
 * Analytic gradient of surrogate_value in the policy weights (same row-major
 * layout), assembled from the per-example coefficient
 * kappa (beta + r_n) / (d_n p_n) on grad pi(a_n|x_n).
 */
std::vector<double> surrogate_gradient(
    const LinearSoftmaxPolicy& policy, const DualSolution& duals,
    const std::vector<RawLoggedExample>& raw);

/**
 * One ascent pass over the raw examples at fixed duals.
 *
 * The per-example gradient of the bound in pi(a_n|x_n) has the positive
 * coefficient kappa (beta + r_n) / (d_n p_n), so stochastic ascent steps move
 * probability toward actions whose tilt d_n supports the bound.  A tentative
 * step that would drive its own d_n nonpositive is undone and retried with a
 * halved step; the dual feasibility is therefore preserved exactly.
 */
void policy_step(LinearSoftmaxPolicy& policy, const DualSolution& duals,
                 const std::vector<RawLoggedExample>& raw, double lr,
                 int passes, std::mt19937_64& rng);

struct LearnResult {
    LinearSoftmaxPolicy policy;
    std::vector<double> trace;  // lower bound after each dual refresh
};

/**
 * Maximize the lower confidence bound by alternating dual refreshes and
 * stochastic policy ascent.  Deterministic for a fixed seed.
 */
LearnResult learn_lb(const std::vector<RawLoggedExample>& raw,
                     const LearnConfig& config,
                     std::optional<LinearSoftmaxPolicy> init = std::nullopt);

enum class PointObjective { EL, IPS };

/**
 * Maximize a point estimate (empirical-likelihood value or plain IPS) by the
 * same alternation scheme, for head-to-head comparisons against the
 * bound-maximizing learner.
 */
LearnResult learn_point(const std::vector<RawLoggedExample>& raw,
                        const LearnConfig& config, PointObjective objective,
                        std::optional<LinearSoftmaxPolicy> init = std::nullopt);

}  // namespace elcb
