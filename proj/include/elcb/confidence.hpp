#pragma once

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "elcb/data.hpp"

namespace elcb {

enum class CiMethod { EL, Binomial, Gaussian };

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 1.0;
    double alpha = 0.95;
    CiMethod method = CiMethod::EL;
};

// Dual variables at the optimum of a profile solve, for diagnostics.
struct DualSolution {
    double beta = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    double tau = 0.0;
    double objective = 0.0;
    bool feasible = true;
};

/**
 * Dual log-likelihood sum_n log(1 + beta (w_n - 1) + tau (w_n r_n - v)),
 * or nullopt when the tilt is nonpositive at any datum or at any of the four
 * corner atoms (w in {w_min, w_max}) x (r in {0, 1}).
 */
std::optional<double> dual_likelihood(const std::vector<Atom>& atoms,
                                      const WeightRange& range, double v,
                                      double beta, double tau);

// Value of the dual at tau = 0 and beta = beta*: the unconstrained maximum
// log-likelihood, the reference level for the profile test.
double mle_dual_value(const std::vector<Atom>& atoms, const WeightRange& range);

/**
 * Lower confidence bound on the policy value by direct solution of the
 * profiled likelihood-ratio problem.
 *
 * Reduces the three-constraint primal to a concave two-variable problem over
 * the cone {gamma + beta w_min >= 0, gamma + beta w_max >= 0}: maximize
 * G(beta, gamma) = -beta - gamma + A(beta, gamma) where
 * A = exp((1/N) sum_n c_n log(gamma + beta w_n + w_n r_n) - s) and
 * s = (l* + chi2_1(alpha)/2) / N.  Solved by a safeguarded Newton in gamma
 * nested inside bisection in beta, with the envelope correction for the
 * boundary-active case.  Returns the bound and the optimizing duals.
 */
std::pair<double, DualSolution> ci_lower(const std::vector<Atom>& atoms,
                                         const WeightRange& range, double alpha,
                                         double tol = 1e-10);

// Upper bound via the reward reflection r -> 1 - r: upper(D) = 1 - lower(D').
std::pair<double, DualSolution> ci_upper(const std::vector<Atom>& atoms,
                                         const WeightRange& range, double alpha,
                                         double tol = 1e-10);

ConfidenceInterval ci(const Dataset& ds, double alpha, double tol = 1e-10);

/**
 * Reference implementation of the same interval by direct bisection on the
 * profile test: v is inside the interval iff
 * sup_{(beta,tau) feasible} l_v(beta, tau) <= l* + chi2_1(alpha) / 2.
 * Orders of magnitude slower than ci(); kept as an independent check.
 */
ConfidenceInterval ci_bisection_reference(const Dataset& ds, double alpha,
                                          double tol = 1e-6);

// sup over (beta, tau) of the dual likelihood at fixed v, capped early when
// the supremum provably exceeds `cap` (used by the bisection reference).
double max_dual_likelihood(const std::vector<Atom>& atoms,
                           const WeightRange& range, double v, double cap);

/**
 * Binomial-rounding interval: each reward is randomly rounded to {0, 1} with
 * probability r * w / w_max of a one, giving exact Bernoulli counts; the
 * Clopper-Pearson interval for the count scaled back by w_max contains the
 * policy value with at least the nominal coverage.
 */
ConfidenceInterval binomial_ci(const Dataset& ds, double alpha,
                               std::mt19937_64& rng);
ConfidenceInterval binomial_ci(const std::vector<Atom>& atoms,
                               const WeightRange& range, double alpha,
                               std::mt19937_64& rng);

// Student-free Gaussian interval: mean(w r) +/- z sd / sqrt(N), clamped to
// [0, 1].  Requires N >= 2.  Asymptotically exact, finite-sample optimistic.
ConfidenceInterval gaussian_ci(const Dataset& ds, double alpha);
ConfidenceInterval gaussian_ci(const std::vector<Atom>& atoms, double alpha);

// Reward reflection r -> 1 - r on atoms (weights untouched).
std::vector<Atom> transform_rewards(const std::vector<Atom>& atoms);

}  // namespace elcb
