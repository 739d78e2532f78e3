#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "elcb/data.hpp"

namespace elcb {

struct Interval1D {
    double lo = 0.0;
    double hi = 0.0;
};

// Result of an iterative maximization.
struct SolveReport {
    std::vector<double> argmax;
    double value = 0.0;
    int iterations = 0;
    bool tolerance_met = false;
};

/**
 * Maximize a concave function on a closed interval.
 *
 * With a derivative supplied the solver bisects on the derivative's sign
 * (guaranteed bracket for concave f); otherwise golden-section search.
 * Functions may return -inf on parts of the domain (treated as infeasible).
 * Throws std::invalid_argument when the domain is empty or f is -inf
 * everywhere probed.
 */
SolveReport maximize_concave_1d(
    const std::function<double(double)>& f, Interval1D domain,
    double tol = 1e-9,
    const std::function<double(double)>* derivative = nullptr);

// Closed half plane a*x + b*y <= c.
struct HalfPlane {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/**
 * Maximize a jointly concave function of (x, y) over an intersection of half
 * planes, by nested golden-section search: for each x the constraints cut a
 * y-interval, and the profiled function of x is again concave.  The x-range
 * is derived from the constraint rows; when unbounded directions carry
 * improving values the expansion detects it and throws std::runtime_error.
 */
SolveReport maximize_concave_2d_constrained(
    const std::function<double(double, double)>& f,
    const std::vector<HalfPlane>& constraints, std::vector<double> init,
    double tol = 1e-7);

// Exhaustive grid evaluation over an interval: returns the best grid point.
// Deliberately artless; used as an independent check of the line solvers.
SolveReport grid_oracle_1d(const std::function<double(double)>& f,
                           Interval1D domain, int points);

SolveReport grid_oracle_2d(const std::function<double(double, double)>& f,
                           Interval1D xdom, Interval1D ydom, int points);

/**
 * Direct primal evaluation of the constrained log-likelihood profile.
 *
 * Places probability mass on the observed sample plus the four corner atoms
 * (w_min/w_max crossed with reward 0/1) and maximizes sum_n log q_n subject
 * to sum q = 1, sum q w = 1, sum q w r = v, q > 0 on the sample, q >= 0 on
 * the augmentation.  Solved by an infeasible-start Newton method on a
 * decreasing log-barrier for the corner masses.  Returns nullopt when no
 * nonnegative mass assignment over the support attains v.  Simple and direct
 * by design: this is the ground-truth oracle the dual solvers are tested
 * against.
 */
std::optional<double> primal_profile_oracle(const Dataset& ds, double v,
                                            double tol = 1e-9,
                                            int max_iters = 400);

/**
 * Minimum-norm solution of a (small, full row rank) underdetermined system
 * A x = b: x = A^T (A A^T)^{-1} b via Gaussian elimination with partial
 * pivoting on the Gram matrix.  Throws std::runtime_error when the Gram
 * matrix is numerically singular.
 */
std::vector<double> min_norm_solution(
    const std::vector<std::vector<double>>& rows_a,
    const std::vector<double>& b);

}  // namespace elcb
