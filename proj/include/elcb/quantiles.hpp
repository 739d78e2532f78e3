#pragma once

#include <utility>

namespace elcb {

/**
 * Standard normal quantile Phi^{-1}(p) for p in (0, 1).
 *
 * Rational initial guess refined by one Halley step against std::erfc, giving
 * absolute error far below 1e-9 across the open interval.  Throws
 * std::invalid_argument outside (0, 1).
 */
double normal_quantile(double p);

/**
 * Quantile of the chi-squared distribution with one degree of freedom.
 *
 * Uses the exact identity chi2_1(p) = Phi^{-1}((1 + p) / 2)^2: if Z is
 * standard normal then Z^2 is chi-squared with one degree of freedom, and the
 * two-sided normal tail folds onto the one-sided chi-squared tail.
 */
double chi_squared_1_quantile(double p);

/**
 * Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
 *
 * Continued fraction (modified Lentz) with the standard symmetry switch at
 * x = (a + 1) / (a + b + 2); accurate to ~1e-14.
 */
double regularized_incomplete_beta(double a, double b, double x);

// Inverse of I_x(a, b) in x for fixed (a, b), by bisection on the monotone
// CDF; tolerance ~1e-12 in x.
double regularized_incomplete_beta_inv(double a, double b, double p);

/**
 * Clopper-Pearson confidence interval for a binomial proportion.
 *
 * successes s out of m trials at coverage level alpha (e.g. 0.95).  Exact
 * tail inversion via the beta quantiles; s == 0 pins the lower end at 0 and
 * s == m pins the upper end at 1.
 */
std::pair<double, double> clopper_pearson(long long successes, long long trials,
                                          double alpha);

}  // namespace elcb
