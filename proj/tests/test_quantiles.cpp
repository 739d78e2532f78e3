#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "elcb/quantiles.hpp"
#include "support.hpp"

using namespace elcb;

TEST_CASE("normal quantile golden values") {
    CHECK_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    CHECK_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-10);
    CHECK_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-10);
    CHECK_NEAR(normal_quantile(0.8413447460685429), 1.0, 1e-9);
    CHECK_NEAR(normal_quantile(0.9986501019683699), 3.0, 1e-9);
    // Far tails stay finite and accurate: push the quantile back through the
    // exact CDF 0.5 erfc(-q / sqrt(2)).
    for (double p : {1e-10, 1e-6, 1e-3}) {
        double q = normal_quantile(p);
        double cdf = 0.5 * std::erfc(-q / 1.4142135623730951);
        CHECK_NEAR(cdf / p, 1.0, 1e-6);
    }
}

TEST_CASE("normal quantile symmetry and monotonicity") {
    for (double p : {0.001, 0.01, 0.1, 0.3, 0.49}) {
        CHECK_NEAR(normal_quantile(p), -normal_quantile(1.0 - p), 1e-11);
    }
    double prev = -1e300;
    for (double p = 0.01; p < 1.0; p += 0.01) {
        double q = normal_quantile(p);
        CHECK(q > prev);
        prev = q;
    }
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(-0.5), std::invalid_argument);
}

TEST_CASE("chi squared 1 dof quantile") {
    CHECK_NEAR(chi_squared_1_quantile(0.95), 3.841458820694124, 1e-9);
    CHECK_NEAR(chi_squared_1_quantile(0.9), 2.705543454095404, 1e-9);
    CHECK_NEAR(chi_squared_1_quantile(0.99), 6.634896601021215, 1e-9);
    // The fold identity against the normal quantile.
    for (double p : {0.5, 0.8, 0.95, 0.999}) {
        double z = normal_quantile((1.0 + p) / 2.0);
        CHECK_NEAR(chi_squared_1_quantile(p), z * z, 1e-10);
    }
}

TEST_CASE("regularized incomplete beta closed forms") {
    // I_x(1, 1) = x, I_x(2, 1) = x^2, I_x(1, b) = 1 - (1 - x)^b.
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.92, 1.0}) {
        CHECK_NEAR(regularized_incomplete_beta(1.0, 1.0, x), x, 1e-13);
        CHECK_NEAR(regularized_incomplete_beta(2.0, 1.0, x), x * x, 1e-13);
        CHECK_NEAR(regularized_incomplete_beta(1.0, 3.0, x),
                   1.0 - std::pow(1.0 - x, 3.0), 1e-13);
    }
    // Symmetry: I_{1/2}(a, a) = 1/2.
    for (double a : {0.5, 1.0, 2.5, 7.0}) {
        CHECK_NEAR(regularized_incomplete_beta(a, a, 0.5), 0.5, 1e-12);
    }
    // Binomial tail identity: I_p(k, n-k+1) = P(Bin(n, p) >= k).
    // n=5, k=2, p=0.3: 1 - 0.7^5 - 5*0.3*0.7^4 = 0.47178.
    CHECK_NEAR(regularized_incomplete_beta(2.0, 4.0, 0.3), 0.47178, 1e-10);
}

TEST_CASE("incomplete beta inverse round trips") {
    for (double a : {0.5, 1.0, 3.0, 10.0}) {
        for (double b : {0.5, 2.0, 8.0}) {
            // p-space round trip is well conditioned everywhere.
            for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
                double x = regularized_incomplete_beta_inv(a, b, p);
                CHECK_NEAR(regularized_incomplete_beta(a, b, x), p, 1e-11);
            }
            // x-space round trip only where the CDF is not saturated: near
            // p = 1 the double representation of p collapses and no inverse
            // can recover x.
            for (double x : {0.05, 0.3, 0.5, 0.77, 0.99}) {
                double p = regularized_incomplete_beta(a, b, x);
                if (p < 1e-12 || p > 1.0 - 1e-12) continue;
                double back = regularized_incomplete_beta_inv(a, b, p);
                CHECK_NEAR(back, x, 2e-7);
            }
        }
    }
}

TEST_CASE("clopper pearson golden intervals") {
    // Textbook 5/10 at 95%.
    auto [lo, hi] = clopper_pearson(5, 10, 0.95);
    CHECK_NEAR(lo, 0.187086, 1e-5);
    CHECK_NEAR(hi, 0.812914, 1e-5);

    // Zero successes: closed form hi = 1 - (eta/2)^{1/m}.
    auto [lo0, hi0] = clopper_pearson(0, 10, 0.95);
    CHECK(lo0 == 0.0);
    CHECK_NEAR(hi0, 1.0 - std::pow(0.025, 0.1), 1e-10);

    // All successes mirror the zero case.
    auto [lom, him] = clopper_pearson(10, 10, 0.95);
    CHECK(him == 1.0);
    CHECK_NEAR(lom, std::pow(0.025, 0.1), 1e-10);

    // Reflection symmetry s <-> m - s.
    auto [lo3, hi3] = clopper_pearson(3, 17, 0.9);
    auto [lo14, hi14] = clopper_pearson(14, 17, 0.9);
    CHECK_NEAR(lo3, 1.0 - hi14, 1e-12);
    CHECK_NEAR(hi3, 1.0 - lo14, 1e-12);

    // Interval nests as alpha grows.
    auto [a_lo, a_hi] = clopper_pearson(7, 20, 0.9);
    auto [b_lo, b_hi] = clopper_pearson(7, 20, 0.99);
    CHECK(b_lo < a_lo);
    CHECK(b_hi > a_hi);
}
