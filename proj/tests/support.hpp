#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "elcb/data.hpp"

// Absolute-tolerance comparison with a readable failure message.
#define CHECK_NEAR(a, b, tol)                                              \
    do {                                                                   \
        double va_ = (a), vb_ = (b), tol_ = (tol);                         \
        CHECK_MESSAGE(std::fabs(va_ - vb_) <= tol_,                        \
                      "left=" << va_ << " right=" << vb_ << " diff="       \
                              << std::fabs(va_ - vb_) << " tol=" << tol_); \
    } while (0)

namespace testsup {

inline elcb::Dataset make_dataset(const std::vector<double>& w,
                                  const std::vector<double>& r, double w_min,
                                  double w_max) {
    REQUIRE(w.size() == r.size());
    elcb::Dataset ds;
    for (size_t i = 0; i < w.size(); ++i) {
        ds.items.push_back({w[i], r[i]});
    }
    ds.range = {w_min, w_max};
    return ds;
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
    REQUIRE(out.good());
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/**
 * Deterministic random dataset for oracle-comparison tests: every weight is a
 * mixture of the range ends, 1, and log-uniform interior draws, so feasibility
 * boundaries and interior optima both occur with decent probability.
 */
inline elcb::Dataset random_dataset(std::mt19937_64& rng, int max_n,
                                    double w_min, double w_max) {
    std::uniform_int_distribution<int> nd(1, max_n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = nd(rng);
    std::vector<double> w(n), r(n);
    for (int i = 0; i < n; ++i) {
        double roll = u(rng);
        if (roll < 0.15) {
            w[i] = w_min;
        } else if (roll < 0.3) {
            w[i] = w_max;
        } else if (roll < 0.45) {
            w[i] = 1.0;
        } else {
            // Log-uniform between just above w_min and w_max.
            double lo = std::max(w_min, 1e-3 * std::max(1.0, w_max));
            double t = u(rng);
            w[i] = lo * std::pow(w_max / lo, t);
        }
        double rr = u(rng);
        r[i] = rr < 0.25 ? 0.0 : (rr < 0.5 ? 1.0 : u(rng));
    }
    elcb::Dataset ds = make_dataset(w, r, w_min, w_max);
    return ds;
}

}  // namespace testsup
