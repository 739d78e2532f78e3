// Tests for the chi-squared-divergence (Cressie-Read lambda = -2) closed
// forms: streaming statistics, the point estimate, and the lower confidence
// bound, each checked against a brute-force quadratic-projection oracle built
// on the generic minimum-norm solver.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cr_oracle.hpp"
#include "elcb/cressie_read.hpp"
#include "elcb/data.hpp"
#include "elcb/quantiles.hpp"
#include "elcb/solvers.hpp"
#include "support.hpp"

using namespace elcb;
using croracle::oracle_estimate;
using croracle::oracle_lower;
using testsup::make_dataset;

TEST_CASE("streaming statistics: update, batch and merge coincide exactly") {
    auto ds = make_dataset({0.0, 1.0, 2.0, 3.0, 1.0, 2.0},
                           {0.0, 1.0, 1.0, 0.0, 1.0, 1.0}, 0.0, 3.0);
    SuffStats one_by_one;
    for (const auto& d : ds.items) update(one_by_one, d.w, d.r);
    SuffStats batch = suffstats_from(ds);
    CHECK(one_by_one.n == batch.n);
    CHECK(one_by_one.sum_w == batch.sum_w);
    CHECK(one_by_one.sum_w2 == batch.sum_w2);
    CHECK(one_by_one.sum_wr == batch.sum_wr);
    CHECK(one_by_one.sum_w2r == batch.sum_w2r);
    CHECK(one_by_one.sum_w2r2 == batch.sum_w2r2);

    Dataset left, right;
    left.range = right.range = ds.range;
    for (std::size_t i = 0; i < 3; ++i) left.items.push_back(ds.items[i]);
    for (std::size_t i = 3; i < 6; ++i) right.items.push_back(ds.items[i]);
    SuffStats merged = merge(suffstats_from(left), suffstats_from(right));
    CHECK(merged.n == batch.n);
    CHECK(merged.sum_w == batch.sum_w);
    CHECK(merged.sum_w2 == batch.sum_w2);
    CHECK(merged.sum_wr == batch.sum_wr);
    CHECK(merged.sum_w2r == batch.sum_w2r);
    CHECK(merged.sum_w2r2 == batch.sum_w2r2);
}

TEST_CASE("statistics JSON round trip and parse failures") {
    SuffStats st;
    update(st, 2.0, 0.25);
    update(st, 0.5, 1.0);
    SuffStats back = suffstats_from_json(to_json(st));
    CHECK(back.n == st.n);
    CHECK(back.sum_w == st.sum_w);
    CHECK(back.sum_w2 == st.sum_w2);
    CHECK(back.sum_wr == st.sum_wr);
    CHECK(back.sum_w2r == st.sum_w2r);
    CHECK(back.sum_w2r2 == st.sum_w2r2);
    CHECK_THROWS_AS(suffstats_from_json("not json"), ParseError);
    CHECK_THROWS_AS(suffstats_from_json("{\"n\": 3}"), ParseError);
    CHECK_THROWS_AS(suffstats_from_json("{\"n\": 1, \"sum_w\": \"x\"}"),
                    ParseError);
}

TEST_CASE("reward reflection of the statistics matches the flipped dataset") {
    auto ds = make_dataset({0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, 1.0, 1.0}, 0.0,
                           3.0);
    Dataset flipped = ds;
    for (auto& d : flipped.items) d.r = 1.0 - d.r;
    SuffStats direct = suffstats_from(flipped);
    SuffStats via = transform_rewards(suffstats_from(ds));
    CHECK(via.sum_wr == direct.sum_wr);
    CHECK(via.sum_w2r == direct.sum_w2r);
    CHECK(via.sum_w2r2 == direct.sum_w2r2);
    SuffStats twice = transform_rewards(via);
    SuffStats orig = suffstats_from(ds);
    CHECK(twice.sum_wr == orig.sum_wr);
    CHECK(twice.sum_w2r == orig.sum_w2r);
    CHECK(twice.sum_w2r2 == orig.sum_w2r2);
}

TEST_CASE("cr_estimate closed-form golden values") {
    SUBCASE("single observation at weight one reproduces its reward") {
        SuffStats st;
        update(st, 1.0, 0.7);
        for (double rho : {0.0, 0.25, 1.0}) {
            auto est = cr_estimate(st, {0.0, 2.0}, rho);
            REQUIRE(est.has_value());
            CHECK_NEAR(est->value, 0.7, 1e-14);
            CHECK(est->in_unit_range);
        }
    }
    SUBCASE("all weights one with a point range is degenerate") {
        SuffStats st;
        for (int i = 0; i < 5; ++i) update(st, 1.0, 0.5);
        CHECK_FALSE(cr_estimate(st, {1.0, 1.0}, 0.5).has_value());
        CHECK_FALSE(cr_lower(st, {1.0, 1.0}, 0.95).has_value());
    }
    SUBCASE("perfect rewards at weight one give estimate and bound one") {
        // With every observed reward at the ceiling the quadratic geometry
        // has zero residual variance, so even the lower confidence bound sits
        // exactly at 1 - the divergence budget cannot buy any decrease.
        SuffStats st;
        for (int i = 0; i < 10; ++i) update(st, 1.0, 1.0);
        auto est = cr_estimate(st, {0.0, 2.0}, 0.25);
        REQUIRE(est.has_value());
        CHECK_NEAR(est->value, 1.0, 1e-12);
        // The bound is exactly 1 in real arithmetic; cancellation noise in
        // the residual-variance term passes through a square root, so the
        // attainable precision is the square root of machine epsilon.
        auto lb = cr_lower(st, {0.0, 2.0}, 0.95);
        REQUIRE(lb.has_value());
        CHECK_NEAR(*lb, 1.0, 1e-7);
    }
    SUBCASE("argument validation") {
        SuffStats empty;
        CHECK_THROWS_AS(cr_estimate(empty, {0.0, 2.0}, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(cr_lower(empty, {0.0, 2.0}, 0.95),
                        std::invalid_argument);
        SuffStats st;
        update(st, 1.0, 0.5);
        CHECK_THROWS_AS(cr_estimate(st, {0.0, 2.0}, -0.1),
                        std::invalid_argument);
        CHECK_THROWS_AS(cr_estimate(st, {0.0, 2.0}, 1.1),
                        std::invalid_argument);
        CHECK_THROWS_AS(cr_lower(st, {0.0, 2.0}, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(cr_lower(st, {0.0, 2.0}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("closed forms match the quadratic-projection oracle") {
    struct Case {
        std::vector<double> w, r;
        double w_min, w_max;
    };
    std::vector<Case> cases = {
        {{0.0, 0.0, 2.0}, {0.0, 0.0, 1.0}, 0.0, 2.0},
        {{0.5, 1.0, 3.0}, {0.2, 0.9, 0.4}, 0.0, 4.0},
        {{0.25, 0.5}, {1.0, 0.3}, 0.25, 2.0},
        {{1.0, 1.0, 1.0, 2.0}, {0.0, 0.5, 1.0, 0.25}, 0.5, 2.0},
    };
    for (const auto& c : cases) {
        Dataset ds = make_dataset(c.w, c.r, c.w_min, c.w_max);
        SuffStats st = suffstats_from(ds);
        for (double rho : {0.0, 0.5, 1.0}) {
            auto fast = cr_estimate(st, ds.range, rho);
            auto slow = oracle_estimate(ds, rho);
            REQUIRE(fast.has_value() == slow.has_value());
            if (fast) CHECK_NEAR(fast->value, *slow, 1e-9);
        }
        for (double alpha : {0.9, 0.95}) {
            auto fast = cr_lower(st, ds.range, alpha);
            auto slow = oracle_lower(ds, alpha);
            REQUIRE(fast.has_value() == slow.has_value());
            if (fast) CHECK_NEAR(*fast, *slow, 1e-9);
        }
    }
}

TEST_CASE("lower bound sits below the rho = 0 estimate and shrinks with "
          "alpha") {
    std::mt19937_64 rng(424242u);
    int checked = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Dataset ds = testsup::random_dataset(rng, 30, 0.0, 3.0);
        SuffStats st = suffstats_from(ds);
        auto est = cr_estimate(st, ds.range, 0.0);
        auto lb90 = cr_lower(st, ds.range, 0.9);
        auto lb99 = cr_lower(st, ds.range, 0.99);
        if (!est || !lb90 || !lb99) continue;
        ++checked;
        CHECK(*lb90 <= est->value + 1e-9);
        CHECK(*lb99 <= *lb90 + 1e-9);
        CHECK(*lb90 >= 0.0);
    }
    CHECK(checked > 150);
}
