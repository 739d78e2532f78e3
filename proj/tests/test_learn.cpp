// Tests for the linear softmax policy machinery and the bound-maximizing
// offline learner: probabilities, induced importance weights, the analytic
// surrogate gradient against finite differences, and end-to-end learning on a
// separable toy problem.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "elcb/confidence.hpp"
#include "elcb/data.hpp"
#include "elcb/learn.hpp"
#include "support.hpp"

using namespace elcb;

namespace {

LinearSoftmaxPolicy make_policy(int dims, int actions,
                                const std::vector<double>& weights,
                                double temperature = 1.0) {
    LinearSoftmaxPolicy p;
    p.dims = dims;
    p.actions = actions;
    p.temperature = temperature;
    p.weights = weights;
    return p;
}

// A two-context, two-action toy where action 0 always pays reward 1 and
// action 1 pays 0; the logger chose uniformly.  Linearly separable, so any
// sensible learner should shift probability onto action 0.
std::vector<RawLoggedExample> separable_toy(int n) {
    std::vector<RawLoggedExample> raw;
    for (int i = 0; i < n; ++i) {
        RawLoggedExample ex;
        ex.x = (i % 2 == 0) ? std::vector<double>{1.0, 0.0}
                            : std::vector<double>{0.0, 1.0};
        ex.a = (i / 2) % 2;
        ex.p = 0.5;
        ex.r = ex.a == 0 ? 1.0 : 0.0;
        raw.push_back(ex);
    }
    return raw;
}

// Small fixed instance with three actions for gradient checks.
std::vector<RawLoggedExample> gradient_instance() {
    std::vector<RawLoggedExample> raw;
    auto add = [&](std::vector<double> x, int a, double p, double r) {
        raw.push_back(RawLoggedExample{std::move(x), a, p, r});
    };
    add({1.0, 0.2}, 0, 0.4, 1.0);
    add({0.5, -0.3}, 1, 0.35, 0.2);
    add({-0.2, 0.8}, 2, 0.25, 0.7);
    add({0.9, 0.9}, 0, 0.5, 0.0);
    add({-0.6, 0.1}, 1, 0.3, 1.0);
    return raw;
}

}  // namespace

TEST_CASE("policy_probs: golden softmax, stability, and temperature") {
    SUBCASE("zero weights give the uniform distribution") {
        auto p = make_policy(2, 3, std::vector<double>(6, 0.0));
        auto probs = policy_probs(p, {0.3, -0.7});
        REQUIRE(probs.size() == 3);
        for (double q : probs) CHECK_NEAR(q, 1.0 / 3.0, 1e-15);
    }
    SUBCASE("hand-computed two-action softmax") {
        // logits = W^T x = (0.5, -0.5) for x = (1), so
        // pi(0) = 1 / (1 + exp(-1)).
        auto p = make_policy(1, 2, {0.5, -0.5});
        auto probs = policy_probs(p, {1.0});
        CHECK_NEAR(probs[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
        CHECK_NEAR(probs[0] + probs[1], 1.0, 1e-15);
    }
    SUBCASE("huge logits neither overflow nor produce NaN") {
        auto p = make_policy(1, 2, {1000.0, -1000.0});
        auto probs = policy_probs(p, {1.0});
        CHECK(std::isfinite(probs[0]));
        CHECK(std::isfinite(probs[1]));
        CHECK_NEAR(probs[0], 1.0, 1e-15);
        CHECK_NEAR(probs[0] + probs[1], 1.0, 1e-15);
    }
    SUBCASE("higher temperature flattens the distribution") {
        auto sharp = make_policy(1, 2, {1.0, -1.0}, 1.0);
        auto flat = make_policy(1, 2, {1.0, -1.0}, 10.0);
        double ps = policy_probs(sharp, {1.0})[0];
        double pf = policy_probs(flat, {1.0})[0];
        CHECK(ps > pf);
        CHECK(pf > 0.5);
    }
}

TEST_CASE("policy JSON round trip preserves every weight bit-for-bit") {
    auto p = make_policy(2, 3, {0.1, -0.25, 1.0 / 3.0, 2.5, -1e-9, 7.0}, 0.5);
    LinearSoftmaxPolicy q = policy_from_json(policy_to_json(p));
    CHECK(q.dims == p.dims);
    CHECK(q.actions == p.actions);
    CHECK(q.temperature == p.temperature);
    REQUIRE(q.weights.size() == p.weights.size());
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        CHECK(q.weights[i] == p.weights[i]);
    }
    CHECK_THROWS_AS(policy_from_json("not json"), ParseError);
    CHECK_THROWS_AS(policy_from_json("{\"dims\": 2}"), ParseError);
}

TEST_CASE("induced_dataset computes importance weights and the widest range") {
    auto policy = make_policy(2, 2, std::vector<double>(4, 0.0));
    std::vector<RawLoggedExample> raw = {
        {{1.0, 0.0}, 0, 0.5, 1.0},
        {{0.0, 1.0}, 1, 0.25, 0.25},
    };
    Dataset ds = induced_dataset(raw, policy);
    REQUIRE(ds.items.size() == 2);
    // Uniform policy: pi = 0.5 for both actions.
    CHECK_NEAR(ds.items[0].w, 0.5 / 0.5, 1e-15);
    CHECK_NEAR(ds.items[1].w, 0.5 / 0.25, 1e-15);
    CHECK(ds.items[0].r == 1.0);
    CHECK(ds.items[1].r == 0.25);
    CHECK(ds.range.w_min == 0.0);
    CHECK_NEAR(ds.range.w_max, 1.0 / 0.25, 1e-15);
}

TEST_CASE("examples inconsistent with the policy shape are rejected") {
    auto policy = make_policy(2, 2, std::vector<double>(4, 0.0));
    std::vector<RawLoggedExample> base = {{{1.0, 0.0}, 0, 0.5, 1.0}};
    auto bad_dim = base;
    bad_dim[0].x = {1.0};
    CHECK_THROWS_AS(induced_dataset(bad_dim, policy), std::invalid_argument);
    auto bad_action = base;
    bad_action[0].a = 2;
    CHECK_THROWS_AS(induced_dataset(bad_action, policy),
                    std::invalid_argument);
    auto bad_p = base;
    bad_p[0].p = 0.0;
    CHECK_THROWS_AS(induced_dataset(bad_p, policy), std::invalid_argument);
    auto bad_r = base;
    bad_r[0].r = 1.5;
    CHECK_THROWS_AS(induced_dataset(bad_r, policy), std::invalid_argument);
}

TEST_CASE("dual_step and lb_objective agree with the confidence solver") {
    auto raw = gradient_instance();
    auto policy = make_policy(2, 3, {0.3, -0.2, 0.1, 0.0, 0.4, -0.5});
    Dataset ds = induced_dataset(raw, policy);
    auto [bound, sol] = ci_lower(compress(ds), ds.range, 0.95);
    DualSolution via_step = dual_step(raw, policy, 0.95);
    CHECK(via_step.objective == sol.objective);
    CHECK(via_step.beta == sol.beta);
    CHECK(via_step.gamma == sol.gamma);
    CHECK(via_step.kappa == sol.kappa);
    CHECK_NEAR(lb_objective(raw, policy, 0.95), bound, 1e-15);
}

TEST_CASE("surrogate gradient matches central finite differences") {
    auto raw = gradient_instance();
    auto policy = make_policy(2, 3, {0.3, -0.2, 0.1, 0.0, 0.4, -0.5});
    DualSolution duals = dual_step(raw, policy, 0.95);
    std::vector<double> grad = surrogate_gradient(policy, duals, raw);
    REQUIRE(grad.size() == policy.weights.size());
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::fabs(g));
    REQUIRE(scale > 0.0);
    const double h = 1e-6;
    for (std::size_t i = 0; i < policy.weights.size(); ++i) {
        LinearSoftmaxPolicy plus = policy, minus = policy;
        plus.weights[i] += h;
        minus.weights[i] -= h;
        double fd = (surrogate_value(plus, duals, raw) -
                     surrogate_value(minus, duals, raw)) /
                    (2.0 * h);
        CHECK_NEAR(grad[i], fd, 1e-5 * scale);
    }
}

TEST_CASE("policy_step improves the fixed-dual surrogate and is seeded") {
    auto raw = separable_toy(40);
    auto policy = make_policy(2, 2, std::vector<double>(4, 0.0));
    DualSolution duals = dual_step(raw, policy, 0.95);
    double before = surrogate_value(policy, duals, raw);

    LinearSoftmaxPolicy stepped = policy;
    std::mt19937_64 rng(5u);
    policy_step(stepped, duals, raw, 0.25, 2, rng);
    double after = surrogate_value(stepped, duals, raw);
    CHECK(after > before);

    LinearSoftmaxPolicy replay = policy;
    std::mt19937_64 rng2(5u);
    policy_step(replay, duals, raw, 0.25, 2, rng2);
    REQUIRE(replay.weights.size() == stepped.weights.size());
    for (std::size_t i = 0; i < replay.weights.size(); ++i) {
        CHECK(replay.weights[i] == stepped.weights[i]);
    }
}

TEST_CASE("learn_lb shifts probability onto the rewarded action") {
    auto raw = separable_toy(60);
    LearnConfig cfg;
    cfg.alpha = 0.95;
    cfg.outer_iters = 4;
    cfg.learning_rate = 0.5;
    cfg.passes_per_iter = 2;
    cfg.seed = 7u;
    LearnResult res = learn_lb(raw, cfg);
    REQUIRE(res.trace.size() == 4);
    for (double t : res.trace) CHECK(std::isfinite(t));
    CHECK(res.trace.back() >= res.trace.front() - 1e-9);
    for (const std::vector<double>& x :
         {std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}}) {
        auto probs = policy_probs(res.policy, x);
        CHECK(probs[0] > 0.5);
    }
    // Same configuration, same seed: byte-identical result.
    LearnResult res2 = learn_lb(raw, cfg);
    REQUIRE(res2.trace.size() == res.trace.size());
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        CHECK(res2.trace[i] == res.trace[i]);
    }
    for (std::size_t i = 0; i < res.policy.weights.size(); ++i) {
        CHECK(res2.policy.weights[i] == res.policy.weights[i]);
    }
}

TEST_CASE("learn_point drives both supported objectives up the toy") {
    auto raw = separable_toy(60);
    LearnConfig cfg;
    cfg.outer_iters = 4;
    cfg.learning_rate = 0.5;
    cfg.passes_per_iter = 2;
    cfg.seed = 11u;
    for (PointObjective obj : {PointObjective::IPS, PointObjective::EL}) {
        LearnResult res = learn_point(raw, cfg, obj);
        for (double t : res.trace) CHECK(std::isfinite(t));
        auto probs = policy_probs(res.policy, {1.0, 0.0});
        CHECK(probs[0] > 0.5);
    }
}

TEST_CASE("learn_lb accepts a warm start with matching shape") {
    auto raw = separable_toy(20);
    LearnConfig cfg;
    cfg.outer_iters = 2;
    cfg.seed = 3u;
    auto init = make_policy(2, 2, {0.2, -0.2, 0.1, -0.1});
    LearnResult res = learn_lb(raw, cfg, init);
    CHECK(res.policy.dims == 2);
    CHECK(res.policy.actions == 2);
    CHECK(res.trace.size() == 2);
}
