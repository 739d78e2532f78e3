#include "elcb/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "elcb/estimators.hpp"
#include "json.hpp"

namespace elcb {

using nlohmann::json;

std::vector<double> policy_probs(const LinearSoftmaxPolicy& policy,
                                 const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != policy.dims) {
        throw std::invalid_argument("policy_probs: feature size mismatch");
    }
    std::vector<double> logits(policy.actions, 0.0);
    for (int f = 0; f < policy.dims; ++f) {
        double xf = x[f];
        if (xf == 0.0) continue;
        for (int b = 0; b < policy.actions; ++b) {
            logits[b] += xf * policy.at(f, b);
        }
    }
    double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (int b = 0; b < policy.actions; ++b) {
        logits[b] = std::exp((logits[b] - m) / policy.temperature);
        z += logits[b];
    }
    for (double& l : logits) l /= z;
    return logits;
}

std::string policy_to_json(const LinearSoftmaxPolicy& policy) {
    json obj = {{"dims", policy.dims},
                {"actions", policy.actions},
                {"temperature", policy.temperature},
                {"weights", policy.weights}};
    return obj.dump();
}

LinearSoftmaxPolicy policy_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("policy: ") + e.what());
    }
    LinearSoftmaxPolicy policy;
    try {
        policy.dims = obj.at("dims").get<int>();
        policy.actions = obj.at("actions").get<int>();
        policy.temperature = obj.at("temperature").get<double>();
        policy.weights = obj.at("weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("policy: ") + e.what());
    }
    if (policy.dims <= 0 || policy.actions <= 0 ||
        policy.weights.size() !=
            static_cast<size_t>(policy.dims) * policy.actions ||
        !(policy.temperature > 0.0)) {
        throw ParseError("policy: inconsistent dimensions");
    }
    return policy;
}

Dataset induced_dataset(const std::vector<RawLoggedExample>& raw,
                        const LinearSoftmaxPolicy& policy) {
    if (raw.empty()) {
        throw std::invalid_argument("induced_dataset: no examples");
    }
    Dataset ds;
    double min_p = 1.0;
    for (const auto& ex : raw) {
        if (!(ex.p > 0.0)) {
            throw std::invalid_argument(
                "induced_dataset: nonpositive logged propensity");
        }
        if (ex.r < 0.0 || ex.r > 1.0) {
            throw std::invalid_argument(
                "induced_dataset: reward outside [0, 1]");
        }
        auto probs = policy_probs(policy, ex.x);
        if (ex.a < 0 || ex.a >= policy.actions) {
            throw std::invalid_argument(
                "induced_dataset: logged action out of range");
        }
        ds.items.push_back(weights_from_raw(ex, probs[ex.a]));
        min_p = std::min(min_p, ex.p);
    }
    // The widest weight the propensities allow; a probability cannot exceed
    // one, so every induced weight fits below 1 / min_p.
    ds.range = WeightRange{0.0, std::max(1.0, 1.0 / min_p)};
    return ds;
}

double lb_objective(const std::vector<RawLoggedExample>& raw,
                    const LinearSoftmaxPolicy& policy, double alpha) {
    Dataset ds = induced_dataset(raw, policy);
    return ci_lower(compress(ds), ds.range, alpha).first;
}

DualSolution dual_step(const std::vector<RawLoggedExample>& raw,
                       const LinearSoftmaxPolicy& policy, double alpha) {
    Dataset ds = induced_dataset(raw, policy);
    return ci_lower(compress(ds), ds.range, alpha).second;
}

namespace {

/**
 * One shuffled pass of per-example ascent steps shared by the learners.
 *
 * coef(example, probs) returns the gradient weight on grad pi(a_n | x_n);
 * guard(example, new_prob) accepts or rejects the tentative step.  A rejected
 * step is undone and retried with half the step size, so hard feasibility
 * conditions (positive tilt terms) survive stochastic updates exactly.
 */
template <typename CoefFn, typename GuardFn>
void ascent_passes(LinearSoftmaxPolicy& policy,
                   const std::vector<RawLoggedExample>& raw, double lr,
                   int passes, std::mt19937_64& rng, CoefFn coef,
                   GuardFn guard) {
    std::vector<size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    for (int pass = 0; pass < passes; ++pass) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t idx : order) {
            const auto& ex = raw[idx];
            double step = lr;
            for (int attempt = 0; attempt < 30; ++attempt) {
                auto probs = policy_probs(policy, ex.x);
                double c = coef(ex, probs);
                if (c == 0.0) break;
                double scale = c * step / policy.temperature;
                double pa = probs[ex.a];
                // Softmax jacobian: d pi(a)/d W_{f,b}
                //   = pi(a) (1[a == b] - pi(b)) x_f / T.
                for (int f = 0; f < policy.dims; ++f) {
                    double xf = ex.x[f];
                    if (xf == 0.0) continue;
                    double base = scale * pa * xf;
                    for (int b = 0; b < policy.actions; ++b) {
                        double delta = base * ((b == ex.a ? 1.0 : 0.0) -
                                               probs[b]);
                        policy.at(f, b) += delta;
                    }
                }
                auto new_probs = policy_probs(policy, ex.x);
                if (guard(ex, new_probs[ex.a])) break;
                // Undo: recompute the same deltas and subtract them.
                for (int f = 0; f < policy.dims; ++f) {
                    double xf = ex.x[f];
                    if (xf == 0.0) continue;
                    double base = scale * pa * xf;
                    for (int b = 0; b < policy.actions; ++b) {
                        double delta = base * ((b == ex.a ? 1.0 : 0.0) -
                                               probs[b]);
                        policy.at(f, b) -= delta;
                    }
                }
                step *= 0.5;
            }
        }
    }
}

void check_examples(const std::vector<RawLoggedExample>& raw,
                    const LinearSoftmaxPolicy& policy) {
    for (const auto& ex : raw) {
        if (static_cast<int>(ex.x.size()) != policy.dims ||
            ex.a < 0 || ex.a >= policy.actions || !(ex.p > 0.0) ||
            ex.r < 0.0 || ex.r > 1.0) {
            throw std::invalid_argument(
                "learn: example inconsistent with the policy shape");
        }
    }
}

LinearSoftmaxPolicy default_policy(const std::vector<RawLoggedExample>& raw) {
    LinearSoftmaxPolicy policy;
    policy.dims = static_cast<int>(raw.front().x.size());
    int max_a = 0;
    for (const auto& ex : raw) max_a = std::max(max_a, ex.a);
    policy.actions = max_a + 1;
    policy.temperature = 1.0;
    policy.weights.assign(
        static_cast<size_t>(policy.dims) * policy.actions, 0.0);
    return policy;
}

}  // namespace

void policy_step(LinearSoftmaxPolicy& policy, const DualSolution& duals,
                 const std::vector<RawLoggedExample>& raw, double lr,
                 int passes, std::mt19937_64& rng) {
    check_examples(raw, policy);
    double beta = duals.beta;
    double gamma = duals.gamma;
    double kappa = duals.kappa;
    auto coef = [&](const RawLoggedExample& ex,
                    const std::vector<double>& probs) {
        double w = probs[ex.a] / ex.p;
        double d = gamma + w * (beta + ex.r);
        // A drifted example can arrive with a collapsed tilt; flooring the
        // denominator keeps the push in the restoring direction.
        double d_eff = std::max(d, 1e-8 * (1.0 + std::fabs(gamma)));
        return kappa * (beta + ex.r) / (d_eff * ex.p);
    };
    auto guard = [&](const RawLoggedExample& ex, double new_prob) {
        double w = new_prob / ex.p;
        return gamma + w * (beta + ex.r) > 0.0;
    };
    ascent_passes(policy, raw, lr, passes, rng, coef, guard);
}

double surrogate_value(const LinearSoftmaxPolicy& policy,
                       const DualSolution& duals,
                       const std::vector<RawLoggedExample>& raw) {
    check_examples(raw, policy);
    double total = 0.0;
    for (const auto& ex : raw) {
        auto probs = policy_probs(policy, ex.x);
        double w = probs[ex.a] / ex.p;
        double d = duals.gamma + w * (duals.beta + ex.r);
        if (!(d > 0.0)) {
            throw std::invalid_argument(
                "surrogate_value: nonpositive tilt term");
        }
        total += std::log(d);
    }
    return duals.kappa * total;
}

std::vector<double> surrogate_gradient(
    const LinearSoftmaxPolicy& policy, const DualSolution& duals,
    const std::vector<RawLoggedExample>& raw) {
    check_examples(raw, policy);
    std::vector<double> grad(policy.weights.size(), 0.0);
    for (const auto& ex : raw) {
        auto probs = policy_probs(policy, ex.x);
        double w = probs[ex.a] / ex.p;
        double d = duals.gamma + w * (duals.beta + ex.r);
        if (!(d > 0.0)) {
            throw std::invalid_argument(
                "surrogate_gradient: nonpositive tilt term");
        }
        double c = duals.kappa * (duals.beta + ex.r) / (d * ex.p);
        double pa = probs[ex.a];
        for (int f = 0; f < policy.dims; ++f) {
            double xf = ex.x[f];
            if (xf == 0.0) continue;
            double base = c * pa * xf / policy.temperature;
            for (int b = 0; b < policy.actions; ++b) {
                grad[static_cast<size_t>(f) * policy.actions + b] +=
                    base * ((b == ex.a ? 1.0 : 0.0) - probs[b]);
            }
        }
    }
    return grad;
}

LearnResult learn_lb(const std::vector<RawLoggedExample>& raw,
                     const LearnConfig& config,
                     std::optional<LinearSoftmaxPolicy> init) {
    if (raw.empty()) {
        throw std::invalid_argument("learn_lb: no examples");
    }
    LearnResult out;
    out.policy = init ? *init : default_policy(raw);
    check_examples(raw, out.policy);
    std::mt19937_64 rng(config.seed);
    for (int iter = 0; iter < config.outer_iters; ++iter) {
        DualSolution duals = dual_step(raw, out.policy, config.alpha);
        out.trace.push_back(std::max(0.0, duals.objective));
        policy_step(out.policy, duals, raw, config.learning_rate,
                    config.passes_per_iter, rng);
    }
    return out;
}

LearnResult learn_point(const std::vector<RawLoggedExample>& raw,
                        const LearnConfig& config, PointObjective objective,
                        std::optional<LinearSoftmaxPolicy> init) {
    if (raw.empty()) {
        throw std::invalid_argument("learn_point: no examples");
    }
    LearnResult out;
    out.policy = init ? *init : default_policy(raw);
    check_examples(raw, out.policy);
    std::mt19937_64 rng(config.seed);
    constexpr double rho = 0.5;
    for (int iter = 0; iter < config.outer_iters; ++iter) {
        Dataset ds = induced_dataset(raw, out.policy);
        if (objective == PointObjective::IPS) {
            out.trace.push_back(ips(ds));
            auto coef = [&](const RawLoggedExample& ex,
                            const std::vector<double>&) {
                return ex.r / ex.p;
            };
            auto guard = [](const RawLoggedExample&, double) { return true; };
            ascent_passes(out.policy, raw, config.learning_rate,
                          config.passes_per_iter, rng, coef, guard);
        } else {
            auto atoms = compress(ds);
            double beta = el_beta_star(atoms, ds.range);
            out.trace.push_back(
                el_estimate(atoms, ds.range, atom_count(atoms), rho));
            auto coef = [&](const RawLoggedExample& ex,
                            const std::vector<double>& probs) {
                double w = probs[ex.a] / ex.p;
                double d = 1.0 + beta * (w - 1.0);
                double d_eff = std::max(d, 1e-8);
                return (ex.r - rho) * (1.0 - beta) / (d_eff * d_eff * ex.p);
            };
            auto guard = [&](const RawLoggedExample& ex, double new_prob) {
                double w = new_prob / ex.p;
                return 1.0 + beta * (w - 1.0) > 0.0;
            };
            ascent_passes(out.policy, raw, config.learning_rate,
                          config.passes_per_iter, rng, coef, guard);
        }
    }
    return out;
}

}  // namespace elcb
