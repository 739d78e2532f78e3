// Command line front end for off-policy value estimation, confidence
// intervals, streaming sufficient statistics, policy learning, and the
// simulation harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "elcb/confidence.hpp"
#include "elcb/cressie_read.hpp"
#include "elcb/data.hpp"
#include "elcb/estimators.hpp"
#include "elcb/learn.hpp"
#include "elcb/sim.hpp"

namespace {

using nlohmann::json;

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

elcb::Dataset load_any(const std::string& path,
                       std::optional<elcb::WeightRange> range) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return elcb::load_csv(path, range);
    }
    return elcb::load_jsonl(path, range);
}

std::optional<elcb::WeightRange> range_from_flags(bool has_min, double w_min,
                                                  bool has_max, double w_max,
                                                  const elcb::Dataset* probe) {
    if (!has_min && !has_max) return std::nullopt;
    elcb::WeightRange rg = probe ? probe->range : elcb::WeightRange{};
    if (has_min) rg.w_min = w_min;
    if (has_max) rg.w_max = w_max;
    return rg;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw elcb::ParseError("cannot open " + out_path + " for writing");
    }
    out << text;
}

struct EstimateArgs {
    std::string input;
    double w_min = 0.0, w_max = 1.0;
    bool has_min = false, has_max = false;
    double rho = 0.5;
    bool as_json = false;
};

int run_estimate(const EstimateArgs& args) {
    elcb::Dataset probe = load_any(args.input, std::nullopt);
    auto range = range_from_flags(args.has_min, args.w_min, args.has_max,
                                  args.w_max, &probe);
    elcb::Dataset ds = range ? load_any(args.input, range) : std::move(probe);
    double n = static_cast<double>(ds.items.size());
    auto interval = elcb::el_estimate_interval(ds);
    auto stats = elcb::suffstats_from(ds);
    auto cr = elcb::cr_estimate(stats, ds.range, args.rho);
    if (args.as_json) {
        json obj = {
            {"n", n},
            {"w_min", ds.range.w_min},
            {"w_max", ds.range.w_max},
            {"rho", args.rho},
            {"ips", elcb::ips(ds)},
            {"snips", elcb::snips(ds)},
            {"clipped_dr", elcb::clipped_dr_const_half(ds)},
            {"el", elcb::el_estimate(ds, args.rho)},
            {"el_interval",
             {{"lo", interval.lo},
              {"hi", interval.hi},
              {"is_point", interval.is_point}}},
            {"emp", elcb::emp_estimate(ds)},
            {"bias_bound", elcb::bias_bound(n, ds.range.w_max)},
        };
        if (cr) {
            obj["cr"] = cr->value;
            obj["cr_in_unit_range"] = cr->in_unit_range;
        } else {
            obj["cr"] = nullptr;
        }
        std::cout << obj.dump(2) << "\n";
        return 0;
    }
    std::cout << "n            " << static_cast<long long>(n) << "\n";
    std::cout << "w_range      [" << fmt6(ds.range.w_min) << ", "
              << fmt6(ds.range.w_max) << "]\n";
    std::cout << "ips          " << fmt6(elcb::ips(ds)) << "\n";
    std::cout << "snips        " << fmt6(elcb::snips(ds)) << "\n";
    std::cout << "clipped_dr   " << fmt6(elcb::clipped_dr_const_half(ds))
              << "\n";
    std::cout << "el           " << fmt6(elcb::el_estimate(ds, args.rho))
              << "  (rho = " << fmt6(args.rho) << ")\n";
    std::cout << "el_interval  [" << fmt6(interval.lo) << ", "
              << fmt6(interval.hi) << "]"
              << (interval.is_point ? "  (point)" : "") << "\n";
    std::cout << "emp          " << fmt6(elcb::emp_estimate(ds)) << "\n";
    if (cr) {
        std::cout << "cr           " << fmt6(cr->value)
                  << (cr->in_unit_range ? "" : "  (outside [0, 1])") << "\n";
    } else {
        std::cout << "cr           n/a (degenerate weight moments)\n";
    }
    std::cout << "bias_bound   " << fmt6(elcb::bias_bound(n, ds.range.w_max))
              << "\n";
    return 0;
}

struct CiArgs {
    std::string input;
    double w_min = 0.0, w_max = 1.0;
    bool has_min = false, has_max = false;
    double alpha = 0.95;
    std::string method = "all";
    unsigned long long seed = 0;
    bool as_json = false;
};

int run_ci(const CiArgs& args) {
    elcb::Dataset probe = load_any(args.input, std::nullopt);
    auto range = range_from_flags(args.has_min, args.w_min, args.has_max,
                                  args.w_max, &probe);
    elcb::Dataset ds = range ? load_any(args.input, range) : std::move(probe);
    auto atoms = elcb::compress(ds);
    bool all = args.method == "all";
    json out_json = {{"n", ds.items.size()}, {"alpha", args.alpha}};
    std::string out_text = "n        " + std::to_string(ds.items.size()) +
                           "\nalpha    " + fmt6(args.alpha) + "\n";
    auto add = [&](const std::string& name, double lo, double hi) {
        out_json[name] = {{"lo", lo}, {"hi", hi}};
        out_text += name + std::string(9 - name.size(), ' ') + "[" + fmt6(lo) +
                    ", " + fmt6(hi) + "]\n";
    };
    auto add_na = [&](const std::string& name, const std::string& why) {
        out_json[name] = nullptr;
        out_text += name + std::string(9 - name.size(), ' ') + "n/a (" + why +
                    ")\n";
    };
    if (all || args.method == "el") {
        auto interval = elcb::ci(ds, args.alpha);
        add("el", interval.lo, interval.hi);
    }
    if (all || args.method == "binomial") {
        std::mt19937_64 rng(args.seed);
        auto interval = elcb::binomial_ci(ds, args.alpha, rng);
        add("binomial", interval.lo, interval.hi);
    }
    if (all || args.method == "gaussian") {
        if (ds.items.size() < 2) {
            add_na("gaussian", "needs at least 2 observations");
        } else {
            auto interval = elcb::gaussian_ci(ds, args.alpha);
            add("gaussian", interval.lo, interval.hi);
        }
    }
    if (all || args.method == "cr") {
        auto stats = elcb::suffstats_from(ds);
        auto lo = elcb::cr_lower(stats, ds.range, args.alpha);
        auto hi_flip =
            elcb::cr_lower(elcb::transform_rewards(stats), ds.range,
                           args.alpha);
        if (lo && hi_flip) {
            add("cr", *lo, 1.0 - *hi_flip);
        } else {
            add_na("cr", "degenerate quadratic geometry; fall back to el");
        }
    }
    if (args.as_json) {
        std::cout << out_json.dump(2) << "\n";
    } else {
        std::cout << out_text;
    }
    return 0;
}

struct TransformArgs {
    std::string input;
    std::string out;
    bool stats_only = false;
};

int run_transform(const TransformArgs& args) {
    elcb::Dataset ds = load_any(args.input, std::nullopt);
    if (args.stats_only) {
        auto stats = elcb::transform_rewards(elcb::suffstats_from(ds));
        emit(elcb::to_json(stats) + "\n", args.out);
        return 0;
    }
    for (auto& d : ds.items) d.r = 1.0 - d.r;
    if (args.out.empty()) {
        json range = {{"w_min", ds.range.w_min}, {"w_max", ds.range.w_max}};
        std::cout << range.dump() << "\n";
        for (const auto& d : ds.items) {
            json obj = {{"w", d.w}, {"r", d.r}};
            std::cout << obj.dump() << "\n";
        }
    } else {
        elcb::write_jsonl(ds, args.out);
    }
    return 0;
}

struct SimMseArgs {
    std::vector<long long> ns{100, 1000, 10000};
    int reps = 1000;
    unsigned long long seed = 0;
    int jobs = 1;
    std::string out;
};

struct SimCoverageArgs {
    std::vector<long long> ns{100, 1000, 10000};
    int reps = 1000;
    double alpha = 0.95;
    unsigned long long seed = 0;
    int jobs = 1;
    std::string out;
};

struct LearnArgs {
    std::string input;
    std::string objective = "bound";
    double alpha = 0.95;
    int iters = 4;
    double lr = 0.1;
    int passes = 1;
    unsigned long long seed = 0;
    std::string init_path;
    std::string out;
};

int run_learn(const LearnArgs& args) {
    auto raw = elcb::load_raw_jsonl(args.input);
    elcb::LearnConfig config;
    config.alpha = args.alpha;
    config.outer_iters = args.iters;
    config.learning_rate = args.lr;
    config.passes_per_iter = args.passes;
    config.seed = args.seed;
    std::optional<elcb::LinearSoftmaxPolicy> init;
    if (!args.init_path.empty()) {
        std::ifstream in(args.init_path);
        if (!in) {
            throw elcb::ParseError("cannot open " + args.init_path);
        }
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        init = elcb::policy_from_json(text);
    }
    elcb::LearnResult result;
    if (args.objective == "bound") {
        result = elcb::learn_lb(raw, config, init);
    } else if (args.objective == "el") {
        result = elcb::learn_point(raw, config, elcb::PointObjective::EL,
                                   init);
    } else {
        result = elcb::learn_point(raw, config, elcb::PointObjective::IPS,
                                   init);
    }
    for (size_t i = 0; i < result.trace.size(); ++i) {
        std::cerr << "iter " << i << "  objective " << fmt6(result.trace[i])
                  << "\n";
    }
    emit(elcb::policy_to_json(result.policy) + "\n", args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Off-policy value estimation with likelihood-based confidence "
        "intervals for logged bandit data"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand(
        "estimate", "Point estimates of the target policy's value");
    est_cmd->add_option("-i,--input", est.input, "dataset (.jsonl or .csv)")
        ->required();
    auto* est_min = est_cmd->add_option("--wmin", est.w_min,
                                        "override the weight range minimum");
    auto* est_max = est_cmd->add_option("--wmax", est.w_max,
                                        "override the weight range maximum");
    est_cmd->add_option("--rho", est.rho,
                        "hypothesized reward on unobserved actions");
    est_cmd->add_flag("--json", est.as_json, "machine-readable output");

    CiArgs cia;
    auto* ci_cmd = app.add_subcommand(
        "ci", "Confidence intervals for the target policy's value");
    ci_cmd->add_option("-i,--input", cia.input, "dataset (.jsonl or .csv)")
        ->required();
    auto* ci_min = ci_cmd->add_option("--wmin", cia.w_min,
                                      "override the weight range minimum");
    auto* ci_max = ci_cmd->add_option("--wmax", cia.w_max,
                                      "override the weight range maximum");
    ci_cmd->add_option("--alpha", cia.alpha, "coverage level (default 0.95)");
    ci_cmd
        ->add_option("--method", cia.method,
                     "all, el, binomial, gaussian, or cr")
        ->check(CLI::IsMember({"all", "el", "binomial", "gaussian", "cr"}));
    ci_cmd->add_option("--seed", cia.seed,
                       "seed for the binomial rounding draw");
    ci_cmd->add_flag("--json", cia.as_json, "machine-readable output");

    TransformArgs tra;
    auto* tr_cmd = app.add_subcommand(
        "transform",
        "Reflect rewards r -> 1 - r (dataset or sufficient statistics)");
    tr_cmd->add_option("-i,--input", tra.input, "dataset (.jsonl or .csv)")
        ->required();
    tr_cmd->add_option("-o,--out", tra.out, "output path (default stdout)");
    tr_cmd->add_flag("--stats", tra.stats_only,
                     "emit transformed sufficient statistics as JSON");

    SimMseArgs sma;
    auto* sm_cmd = app.add_subcommand(
        "simulate-mse",
        "Monte-Carlo mean-squared-error table on the synthetic logger");
    sm_cmd->add_option("--ns", sma.ns, "sample sizes")->delimiter(',');
    sm_cmd->add_option("--reps", sma.reps, "replications per sample size");
    sm_cmd->add_option("--seed", sma.seed, "master seed");
    sm_cmd->add_option("--jobs", sma.jobs, "worker threads");
    sm_cmd->add_option("-o,--out", sma.out, "output CSV path");

    SimCoverageArgs sca;
    auto* sc_cmd = app.add_subcommand(
        "simulate-coverage",
        "Interval coverage and width table on the synthetic logger");
    sc_cmd->add_option("--ns", sca.ns, "sample sizes")->delimiter(',');
    sc_cmd->add_option("--reps", sca.reps, "replications per sample size");
    sc_cmd->add_option("--alpha", sca.alpha, "coverage level");
    sc_cmd->add_option("--seed", sca.seed, "master seed");
    sc_cmd->add_option("--jobs", sca.jobs, "worker threads");
    sc_cmd->add_option("-o,--out", sca.out, "output CSV path");

    LearnArgs lea;
    auto* le_cmd = app.add_subcommand(
        "learn", "Train a linear softmax policy on raw logged records");
    le_cmd->add_option("-i,--input", lea.input, "raw log (.jsonl with x/a/p/r)")
        ->required();
    le_cmd->add_option("--objective", lea.objective, "bound, el, or ips")
        ->check(CLI::IsMember({"bound", "el", "ips"}));
    le_cmd->add_option("--alpha", lea.alpha, "coverage level for the bound");
    le_cmd->add_option("--iters", lea.iters, "outer alternation iterations");
    le_cmd->add_option("--lr", lea.lr, "learning rate");
    le_cmd->add_option("--passes", lea.passes, "data passes per iteration");
    le_cmd->add_option("--seed", lea.seed, "shuffle seed");
    le_cmd->add_option("--init", lea.init_path, "initial policy JSON path");
    le_cmd->add_option("-o,--out", lea.out, "output policy path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (est_cmd->parsed()) {
            est.has_min = est_min->count() > 0;
            est.has_max = est_max->count() > 0;
            return run_estimate(est);
        }
        if (ci_cmd->parsed()) {
            cia.has_min = ci_min->count() > 0;
            cia.has_max = ci_max->count() > 0;
            return run_ci(cia);
        }
        if (tr_cmd->parsed()) {
            return run_transform(tra);
        }
        if (sm_cmd->parsed()) {
            auto rows = elcb::mse_experiment(sma.ns, sma.reps, sma.seed,
                                             sma.jobs);
            emit(elcb::mse_table_csv(rows), sma.out);
            return 0;
        }
        if (sc_cmd->parsed()) {
            auto rows = elcb::coverage_experiment(sca.ns, sca.reps, sca.alpha,
                                                  sca.seed, sca.jobs);
            emit(elcb::coverage_table_csv(rows), sca.out);
            return 0;
        }
        if (le_cmd->parsed()) {
            return run_learn(lea);
        }
    } catch (const elcb::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const elcb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
