#include "elcb/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "elcb/confidence.hpp"
#include "elcb/estimators.hpp"

namespace elcb {

std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + counter * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void parallel_for(int jobs, long long n,
                  const std::function<void(long long)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            long long i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<long long>(jobs, n);
    pool.reserve(count);
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

SyntheticEnv sample_synthetic_env(std::mt19937_64& rng) {
    SyntheticEnv env;
    env.weight_support = {0.0, 2.0, 1000.0};
    // Exact rationals chosen so E[w] = 1 and E[w^2] = 100:
    //   2 * 225/499 + 1000 * 49/499000 = (450 + 49) / 499 = 1,
    //   4 * 225/499 + 10^6 * 49/499000 = (900 + 49000) / 499 = 100.
    env.weight_probs = {273951.0 / 499000.0, 225.0 / 499.0, 49.0 / 499000.0};
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    env.value = unif(rng);
    // Reward probability independent of the logged weight: the true policy
    // value equals env.value and the weights carry no extra signal.
    env.reward_prob = {env.value, env.value, env.value};
    return env;
}

Dataset sample_dataset(const SyntheticEnv& env, long long n,
                       std::mt19937_64& rng) {
    Dataset ds;
    ds.range = WeightRange{0.0, env.weight_support[2]};
    std::discrete_distribution<int> pick(env.weight_probs.begin(),
                                         env.weight_probs.end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long long i = 0; i < n; ++i) {
        int k = pick(rng);
        double r = unif(rng) < env.reward_prob[k] ? 1.0 : 0.0;
        ds.items.push_back(LoggedDatum{env.weight_support[k], r});
    }
    return ds;
}

std::vector<Atom> sample_dataset_atoms(const SyntheticEnv& env, long long n,
                                       std::mt19937_64& rng) {
    // Cell counts by a chain of binomials: identical in distribution to n
    // independent draws, at O(1) cost in n.
    std::array<long long, 3> counts{};
    long long remaining = n;
    double mass_left = 1.0;
    for (int k = 0; k < 3; ++k) {
        double p = env.weight_probs[k] / mass_left;
        long long c;
        if (k == 2 || p >= 1.0) {
            c = remaining;
        } else {
            std::binomial_distribution<long long> dist(remaining, p);
            c = dist(rng);
        }
        counts[k] = c;
        remaining -= c;
        mass_left -= env.weight_probs[k];
        if (remaining <= 0) break;
    }
    std::vector<Atom> atoms;
    for (int k = 0; k < 3; ++k) {
        if (counts[k] <= 0) continue;
        long long ones;
        double p = env.reward_prob[k];
        if (p <= 0.0) {
            ones = 0;
        } else if (p >= 1.0) {
            ones = counts[k];
        } else {
            std::binomial_distribution<long long> dist(counts[k], p);
            ones = dist(rng);
        }
        if (ones > 0) {
            atoms.push_back(Atom{env.weight_support[k], 1.0,
                                 static_cast<double>(ones)});
        }
        if (counts[k] - ones > 0) {
            atoms.push_back(Atom{env.weight_support[k], 0.0,
                                 static_cast<double>(counts[k] - ones)});
        }
    }
    return atoms;
}

namespace {

constexpr int kMseEstimators = 6;
const char* kMseNames[kMseEstimators] = {"ips",  "snips", "clipped_dr",
                                         "el",   "emp",   "constant"};

constexpr int kCoverageMethods = 3;
const char* kCoverageNames[kCoverageMethods] = {"el", "binomial", "gaussian"};

double fmt_mean(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double fmt_se(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                     static_cast<double>(xs.size()));
}

}  // namespace

std::vector<MseRow> mse_experiment(const std::vector<long long>& ns, int reps,
                                   std::uint64_t seed, int jobs) {
    if (reps < 2) {
        throw std::invalid_argument("mse_experiment: need at least 2 reps");
    }
    std::vector<MseRow> rows;
    for (size_t ni = 0; ni < ns.size(); ++ni) {
        long long n = ns[ni];
        // Per-replication slots written independently, reduced in fixed
        // order: results are identical for any worker count.
        std::vector<std::array<double, kMseEstimators>> sq(reps);
        parallel_for(jobs, reps, [&](long long rep) {
            std::mt19937_64 rng(
                splitmix64(seed, ni * static_cast<std::uint64_t>(reps) + rep));
            SyntheticEnv env = sample_synthetic_env(rng);
            auto atoms = sample_dataset_atoms(env, n, rng);
            WeightRange range{0.0, env.weight_support[2]};
            double nn = atom_count(atoms);
            double est[kMseEstimators];
            est[0] = ips(atoms);
            est[1] = snips(atoms);
            est[2] = clipped_dr_const_half(atoms);
            est[3] = el_estimate(atoms, range, nn, 0.5);
            est[4] = emp_estimate(atoms, range);
            est[5] = 0.5;
            for (int e = 0; e < kMseEstimators; ++e) {
                double err = est[e] - env.value;
                sq[rep][e] = err * err;
            }
        });
        for (int e = 0; e < kMseEstimators; ++e) {
            std::vector<double> xs(reps);
            for (int rep = 0; rep < reps; ++rep) xs[rep] = sq[rep][e];
            MseRow row;
            row.n = n;
            row.estimator = kMseNames[e];
            row.mse = fmt_mean(xs);
            row.stderr_ = fmt_se(xs, row.mse);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<CoverageRow> coverage_experiment(const std::vector<long long>& ns,
                                             int reps, double alpha,
                                             std::uint64_t seed, int jobs) {
    if (reps < 2) {
        throw std::invalid_argument(
            "coverage_experiment: need at least 2 reps");
    }
    std::vector<CoverageRow> rows;
    for (size_t ni = 0; ni < ns.size(); ++ni) {
        long long n = ns[ni];
        std::vector<std::array<double, kCoverageMethods>> covered(reps);
        std::vector<std::array<double, kCoverageMethods>> width(reps);
        parallel_for(jobs, reps, [&](long long rep) {
            std::mt19937_64 rng(
                splitmix64(seed, ni * static_cast<std::uint64_t>(reps) + rep));
            SyntheticEnv env = sample_synthetic_env(rng);
            auto atoms = sample_dataset_atoms(env, n, rng);
            WeightRange range{0.0, env.weight_support[2]};
            ConfidenceInterval cis[kCoverageMethods];
            cis[0] = ConfidenceInterval{ci_lower(atoms, range, alpha).first,
                                        ci_upper(atoms, range, alpha).first,
                                        alpha, CiMethod::EL};
            cis[1] = binomial_ci(atoms, range, alpha, rng);
            cis[2] = gaussian_ci(atoms, alpha);
            for (int m = 0; m < kCoverageMethods; ++m) {
                covered[rep][m] =
                    (cis[m].lo <= env.value && env.value <= cis[m].hi) ? 1.0
                                                                       : 0.0;
                width[rep][m] = cis[m].hi - cis[m].lo;
            }
        });
        for (int m = 0; m < kCoverageMethods; ++m) {
            std::vector<double> cov(reps), wid(reps);
            for (int rep = 0; rep < reps; ++rep) {
                cov[rep] = covered[rep][m];
                wid[rep] = width[rep][m];
            }
            CoverageRow row;
            row.n = n;
            row.method = kCoverageNames[m];
            row.coverage = fmt_mean(cov);
            row.coverage_se = std::sqrt(row.coverage * (1.0 - row.coverage) /
                                        static_cast<double>(reps));
            row.mean_width = fmt_mean(wid);
            row.width_se = fmt_se(wid, row.mean_width);
            rows.push_back(row);
        }
    }
    return rows;
}

LabeledTable load_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file");
    }
    LabeledTable table;
    long long line_no = 1;
    size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(ss, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": malformed number");
            }
        }
        if (values.size() < 2) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": need at least one feature and a label");
        }
        if (cols == 0) {
            cols = values.size();
        } else if (values.size() != cols) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": ragged row");
        }
        double label = values.back();
        values.pop_back();
        int lab = static_cast<int>(std::llround(label));
        if (lab < 0 || std::fabs(label - lab) > 1e-9) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": label must be a nonnegative integer");
        }
        table.features.push_back(std::move(values));
        table.labels.push_back(lab);
        table.num_classes = std::max(table.num_classes, lab + 1);
    }
    if (table.features.empty()) {
        throw ParseError(path + ": no data rows");
    }
    if (table.num_classes < 2) {
        throw ParseError(path + ": need at least two classes");
    }
    return table;
}

namespace {

std::vector<double> with_bias(const std::vector<double>& x) {
    std::vector<double> out = x;
    out.push_back(1.0);
    return out;
}

// One-pass stochastic softmax regression: the logging policy is deliberately
// imperfect so an epsilon-greedy log of it leaves room for improvement.
LinearSoftmaxPolicy fit_logger(const LabeledTable& table,
                               const std::vector<size_t>& idx) {
    LinearSoftmaxPolicy policy;
    policy.dims = static_cast<int>(table.features.front().size()) + 1;
    policy.actions = table.num_classes;
    policy.temperature = 1.0;
    policy.weights.assign(
        static_cast<size_t>(policy.dims) * policy.actions, 0.0);
    constexpr double lr = 0.5;
    for (size_t i : idx) {
        auto x = with_bias(table.features[i]);
        auto probs = policy_probs(policy, x);
        int label = table.labels[i];
        for (int f = 0; f < policy.dims; ++f) {
            double xf = x[f];
            if (xf == 0.0) continue;
            for (int b = 0; b < policy.actions; ++b) {
                double target = b == label ? 1.0 : 0.0;
                policy.at(f, b) += lr * xf * (target - probs[b]);
            }
        }
    }
    return policy;
}

}  // namespace

BanditizedDataset supervised_to_bandit(const LabeledTable& table,
                                       double epsilon,
                                       const std::array<double, 3>& fracs,
                                       std::mt19937_64& rng) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument(
            "supervised_to_bandit: epsilon must lie in (0, 1]");
    }
    double total_frac = fracs[0] + fracs[1] + fracs[2];
    if (std::fabs(total_frac - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "supervised_to_bandit: split fractions must sum to 1");
    }
    size_t n = table.features.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    size_t n_train = static_cast<size_t>(std::llround(fracs[0] * n));
    size_t n_log = static_cast<size_t>(std::llround(fracs[1] * n));
    n_train = std::min(n_train, n);
    n_log = std::min(n_log, n - n_train);
    BanditizedDataset out;
    out.full = table;
    out.num_actions = table.num_classes;
    out.epsilon = epsilon;
    out.train_idx.assign(order.begin(), order.begin() + n_train);
    out.log_idx.assign(order.begin() + n_train,
                       order.begin() + n_train + n_log);
    out.holdout_idx.assign(order.begin() + n_train + n_log, order.end());
    if (out.train_idx.empty() || out.log_idx.empty() ||
        out.holdout_idx.empty()) {
        throw std::invalid_argument(
            "supervised_to_bandit: a split came out empty");
    }
    out.logger = fit_logger(table, out.train_idx);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_action(0, out.num_actions - 1);
    double k = static_cast<double>(out.num_actions);
    for (size_t i : out.log_idx) {
        auto x = with_bias(table.features[i]);
        auto probs = policy_probs(out.logger, x);
        int greedy = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        int a = unif(rng) < epsilon ? pick_action(rng) : greedy;
        RawLoggedExample ex;
        ex.x = x;
        ex.a = a;
        ex.p = a == greedy ? 1.0 - epsilon + epsilon / k : epsilon / k;
        ex.r = a == table.labels[i] ? 1.0 : 0.0;
        out.logged.push_back(std::move(ex));
        out.logged_labels.push_back(table.labels[i]);
    }
    return out;
}

double true_value(const LinearSoftmaxPolicy& policy, const LabeledTable& table,
                  const std::vector<size_t>& idx) {
    if (idx.empty()) {
        throw std::invalid_argument("true_value: no evaluation rows");
    }
    double acc = 0.0;
    for (size_t i : idx) {
        auto probs = policy_probs(policy, with_bias(table.features[i]));
        acc += probs[table.labels[i]];
    }
    return acc / static_cast<double>(idx.size());
}

std::vector<LearningRow> learning_experiment(
    const std::vector<std::pair<std::string, std::string>>& named_csv_paths,
    int reps, double epsilon, const LearnConfig& config, std::uint64_t seed,
    int jobs) {
    if (reps < 2) {
        throw std::invalid_argument(
            "learning_experiment: need at least 2 reps");
    }
    constexpr int kMethods = 3;  // bound, el, ips
    const char* names[kMethods] = {"bound", "el", "ips"};
    std::vector<LearningRow> rows;
    for (size_t di = 0; di < named_csv_paths.size(); ++di) {
        LabeledTable table = load_labeled_csv(named_csv_paths[di].second);
        std::vector<std::array<double, kMethods>> values(reps);
        parallel_for(jobs, reps, [&](long long rep) {
            std::mt19937_64 rng(splitmix64(
                seed, di * static_cast<std::uint64_t>(reps) + rep));
            BanditizedDataset bd = supervised_to_bandit(
                table, epsilon, {0.2, 0.2, 0.6}, rng);
            LearnConfig rep_config = config;
            rep_config.seed = splitmix64(seed ^ 0x5bd1e995u,
                                         di * static_cast<std::uint64_t>(reps) +
                                             rep);
            LearnResult lb =
                learn_lb(bd.logged, rep_config, bd.logger);
            LearnResult el = learn_point(bd.logged, rep_config,
                                         PointObjective::EL, bd.logger);
            LearnResult ip = learn_point(bd.logged, rep_config,
                                         PointObjective::IPS, bd.logger);
            values[rep][0] = true_value(lb.policy, table, bd.holdout_idx);
            values[rep][1] = true_value(el.policy, table, bd.holdout_idx);
            values[rep][2] = true_value(ip.policy, table, bd.holdout_idx);
        });
        for (int m = 0; m < kMethods; ++m) {
            std::vector<double> xs(reps);
            for (int rep = 0; rep < reps; ++rep) xs[rep] = values[rep][m];
            LearningRow row;
            row.dataset = named_csv_paths[di].first;
            row.method = names[m];
            row.mean_value = fmt_mean(xs);
            if (m == 0) {
                row.t_vs_baseline = 0.0;
            } else {
                // Paired t statistic of (bound learner - this learner).
                std::vector<double> diff(reps);
                for (int rep = 0; rep < reps; ++rep) {
                    diff[rep] = values[rep][0] - values[rep][m];
                }
                double dm = fmt_mean(diff);
                double dse = fmt_se(diff, dm);
                row.t_vs_baseline = dse > 0.0 ? dm / dse
                                              : (dm == 0.0 ? 0.0 : 1e9);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

std::string fmt_full(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string mse_table_csv(const std::vector<MseRow>& rows) {
    std::string out = "n,estimator,mse,stderr\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + r.estimator + "," +
               fmt_full(r.mse) + "," + fmt_full(r.stderr_) + "\n";
    }
    return out;
}

std::string coverage_table_csv(const std::vector<CoverageRow>& rows) {
    std::string out = "n,method,coverage,coverage_se,mean_width,width_se\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + r.method + "," +
               fmt_full(r.coverage) + "," + fmt_full(r.coverage_se) + "," +
               fmt_full(r.mean_width) + "," + fmt_full(r.width_se) + "\n";
    }
    return out;
}

std::string learning_table_csv(const std::vector<LearningRow>& rows) {
    std::string out = "dataset,method,mean_value,t_vs_baseline\n";
    for (const auto& r : rows) {
        out += r.dataset + "," + r.method + "," + fmt_full(r.mean_value) +
               "," + fmt_full(r.t_vs_baseline) + "\n";
    }
    return out;
}

}  // namespace elcb
