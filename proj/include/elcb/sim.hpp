#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "elcb/data.hpp"
#include "elcb/learn.hpp"

namespace elcb {

/**
 * Synthetic logging environment on the three-point weight support {0, 2, w_big}
 * with atom probabilities chosen so that E[w] = 1 and E[w^2] = w_big / 10
 * exactly; rewards are Bernoulli with the same success probability at every
 * weight, so the policy value equals that probability and the importance
 * weights carry no information about it beyond their first moment.
 */
struct SyntheticEnv {
    std::array<double, 3> weight_support{};
    std::array<double, 3> weight_probs{};
    std::array<double, 3> reward_prob{};  // P(r = 1 | w), one per support atom
    double value = 0.0;                   // true policy value
};

// Draw an environment: value ~ Uniform[0, 1], reward probability equal to the
// value at every weight atom.
SyntheticEnv sample_synthetic_env(std::mt19937_64& rng);

// Explicit i.i.d. sample of n observations (used only by small tests).
Dataset sample_dataset(const SyntheticEnv& env, long long n,
                       std::mt19937_64& rng);

/**
 * Distributionally identical sample represented directly as atoms: the count
 * of each (weight, reward) cell is drawn by a chain of binomials, so drawing
 * n = 10^5 observations costs the same as n = 10.
 */
std::vector<Atom> sample_dataset_atoms(const SyntheticEnv& env, long long n,
                                       std::mt19937_64& rng);

struct MseRow {
    long long n = 0;
    std::string estimator;
    double mse = 0.0;
    double stderr_ = 0.0;
};

/**
 * Monte-Carlo mean-squared-error table over fresh environments: for each
 * sample size, each estimator's squared error against the environment's true
 * value, averaged over `reps` replications.  Deterministic for a fixed seed
 * regardless of the number of worker threads.
 */
std::vector<MseRow> mse_experiment(const std::vector<long long>& ns,
                                   int reps, std::uint64_t seed, int jobs);

struct CoverageRow {
    long long n = 0;
    std::string method;
    double coverage = 0.0;
    double coverage_se = 0.0;
    double mean_width = 0.0;
    double width_se = 0.0;
};

// Interval coverage and width for the three interval methods on the same
// synthetic environments.
std::vector<CoverageRow> coverage_experiment(const std::vector<long long>& ns,
                                             int reps, double alpha,
                                             std::uint64_t seed, int jobs);

struct LabeledTable {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    int num_classes = 0;
};

// CSV with a header, numeric feature columns, and a final integer label
// column.  Throws ParseError on malformed rows.
LabeledTable load_labeled_csv(const std::string& path);

/**
 * A supervised dataset turned into a logged bandit problem: a logging policy
 * is fit on one split, then plays epsilon-greedy on another to produce the
 * bandit log, and a third split is held out for evaluating learned policies
 * against ground truth.
 */
struct BanditizedDataset {
    std::vector<RawLoggedExample> logged;
    std::vector<int> logged_labels;  // aligned with `logged`
    LabeledTable full;
    std::vector<size_t> train_idx, log_idx, holdout_idx;
    LinearSoftmaxPolicy logger;
    int num_actions = 0;
    double epsilon = 0.0;
};

BanditizedDataset supervised_to_bandit(const LabeledTable& table,
                                       double epsilon,
                                       const std::array<double, 3>& fracs,
                                       std::mt19937_64& rng);

// Expected accuracy of the policy on the rows indexed by idx (probability
// assigned to the correct label, averaged).
double true_value(const LinearSoftmaxPolicy& policy, const LabeledTable& table,
                  const std::vector<size_t>& idx);

struct LearningRow {
    std::string dataset;
    std::string method;
    double mean_value = 0.0;
    double t_vs_baseline = 0.0;  // paired t statistic against the bound learner
};

/**
 * Head-to-head learning comparison on banditized multiclass datasets:
 * the bound maximizer against point-estimate maximizers, each trained on the
 * same logs and scored by ground-truth accuracy on held-out rows, paired over
 * replications.
 */
std::vector<LearningRow> learning_experiment(
    const std::vector<std::pair<std::string, std::string>>& named_csv_paths,
    int reps, double epsilon, const LearnConfig& config, std::uint64_t seed,
    int jobs);

std::string mse_table_csv(const std::vector<MseRow>& rows);
std::string coverage_table_csv(const std::vector<CoverageRow>& rows);
std::string learning_table_csv(const std::vector<LearningRow>& rows);

/**
 * Run fn(i) for i in [0, n) on `jobs` threads.  Results must be written to
 * per-index slots by the caller; the schedule is static so any reduction in
 * index order is deterministic.
 */
void parallel_for(int jobs, long long n,
                  const std::function<void(long long)>& fn);

// SplitMix64 stream: hash a (seed, counter) pair to a well-mixed 64-bit
// value, used to give every replication its own RNG stream.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter);

}  // namespace elcb
