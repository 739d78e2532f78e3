#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace elcb {

// One logged observation: importance weight and reward.
struct LoggedDatum {
    double w = 0.0;  // pi(a|x) / h(a|x), >= 0
    double r = 0.0;  // reward in [0, 1]
};

// A raw bandit log record before conversion to importance weights.
struct RawLoggedExample {
    std::vector<double> x;  // feature vector
    int a = 0;              // 0-based action index
    double p = 0.0;         // logged propensity, > 0
    double r = 0.0;         // reward in [0, 1]
};

/**
 * Admissible importance-weight interval.
 *
 * Invariant: 0 <= w_min <= 1 <= w_max.  The interval must bracket 1 because
 * the logging moment condition E[w] = 1 pins the weight scale; estimators and
 * interval solvers place hypothetical support at the interval endpoints.
 */
struct WeightRange {
    double w_min = 0.0;
    double w_max = 1.0;
};

struct Dataset {
    std::vector<LoggedDatum> items;
    WeightRange range;
};

/**
 * A distinct (w, r) value with a multiplicity.
 *
 * Every estimator and interval in this library depends on the data only
 * through the multiset of (w, r) pairs, so datasets with few distinct values
 * (e.g. binary rewards over a small weight support) collapse to a handful of
 * atoms and all solver passes become O(#atoms).
 */
struct Atom {
    double w = 0.0;
    double r = 0.0;
    double count = 0.0;  // exact small integer stored as double
};

// IO failures and schema violations map to distinct process exit codes in the
// command line driver, so they are distinct types here.
class ParseError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};
class ValidationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/**
 * Convert a raw logged record to an importance-weighted observation.
 *
 * pi_prob is the target policy's probability of the logged action; the weight
 * is pi_prob / example.p.  Throws std::invalid_argument when example.p <= 0 or
 * pi_prob < 0.
 */
LoggedDatum weights_from_raw(const RawLoggedExample& example, double pi_prob);

// Returns all violations (empty means valid): weights must be finite,
// nonnegative and inside the declared range, rewards inside [0, 1], and the
// range itself must satisfy 0 <= w_min <= 1 <= w_max.
std::vector<std::string> validate(const Dataset& ds);

/**
 * Load a dataset from a JSON-lines file.
 *
 * Each line is one object.  A line containing "w_min"/"w_max" declares the
 * weight range.  Data lines are either {"w": .., "r": ..} or raw records
 * {"x": [..], "a": .., "p": .., "pi": .., "r": ..} which are converted via
 * weights_from_raw.  When no range is declared and no override is given, the
 * range defaults to [0, max(1, largest observed weight)].
 *
 * Throws ParseError (with the line number) on malformed input and
 * ValidationError when the assembled dataset fails validate().
 */
Dataset load_jsonl(const std::string& path,
                   std::optional<WeightRange> range_override = std::nullopt);

void write_jsonl(const Dataset& ds, const std::string& path);

/**
 * Load raw bandit log records {"x": [..], "a": .., "p": .., "r": ..} from a
 * JSON-lines file (extra fields are ignored), for policy learning where the
 * contexts themselves are needed.  Throws ParseError on malformed input.
 */
std::vector<RawLoggedExample> load_raw_jsonl(const std::string& path);

// CSV alternative: a required "w,r" header followed by numeric rows.
Dataset load_csv(const std::string& path,
                 std::optional<WeightRange> range_override = std::nullopt);

// Collapse a dataset to distinct (w, r) atoms, in first-seen order.
std::vector<Atom> compress(const Dataset& ds);

// Total count over atoms (the original sample size).
double atom_count(const std::vector<Atom>& atoms);

}  // namespace elcb
