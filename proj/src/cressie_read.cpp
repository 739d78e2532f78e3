#include "elcb/cressie_read.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "elcb/quantiles.hpp"
#include "json.hpp"

namespace elcb {

using nlohmann::json;

void update(SuffStats& stats, double w, double r) {
    stats.n += 1.0;
    stats.sum_w += w;
    stats.sum_w2 += w * w;
    stats.sum_wr += w * r;
    stats.sum_w2r += w * w * r;
    stats.sum_w2r2 += w * w * r * r;
}

SuffStats merge(const SuffStats& a, const SuffStats& b) {
    return SuffStats{a.n + b.n,
                     a.sum_w + b.sum_w,
                     a.sum_w2 + b.sum_w2,
                     a.sum_wr + b.sum_wr,
                     a.sum_w2r + b.sum_w2r,
                     a.sum_w2r2 + b.sum_w2r2};
}

SuffStats suffstats_from(const Dataset& ds) {
    SuffStats stats;
    for (const auto& d : ds.items) update(stats, d.w, d.r);
    return stats;
}

SuffStats transform_rewards(const SuffStats& stats) {
    SuffStats out = stats;
    out.sum_wr = stats.sum_w - stats.sum_wr;
    out.sum_w2r = stats.sum_w2 - stats.sum_w2r;
    out.sum_w2r2 = stats.sum_w2 - 2.0 * stats.sum_w2r + stats.sum_w2r2;
    return out;
}

std::string to_json(const SuffStats& stats) {
    json obj = {{"n", stats.n},
                {"sum_w", stats.sum_w},
                {"sum_w2", stats.sum_w2},
                {"sum_wr", stats.sum_wr},
                {"sum_w2r", stats.sum_w2r},
                {"sum_w2r2", stats.sum_w2r2}};
    return obj.dump();
}

SuffStats suffstats_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("sufficient statistics: ") + e.what());
    }
    SuffStats stats;
    auto field = [&](const char* key) {
        if (!obj.contains(key) || !obj[key].is_number()) {
            throw ParseError(std::string("sufficient statistics: missing "
                                         "numeric field \"") +
                             key + "\"");
        }
        return obj[key].get<double>();
    };
    stats.n = field("n");
    stats.sum_w = field("sum_w");
    stats.sum_w2 = field("sum_w2");
    stats.sum_wr = field("sum_wr");
    stats.sum_w2r = field("sum_w2r");
    stats.sum_w2r2 = field("sum_w2r2");
    return stats;
}

namespace {

// First and second weight moments (per point) of the sample augmented with
// one extra atom at weight w_extra, plus the divergence of the projection of
// the uniform law onto the two moment constraints over that support.
struct AugMoments {
    double m = 0.0;     // number of support points n + 1
    double mean = 0.0;  // mean weight
    double var = 0.0;   // weight variance
    bool degenerate = true;
    double d_star = 0.0;  // divergence of the two-constraint projection
};

AugMoments aug_moments(const SuffStats& stats, double w_extra) {
    AugMoments am;
    am.m = stats.n + 1.0;
    am.mean = (stats.sum_w + w_extra) / am.m;
    double m2 = (stats.sum_w2 + w_extra * w_extra) / am.m;
    am.var = m2 - am.mean * am.mean;
    am.degenerate = am.var <= 1e-12 * std::max(1.0, m2);
    if (!am.degenerate) {
        double dev = 1.0 - am.mean;
        am.d_star = am.m * dev * dev / am.var;
    }
    return am;
}

// Augmentation endpoint used by the point estimate: pad toward the side the
// sample mean fell short of (mean weight >= 1 wants small-w mass and vice
// versa), so the correction mass moves the weight mean back toward 1.
double estimator_aug_weight(const SuffStats& stats, const WeightRange& range) {
    return stats.sum_w / stats.n >= 1.0 ? range.w_min : range.w_max;
}

}  // namespace

std::optional<CrEstimate> cr_estimate(const SuffStats& stats,
                                      const WeightRange& range, double rho) {
    if (stats.n <= 0.0) {
        throw std::invalid_argument("cr_estimate: empty statistics");
    }
    if (rho < 0.0 || rho > 1.0) {
        throw std::invalid_argument("cr_estimate: rho must lie in [0, 1]");
    }
    double w_u = estimator_aug_weight(stats, range);
    AugMoments am = aug_moments(stats, w_u);
    if (am.degenerate) return std::nullopt;
    // Tilted weights q_i = (gamma' + beta' (w_i - 1)) / M from the
    // least-squares projection onto {sum q = 1, sum q w = 1}.
    double a_bar = am.mean - 1.0;
    double gamma_p = (am.var + a_bar * a_bar) / am.var;  // b~ / (b~ - a~^2)
    double beta_p = -a_bar / am.var;
    // Expectation of w r under q; the augmented atom carries reward rho, and
    // the constraint sum q w = 1 folds its contribution into the rho terms.
    double value =
        rho + (gamma_p * (stats.sum_wr - rho * stats.sum_w) +
               beta_p * (stats.sum_w2r - stats.sum_wr -
                         rho * (stats.sum_w2 - stats.sum_w))) /
                  am.m;
    CrEstimate est;
    est.value = value;
    est.in_unit_range = value >= 0.0 && value <= 1.0;
    return est;
}

std::optional<double> cr_lower(const SuffStats& stats, const WeightRange& range,
                               double alpha) {
    if (stats.n <= 0.0) {
        throw std::invalid_argument("cr_lower: empty statistics");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("cr_lower: alpha must lie in (0, 1)");
    }
    AugMoments est_am =
        aug_moments(stats, estimator_aug_weight(stats, range));
    if (est_am.degenerate) return std::nullopt;
    double chi = chi_squared_1_quantile(alpha);

    bool any_applicable = false;
    double best = std::numeric_limits<double>::infinity();
    double candidates[2] = {range.w_min, range.w_max};
    int n_candidates = range.w_min == range.w_max ? 1 : 2;
    for (int cand = 0; cand < n_candidates; ++cand) {
        double w_c = candidates[cand];
        // Augment with (w_c, 0): the bound-seeking mass carries no reward.
        AugMoments am = aug_moments(stats, w_c);
        if (am.degenerate) continue;
        double m = am.m;
        double mu = stats.sum_wr / m;        // mean of w r (augmented r = 0)
        double muw = stats.sum_w2r / m;      // mean of w * (w r)
        double mu2 = stats.sum_w2r2 / m;     // mean of (w r)^2
        double x = mu + (1.0 - am.mean) * (muw - am.mean * mu) / am.var;
        // Residual variance of w r after regressing on {1, w}; nonnegative up
        // to roundoff, and exactly the curvature scale of the divergence as a
        // function of the value moment.
        double y = (mu2 - mu * mu) - (muw - am.mean * mu) * (muw - am.mean * mu) / am.var;
        if (y < -1e-9) {
            return std::nullopt;  // moments are inconsistent: bail out loudly
        }
        y = std::max(y, 0.0);
        double z = (chi + est_am.d_star - am.d_star) / (2.0 * m);
        if (z < -1e-9) {
            continue;  // this augmentation cannot reach the divergence budget
        }
        z = std::max(z, 0.0);
        any_applicable = true;
        best = std::min(best, x - std::sqrt(2.0 * y * z));
    }
    if (!any_applicable) return std::nullopt;
    return std::max(0.0, best);
}

}  // namespace elcb
