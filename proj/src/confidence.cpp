#include "elcb/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "elcb/estimators.hpp"
#include "elcb/quantiles.hpp"
#include "elcb/solvers.hpp"

namespace elcb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Corner reward levels; together with the two range endpoints they are the
// extreme points of the achievable (w, w r) set, so nonnegativity of a
// function linear in (w, w r) needs checking only there.
constexpr double kCornerRewards[2] = {0.0, 1.0};

double sum_wr(const std::vector<Atom>& atoms) {
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.count * a.w * a.r;
    return acc;
}

/**
 * State of the profiled lower-bound objective at fixed (beta, gamma):
 * d_k = gamma + beta w_k + w_k r_k per atom, the log-mean
 * U = (1/N) sum c log d, the multiplier A = exp(U - s), the objective
 * G = -beta - gamma + A and the moment sums that make up its derivatives.
 */
struct GState {
    bool finite = false;  // false when some d_k <= 0
    double a = 0.0;       // A = exp(U - s)
    double g = kNegInf;   // G
    double dg_dgamma = 0.0;
    double dg_dbeta = 0.0;
    double d2g_dgamma2 = 0.0;
    double value_moment = 0.0;  // (A / N) sum c w r / d, the bound itself
};

GState eval_g(const std::vector<Atom>& atoms, double n, double s, double beta,
              double gamma) {
    GState st;
    double u = 0.0, s1 = 0.0, s2 = 0.0, sw = 0.0, svr = 0.0;
    for (const auto& a : atoms) {
        double d = gamma + beta * a.w + a.w * a.r;
        if (!(d > 0.0)) {
            return st;  // outside the domain of the log
        }
        u += a.count * std::log(d);
        s1 += a.count / d;
        s2 += a.count / (d * d);
        sw += a.count * a.w / d;
        svr += a.count * a.w * a.r / d;
    }
    u /= n;
    st.finite = true;
    st.a = std::exp(u - s);
    st.g = -beta - gamma + st.a;
    st.dg_dgamma = -1.0 + st.a * s1 / n;
    st.dg_dbeta = -1.0 + st.a * sw / n;
    st.d2g_dgamma2 = st.a * ((s1 / n) * (s1 / n) - s2 / n);
    st.value_moment = st.a * svr / n;
    return st;
}

struct InnerResult {
    double gamma = 0.0;
    bool at_boundary = false;
    GState state;
};

/**
 * Maximize G over gamma at fixed beta.  The feasible set is the ray
 * gamma >= gamma_lo(beta) = max(-beta w_min, -beta w_max); G is concave in
 * gamma with a negative derivative for large gamma, so either the boundary
 * is already downhill or a safeguarded Newton iteration pins the interior
 * stationary point.
 */
InnerResult inner_gamma_solve(const std::vector<Atom>& atoms, double n,
                              double s, const WeightRange& range,
                              double beta) {
    InnerResult out;
    double gamma_lo = std::max(-beta * range.w_min, -beta * range.w_max);
    double g0 = gamma_lo + 1e-13 * (1.0 + std::fabs(gamma_lo));
    GState st0 = eval_g(atoms, n, s, beta, g0);
    if (st0.finite && st0.dg_dgamma <= 0.0) {
        out.gamma = g0;
        out.at_boundary = true;
        out.state = st0;
        return out;
    }
    // Bracket the stationary point: expand until the derivative goes
    // negative.  (It must: for large gamma, dG/dgamma -> exp(-s) - 1 < 0.)
    double lo = g0;
    if (!st0.finite) {
        // Cannot happen on the cone: every d_k >= (gamma - gamma_lo) > 0.
        throw std::runtime_error("ci_lower: infeasible at the gamma boundary");
    }
    double step = 1.0 + std::fabs(lo);
    double hi = lo + step;
    GState st_hi = eval_g(atoms, n, s, beta, hi);
    int expand = 0;
    while (!(st_hi.finite && st_hi.dg_dgamma < 0.0)) {
        step *= 2.0;
        hi = lo + step;
        st_hi = eval_g(atoms, n, s, beta, hi);
        if (++expand > 200) {
            throw std::runtime_error(
                "ci_lower: gamma stationary point failed to bracket");
        }
    }
    // Safeguarded Newton on dG/dgamma inside [lo, hi].
    double x = 0.5 * (lo + hi);
    GState st = eval_g(atoms, n, s, beta, x);
    for (int it = 0; it < 200; ++it) {
        if (!st.finite) {
            x = 0.5 * (lo + hi);
            st = eval_g(atoms, n, s, beta, x);
            continue;
        }
        if (st.dg_dgamma > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (std::fabs(st.dg_dgamma) <= 1e-14 ||
            (hi - lo) <= 1e-15 * (1.0 + std::fabs(lo) + std::fabs(hi))) {
            break;
        }
        double xn = x;
        bool newton_ok = false;
        if (st.d2g_dgamma2 < 0.0) {
            xn = x - st.dg_dgamma / st.d2g_dgamma2;
            newton_ok = xn > lo && xn < hi;
        }
        if (!newton_ok) {
            xn = 0.5 * (lo + hi);
        }
        x = xn;
        st = eval_g(atoms, n, s, beta, x);
    }
    out.gamma = x;
    out.at_boundary = false;
    out.state = st.finite ? st : eval_g(atoms, n, s, beta, 0.5 * (lo + hi));
    return out;
}

// Derivative of the gamma-profiled objective h(beta) = G(beta, gamma*(beta)).
// Interior gamma*: plain envelope, dh/dbeta = dG/dbeta.  Boundary gamma*:
// the ray endpoint moves with beta (slope -w_min for beta >= 0, -w_max for
// beta < 0), which adds the chain-rule term.
double outer_phi(const InnerResult& inner, const WeightRange& range,
                 double beta) {
    if (!inner.at_boundary) {
        return inner.state.dg_dbeta;
    }
    double w_bind = beta >= 0.0 ? range.w_min : range.w_max;
    return inner.state.dg_dbeta - w_bind * inner.state.dg_dgamma;
}

std::pair<double, DualSolution> ci_lower_impl(const std::vector<Atom>& atoms,
                                              const WeightRange& range,
                                              double alpha, double tol) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("ci_lower: empty dataset");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ci_lower: alpha must lie in (0, 1)");
    }
    DualSolution sol;
    // With no observed value mass the distribution may put all reward at
    // zero, so no positive lower bound is defensible.
    if (sum_wr(atoms) == 0.0) {
        sol.beta = 0.0;
        sol.gamma = 0.0;
        sol.kappa = 0.0;
        sol.tau = 0.0;
        sol.objective = 0.0;
        sol.feasible = true;
        return {0.0, sol};
    }
    double l_star = mle_dual_value(atoms, range);
    double chi = chi_squared_1_quantile(alpha);
    double s = (l_star + 0.5 * chi) / n;

    auto inner = [&](double beta) {
        return inner_gamma_solve(atoms, n, s, range, beta);
    };

    // h(beta) is concave, so its derivative phi is decreasing; bracket a sign
    // change and bisect.  A probe whose derivative already sits within
    // kPhiTol of zero is accepted outright: concavity makes it a global
    // maximizer.  That case is not merely an accident of probing - when every
    // observed weight equals 1 the objective depends on beta + gamma only, so
    // phi is one flat plateau of roundoff noise and no sign change exists.
    constexpr double kPhiTol = 1e-10;
    double b_lo = -1.0, b_hi = 1.0;
    std::optional<double> direct;
    InnerResult in_lo = inner(b_lo);
    double phi_lo = outer_phi(in_lo, range, b_lo);
    if (std::fabs(phi_lo) <= kPhiTol) direct = b_lo;
    int guard = 0;
    while (!direct && phi_lo <= 0.0) {
        b_hi = b_lo;
        b_lo *= 2.0;
        if (std::fabs(b_lo) > 1e13 || ++guard > 120) {
            throw std::runtime_error(
                "ci_lower: profiled objective failed to bracket (left)");
        }
        in_lo = inner(b_lo);
        phi_lo = outer_phi(in_lo, range, b_lo);
        if (std::fabs(phi_lo) <= kPhiTol) direct = b_lo;
    }
    if (!direct) {
        InnerResult in_hi = inner(b_hi);
        double phi_hi = outer_phi(in_hi, range, b_hi);
        if (std::fabs(phi_hi) <= kPhiTol) direct = b_hi;
        guard = 0;
        while (!direct && phi_hi >= 0.0) {
            b_lo = b_hi;
            b_hi = std::max(1.0, b_hi * 2.0);
            if (b_hi > 1e13 || ++guard > 120) {
                throw std::runtime_error(
                    "ci_lower: profiled objective failed to bracket (right)");
            }
            in_hi = inner(b_hi);
            phi_hi = outer_phi(in_hi, range, b_hi);
            if (std::fabs(phi_hi) <= kPhiTol) direct = b_hi;
        }
    }
    double beta_star;
    if (direct) {
        beta_star = *direct;
    } else {
        InnerResult in_mid;
        for (int it = 0; it < 400; ++it) {
            double mid = 0.5 * (b_lo + b_hi);
            in_mid = inner(mid);
            if (outer_phi(in_mid, range, mid) > 0.0) {
                b_lo = mid;
            } else {
                b_hi = mid;
            }
            if ((b_hi - b_lo) <=
                tol * (1.0 + std::fabs(b_lo) + std::fabs(b_hi))) {
                break;
            }
        }
        beta_star = 0.5 * (b_lo + b_hi);
    }
    InnerResult f = inner(beta_star);
    const GState& st = f.state;
    double bound = st.value_moment;
    // G itself equals the value moment at the optimum; use the moment form
    // (it is the display quantity) but flag real disagreement as a bug.
    if (std::fabs(bound - st.g) > 1e-6 * (1.0 + std::fabs(st.g))) {
        throw std::runtime_error(
            "ci_lower: stationarity identity violated (moment " +
            std::to_string(bound) + " vs objective " + std::to_string(st.g) +
            ")");
    }
    if (bound < -1e-9) {
        throw std::runtime_error("ci_lower: negative bound " +
                                 std::to_string(bound));
    }
    bound = std::max(0.0, bound);
    sol.beta = beta_star;
    sol.gamma = f.gamma;
    sol.kappa = st.a;
    sol.tau = 0.0;
    sol.objective = st.g;
    double slack = std::min(f.gamma + beta_star * range.w_min,
                            f.gamma + beta_star * range.w_max);
    sol.feasible = slack >= -1e-12;
    return {bound, sol};
}

}  // namespace

std::optional<double> dual_likelihood(const std::vector<Atom>& atoms,
                                      const WeightRange& range, double v,
                                      double beta, double tau) {
    for (double w : {range.w_min, range.w_max}) {
        for (double r : kCornerRewards) {
            if (1.0 + beta * (w - 1.0) + tau * (w * r - v) < 0.0) {
                return std::nullopt;
            }
        }
    }
    double acc = 0.0;
    for (const auto& a : atoms) {
        double t = 1.0 + beta * (a.w - 1.0) + tau * (a.w * a.r - v);
        if (!(t > 0.0)) {
            return kNegInf;  // feasible region's edge: likelihood collapses
        }
        acc += a.count * std::log(t);
    }
    return acc;
}

double mle_dual_value(const std::vector<Atom>& atoms,
                      const WeightRange& range) {
    double beta = el_beta_star(atoms, range);
    double acc = 0.0;
    for (const auto& a : atoms) {
        acc += a.count * std::log(1.0 + beta * (a.w - 1.0));
    }
    return acc;
}

std::pair<double, DualSolution> ci_lower(const std::vector<Atom>& atoms,
                                         const WeightRange& range, double alpha,
                                         double tol) {
    return ci_lower_impl(atoms, range, alpha, tol);
}

std::pair<double, DualSolution> ci_upper(const std::vector<Atom>& atoms,
                                         const WeightRange& range, double alpha,
                                         double tol) {
    auto flipped = ci_lower_impl(transform_rewards(atoms), range, alpha, tol);
    return {1.0 - flipped.first, flipped.second};
}

ConfidenceInterval ci(const Dataset& ds, double alpha, double tol) {
    auto atoms = compress(ds);
    ConfidenceInterval out;
    out.alpha = alpha;
    out.method = CiMethod::EL;
    out.lo = ci_lower(atoms, ds.range, alpha, tol).first;
    out.hi = ci_upper(atoms, ds.range, alpha, tol).first;
    if (out.lo > out.hi + 1e-9) {
        throw std::runtime_error("ci: crossed interval [" +
                                 std::to_string(out.lo) + ", " +
                                 std::to_string(out.hi) + "]");
    }
    out.lo = std::min(out.lo, out.hi);
    return out;
}

double max_dual_likelihood(const std::vector<Atom>& atoms,
                           const WeightRange& range, double v, double cap) {
    // For fixed tau the corner constraints cut a beta-interval; the profiled
    // function of tau is concave, so a doubling walk away from 0 brackets its
    // maximum (or hits the cap, which is all the caller needs to know).
    auto beta_interval = [&](double tau) -> std::optional<Interval1D> {
        double lo = -1e12, hi = 1e12;
        for (double w : {range.w_min, range.w_max}) {
            for (double r : kCornerRewards) {
                double base = 1.0 + tau * (w * r - v);
                double slope = w - 1.0;
                // base + beta * slope >= 0
                if (slope == 0.0) {
                    if (base < 0.0) return std::nullopt;
                } else if (slope > 0.0) {
                    lo = std::max(lo, -base / slope);
                } else {
                    hi = std::min(hi, -base / slope);
                }
            }
        }
        if (lo > hi) return std::nullopt;
        return Interval1D{lo, hi};
    };
    auto profile = [&](double tau) -> double {
        auto iv = beta_interval(tau);
        if (!iv) return kNegInf;
        double pad = 1e-12;
        double lo = iv->lo + pad * (1.0 + std::fabs(iv->lo));
        double hi = iv->hi - pad * (1.0 + std::fabs(iv->hi));
        if (lo > hi) lo = hi = 0.5 * (iv->lo + iv->hi);
        auto f = [&](double beta) {
            auto l = dual_likelihood(atoms, range, v, beta, tau);
            return l ? *l : kNegInf;
        };
        SolveReport rep = maximize_concave_1d(f, {lo, hi}, 1e-10);
        return rep.value;
    };

    double best = profile(0.0);
    if (best > cap) return best;
    // The walk stops after two consecutive steps with no material improvement.
    // Counting eps-flat steps too matters: when (w - 1) and (w r - v) are
    // parallel across the support the surface has an exactly flat ridge in
    // tau, and walking it forever only accumulates cancellation noise in
    // 1 + beta (w-1) + tau (w r - v).  The 1e8 cap bounds that noise at ~1e-8
    // even if solver jitter keeps a flat ridge looking alive.
    double t_lo = 0.0, t_hi = 0.0;
    for (double dir : {1.0, -1.0}) {
        double prev = best;
        int stalls = 0;
        for (double step = 0.25; step <= 1e8; step *= 2.0) {
            double tau = dir * step;
            double val = profile(tau);
            if (val > cap) return val;
            if (val == kNegInf) {
                if (dir > 0) t_hi = tau; else t_lo = tau;
                break;
            }
            if (dir > 0) t_hi = tau; else t_lo = tau;
            best = std::max(best, val);
            if (val > prev + 1e-12 * (1.0 + std::fabs(prev))) {
                stalls = 0;
            } else if (++stalls >= 2) {
                break;
            }
            prev = val;
        }
    }
    if (t_lo == t_hi) return best;
    SolveReport rep = maximize_concave_1d(profile, {t_lo, t_hi}, 1e-9);
    return std::max(best, rep.value);
}

namespace {

double ci_lower_bisection(const std::vector<Atom>& atoms,
                          const WeightRange& range, double n, double alpha,
                          double tol) {
    double l_star = mle_dual_value(atoms, range);
    double threshold = l_star + 0.5 * chi_squared_1_quantile(alpha);
    auto inside = [&](double v) {
        return max_dual_likelihood(atoms, range, v, threshold + 1e-9) <=
               threshold + 1e-9;
    };
    double v_hat = el_estimate(atoms, range, n, 0.5);
    if (inside(0.0)) return 0.0;
    double lo = 0.0, hi = v_hat;  // outside at lo, inside at hi
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (inside(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

ConfidenceInterval ci_bisection_reference(const Dataset& ds, double alpha,
                                          double tol) {
    auto atoms = compress(ds);
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("ci_bisection_reference: empty dataset");
    }
    ConfidenceInterval out;
    out.alpha = alpha;
    out.method = CiMethod::EL;
    out.lo = ci_lower_bisection(atoms, ds.range, n, alpha, tol);
    out.hi =
        1.0 - ci_lower_bisection(transform_rewards(atoms), ds.range, n, alpha,
                                 tol);
    return out;
}

ConfidenceInterval binomial_ci(const std::vector<Atom>& atoms,
                               const WeightRange& range, double alpha,
                               std::mt19937_64& rng) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("binomial_ci: empty dataset");
    }
    double w_max = range.w_max;
    long long trials = static_cast<long long>(std::llround(n));
    long long successes = 0;
    // Random rounding: each observation contributes a Bernoulli success with
    // probability r w / w_max, drawn per atom as one binomial count.
    for (const auto& a : atoms) {
        double p = a.r * a.w / w_max;
        if (p <= 0.0) continue;
        long long c = static_cast<long long>(std::llround(a.count));
        if (p >= 1.0) {
            successes += c;
            continue;
        }
        std::binomial_distribution<long long> dist(c, p);
        successes += dist(rng);
    }
    auto [lo_p, hi_p] = clopper_pearson(successes, trials, alpha);
    ConfidenceInterval out;
    out.alpha = alpha;
    out.method = CiMethod::Binomial;
    out.lo = std::clamp(lo_p * w_max, 0.0, 1.0);
    out.hi = std::clamp(hi_p * w_max, 0.0, 1.0);
    return out;
}

ConfidenceInterval binomial_ci(const Dataset& ds, double alpha,
                               std::mt19937_64& rng) {
    return binomial_ci(compress(ds), ds.range, alpha, rng);
}

ConfidenceInterval gaussian_ci(const std::vector<Atom>& atoms, double alpha) {
    double n = atom_count(atoms);
    if (n < 2.0) {
        throw std::invalid_argument(
            "gaussian_ci: need at least two observations");
    }
    double mean = 0.0, sq = 0.0;
    for (const auto& a : atoms) {
        mean += a.count * a.w * a.r;
        sq += a.count * a.w * a.r * a.w * a.r;
    }
    mean /= n;
    double ss = std::max(0.0, sq - n * mean * mean);
    double sd = std::sqrt(ss / (n - 1.0));
    double z = normal_quantile((1.0 + alpha) / 2.0);
    double half = z * sd / std::sqrt(n);
    ConfidenceInterval out;
    out.alpha = alpha;
    out.method = CiMethod::Gaussian;
    out.lo = std::clamp(mean - half, 0.0, 1.0);
    out.hi = std::clamp(mean + half, 0.0, 1.0);
    return out;
}

ConfidenceInterval gaussian_ci(const Dataset& ds, double alpha) {
    return gaussian_ci(compress(ds), alpha);
}

std::vector<Atom> transform_rewards(const std::vector<Atom>& atoms) {
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
        out.push_back(Atom{a.w, 1.0 - a.r, a.count});
    }
    return out;
}

}  // namespace elcb
