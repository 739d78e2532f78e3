#include "elcb/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace elcb {

namespace {

// Clamp stand-in for an unbounded tilt-coefficient domain endpoint; large
// enough that the tilt term dwarfs every other contribution, small enough to
// stay clear of overflow in products.
constexpr double kBetaClamp = 1e12;

struct TiltedSums {
    double s = 0.0;    // (1/N) sum c / D
    double sw = 0.0;   // (1/N) sum c w / D
    double swr = 0.0;  // (1/N) sum c w r / D
};

TiltedSums tilted_sums(const std::vector<Atom>& atoms, double n, double beta) {
    TiltedSums t;
    for (const auto& a : atoms) {
        double d = 1.0 + beta * (a.w - 1.0);
        t.s += a.count / d;
        t.sw += a.count * a.w / d;
        t.swr += a.count * a.w * a.r / d;
    }
    t.s /= n;
    t.sw /= n;
    t.swr /= n;
    return t;
}

}  // namespace

double ips(const Dataset& ds) {
    if (ds.items.empty()) {
        throw std::invalid_argument("ips: empty dataset");
    }
    double acc = 0.0;
    for (const auto& d : ds.items) acc += d.w * d.r;
    return acc / static_cast<double>(ds.items.size());
}

double ips(const std::vector<Atom>& atoms) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("ips: empty dataset");
    }
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.count * a.w * a.r;
    return acc / n;
}

double snips(const Dataset& ds) { return snips(compress(ds)); }

double snips(const std::vector<Atom>& atoms) {
    if (atoms.empty()) {
        throw std::invalid_argument("snips: empty dataset");
    }
    double num = 0.0, den = 0.0;
    for (const auto& a : atoms) {
        num += a.count * a.w * a.r;
        den += a.count * a.w;
    }
    // Every weight zero means the target policy never takes a logged action;
    // the ratio is 0/0 and the only defensible report is no observed value.
    return den > 0.0 ? num / den : 0.0;
}

double clipped_dr_const_half(const Dataset& ds) {
    return clipped_dr_const_half(compress(ds));
}

double clipped_dr_const_half(const std::vector<Atom>& atoms) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("clipped_dr_const_half: empty dataset");
    }
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.count * a.w * (a.r - 0.5);
    double v = 0.5 + acc / n;
    return std::min(1.0, std::max(0.0, v));
}

double el_beta_star(const std::vector<Atom>& atoms, const WeightRange& range) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("el_beta_star: empty dataset");
    }
    double sum_abs = 0.0, sum_dev = 0.0;
    for (const auto& a : atoms) {
        sum_abs += a.count * std::fabs(a.w - 1.0);
        sum_dev += a.count * (a.w - 1.0);
    }
    if (sum_abs == 0.0) return 0.0;  // all weights exactly 1

    // Feasible tilt interval keeps 1 + beta (w - 1) nonnegative across the
    // whole weight range; an endpoint at 1 leaves that side unconstrained.
    double lo = range.w_max > 1.0 ? -1.0 / (range.w_max - 1.0) : -kBetaClamp;
    double hi = range.w_min < 1.0 ? 1.0 / (1.0 - range.w_min) : kBetaClamp;
    double lo_in = lo + 1e-12 * (1.0 + std::fabs(lo));
    double hi_in = hi - 1e-12 * (1.0 + std::fabs(hi));

    auto g = [&](double beta) {
        double acc = 0.0;
        for (const auto& a : atoms) {
            acc += a.count * (a.w - 1.0) / (1.0 + beta * (a.w - 1.0));
        }
        return acc;
    };
    auto gprime = [&](double beta) {
        double acc = 0.0;
        for (const auto& a : atoms) {
            double d = 1.0 + beta * (a.w - 1.0);
            acc -= a.count * (a.w - 1.0) * (a.w - 1.0) / (d * d);
        }
        return acc;
    };

    // The objective's derivative g is strictly decreasing, so the sign at the
    // (slightly shrunk) endpoints settles whether the maximum is interior.
    if (g(lo_in) <= 0.0) return lo_in;
    if (g(hi_in) >= 0.0) return hi_in;

    double a = lo_in, b = hi_in;
    // sign(beta*) = sign(sum (w - 1)) lets us start from a tighter bracket.
    if (sum_dev >= 0.0 && a < 0.0 && g(0.0) > 0.0) a = 0.0;
    if (sum_dev <= 0.0 && b > 0.0 && g(0.0) < 0.0) b = 0.0;
    for (int i = 0; i < 100 && (b - a) > 1e-15 * (1.0 + std::fabs(a) + std::fabs(b));
         ++i) {
        double mid = 0.5 * (a + b);
        if (g(mid) > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Newton polish to drive |g| itself to roundoff level; the downstream
    // identity sum Q = sum Q w = 1 at an interior optimum relies on this.
    double x = 0.5 * (a + b);
    double gtol = 1e-12 * (1.0 + sum_abs);
    for (int i = 0; i < 50; ++i) {
        double gx = g(x);
        if (std::fabs(gx) <= gtol) break;
        double gp = gprime(x);
        if (gp == 0.0) break;
        double step = gx / gp;
        double xn = x - step;
        if (!(xn > lo_in && xn < hi_in)) break;
        x = xn;
        if (std::fabs(step) <= 1e-16 * (1.0 + std::fabs(x))) break;
    }
    return x;
}

namespace {

/**
 * The tilted weight mean satisfies Sw <= 1 exactly at the true beta*, so any
 * overshoot of the unit interval is solver tolerance: the residual of the
 * tilt equation enters the estimate multiplied by (1 - beta).  Overshoot
 * within that scale is snapped back; anything larger is a logic error and is
 * thrown, never clipped.
 */
double unit_slack(double beta) { return 1e-9 * (1.0 + std::fabs(beta)); }

double snap_unit(double v, double beta, const char* who) {
    double slack = unit_slack(beta);
    if (v < -slack || v > 1.0 + slack) {
        throw std::runtime_error(std::string(who) +
                                 ": internal invariant violated (value " +
                                 std::to_string(v) +
                                 " escaped the unit interval)");
    }
    return std::min(1.0, std::max(0.0, v));
}

}  // namespace

double el_estimate(const std::vector<Atom>& atoms, const WeightRange& range,
                   double n, double rho) {
    if (rho < 0.0 || rho > 1.0) {
        throw std::invalid_argument("el_estimate: rho must lie in [0, 1]");
    }
    double beta = el_beta_star(atoms, range);
    TiltedSums t = tilted_sums(atoms, n, beta);
    double v = rho * (1.0 - t.sw) + t.swr;
    return snap_unit(v, beta, "el_estimate");
}

double el_estimate(const Dataset& ds, double rho) {
    auto atoms = compress(ds);
    return el_estimate(atoms, ds.range, atom_count(atoms), rho);
}

ElEstimateInterval el_estimate_interval(const Dataset& ds) {
    auto atoms = compress(ds);
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("el_estimate_interval: empty dataset");
    }
    double beta = el_beta_star(atoms, ds.range);
    TiltedSums t = tilted_sums(atoms, n, beta);
    double v0 = snap_unit(t.swr, beta, "el_estimate_interval");  // rho = 0
    double v1 = snap_unit((1.0 - t.sw) + t.swr, beta,
                          "el_estimate_interval");               // rho = 1
    ElEstimateInterval out;
    out.lo = std::min(v0, v1);
    out.hi = std::max(v0, v1);
    // Same conditioning argument as snap_unit: the deviation of the tilted
    // weight mean from one is the tilt-equation residual scaled by 1 - beta.
    out.is_point = std::fabs(t.sw - 1.0) <= unit_slack(beta);
    return out;
}

double emp_estimate(const std::vector<Atom>& atoms, const WeightRange& range) {
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("emp_estimate: empty dataset");
    }
    double beta = el_beta_star(atoms, range);
    TiltedSums t = tilted_sums(atoms, n, beta);
    return t.swr / t.s;
}

double emp_estimate(const Dataset& ds) {
    return emp_estimate(compress(ds), ds.range);
}

double el_value_difference(const Dataset& ds, double rho) {
    auto atoms = compress(ds);
    double n = atom_count(atoms);
    if (n <= 0.0) {
        throw std::invalid_argument("el_value_difference: empty dataset");
    }
    double beta = el_beta_star(atoms, ds.range);
    double acc = 0.0;
    for (const auto& a : atoms) {
        double d = 1.0 + beta * (a.w - 1.0);
        acc += a.count * (a.w - 1.0) * (a.r - rho) / d;
    }
    return acc / n;
}

double bias_bound(double n, double w_max) {
    if (!(n > 0.0) || !(w_max > 0.0)) {
        throw std::invalid_argument("bias_bound: need n > 0 and w_max > 0");
    }
    return 10.0 * std::sqrt(w_max / n) + 16.0 * w_max / n;
}

}  // namespace elcb
