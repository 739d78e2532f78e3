#include "elcb/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elcb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct GridResult {
    double x = 0.0;
    double value = kNegInf;
    int evals = 0;
    bool tolerance_met = false;
};

/**
 * Shrinking-grid maximization of a unimodal (concave-on-its-domain) function.
 *
 * Evaluates an evenly spaced grid, then recurses on the cells adjacent to the
 * best point; -inf values (infeasible stretches) are handled naturally since
 * the bracket around the discrete argmax always contains the true maximizer.
 * Linear convergence (16x per round) but immune to the bracketing pitfalls a
 * golden-section search has with infinite values.
 */
GridResult shrink_grid_max(const std::function<double(double)>& f, double lo,
                           double hi, double tol, int max_rounds = 80) {
    constexpr int kPoints = 33;
    GridResult out;
    if (hi < lo) return out;
    if (hi == lo) {
        out.x = lo;
        out.value = f(lo);
        out.evals = 1;
        out.tolerance_met = true;
        return out;
    }
    // First sweep; densify a couple of times if nothing is feasible, in case
    // the feasible set is much narrower than one initial grid cell.
    int best_i = -1;
    double step = 0.0;
    for (int points : {kPoints, 513, 8193}) {
        step = (hi - lo) / (points - 1);
        double best_v = kNegInf;
        for (int i = 0; i < points; ++i) {
            double x = lo + step * i;
            double v = f(x);
            ++out.evals;
            if (v > best_v) {
                best_v = v;
                best_i = i;
            }
        }
        if (std::isfinite(best_v)) {
            out.value = best_v;
            out.x = lo + step * best_i;
            break;
        }
        best_i = -1;
    }
    if (best_i < 0) {
        throw std::invalid_argument(
            "maximize: objective is -inf on the whole domain");
    }
    double blo = std::max(lo, out.x - step);
    double bhi = std::min(hi, out.x + step);
    for (int round = 0; round < max_rounds && (bhi - blo) > tol; ++round) {
        double st = (bhi - blo) / (kPoints - 1);
        double best_v = kNegInf;
        int bi = 0;
        for (int i = 0; i < kPoints; ++i) {
            double x = blo + st * i;
            double v = f(x);
            ++out.evals;
            if (v > best_v) {
                best_v = v;
                bi = i;
            }
        }
        double nlo = blo + st * std::max(0, bi - 1);
        double nhi = blo + st * std::min(kPoints - 1, bi + 1);
        blo = nlo;
        bhi = nhi;
        if (best_v > out.value) {
            out.value = best_v;
            out.x = blo + (bhi - blo) / 2.0;
        }
    }
    out.tolerance_met = (bhi - blo) <= tol;
    double mid = 0.5 * (blo + bhi);
    double vm = f(mid);
    ++out.evals;
    if (vm >= out.value) {
        out.value = vm;
        out.x = mid;
    }
    return out;
}

// Solve G y = rhs for a small dense symmetric-ish system by Gaussian
// elimination with partial pivoting.  Rows are equilibrated first so that a
// legitimate system with wildly mixed row scales is not mistaken for a
// singular one.  Throws on numerical singularity.
std::vector<double> solve_small(std::vector<std::vector<double>> g,
                                std::vector<double> rhs) {
    const size_t m = rhs.size();
    for (size_t i = 0; i < m; ++i) {
        double row_scale = 0.0;
        for (double x : g[i]) row_scale = std::max(row_scale, std::fabs(x));
        if (row_scale == 0.0) {
            throw std::runtime_error("solve_small: zero row");
        }
        for (double& x : g[i]) x /= row_scale;
        rhs[i] /= row_scale;
    }
    for (size_t col = 0; col < m; ++col) {
        size_t piv = col;
        for (size_t rowi = col + 1; rowi < m; ++rowi) {
            if (std::fabs(g[rowi][col]) > std::fabs(g[piv][col])) piv = rowi;
        }
        if (std::fabs(g[piv][col]) <= 1e-13) {
            throw std::runtime_error("solve_small: singular matrix");
        }
        std::swap(g[piv], g[col]);
        std::swap(rhs[piv], rhs[col]);
        for (size_t rowi = col + 1; rowi < m; ++rowi) {
            double factor = g[rowi][col] / g[col][col];
            for (size_t k = col; k < m; ++k) g[rowi][k] -= factor * g[col][k];
            rhs[rowi] -= factor * rhs[col];
        }
    }
    std::vector<double> y(m, 0.0);
    for (size_t rowi = m; rowi-- > 0;) {
        double acc = rhs[rowi];
        for (size_t k = rowi + 1; k < m; ++k) acc -= g[rowi][k] * y[k];
        y[rowi] = acc / g[rowi][rowi];
    }
    return y;
}

}  // namespace

SolveReport maximize_concave_1d(
    const std::function<double(double)>& f, Interval1D domain, double tol,
    const std::function<double(double)>* derivative) {
    if (!(domain.hi >= domain.lo)) {
        throw std::invalid_argument("maximize_concave_1d: empty domain");
    }
    SolveReport report;
    if (derivative != nullptr && domain.hi > domain.lo) {
        double lo = domain.lo, hi = domain.hi;
        int iters = 0;
        double dlo = (*derivative)(lo);
        double dhi = (*derivative)(hi);
        if (dlo <= 0.0) {
            hi = lo;  // decreasing from the start: maximum at the left end
        } else if (dhi >= 0.0) {
            lo = hi;  // still increasing at the right end
        } else {
            while (hi - lo > tol && iters < 400) {
                double mid = 0.5 * (lo + hi);
                ++iters;
                if ((*derivative)(mid) > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        double x = 0.5 * (lo + hi);
        report.argmax = {x};
        report.value = f(x);
        report.iterations = iters;
        report.tolerance_met = (hi - lo) <= tol;
        return report;
    }
    GridResult g = shrink_grid_max(f, domain.lo, domain.hi, tol);
    report.argmax = {g.x};
    report.value = g.value;
    report.iterations = g.evals;
    report.tolerance_met = g.tolerance_met;
    return report;
}

SolveReport maximize_concave_2d_constrained(
    const std::function<double(double, double)>& f,
    const std::vector<HalfPlane>& constraints, std::vector<double> init,
    double tol) {
    constexpr double kLimit = 1e15;
    // Explicit x-bounds come from rows with no y coefficient.
    double x_min = -kLimit, x_max = kLimit;
    for (const auto& hp : constraints) {
        if (hp.b == 0.0) {
            if (hp.a == 0.0) {
                if (hp.c < 0.0) {
                    throw std::invalid_argument(
                        "maximize_concave_2d_constrained: contradictory "
                        "constraint 0 <= c < 0");
                }
                continue;
            }
            if (hp.a > 0.0) {
                x_max = std::min(x_max, hp.c / hp.a);
            } else {
                x_min = std::max(x_min, hp.c / hp.a);
            }
        }
    }
    if (x_min > x_max) {
        throw std::invalid_argument(
            "maximize_concave_2d_constrained: empty feasible x-range");
    }

    struct YBand {
        double lo, hi;
        bool lo_synthetic, hi_synthetic;  // end is the cap, not a constraint
    };
    auto y_interval = [&](double x) -> std::optional<YBand> {
        YBand band{-kLimit, kLimit, true, true};
        for (const auto& hp : constraints) {
            if (hp.b == 0.0) {
                if (hp.a * x > hp.c + 1e-12 * (1.0 + std::fabs(hp.c))) {
                    return std::nullopt;
                }
            } else if (hp.b > 0.0) {
                double cut = (hp.c - hp.a * x) / hp.b;
                if (cut < band.hi) {
                    band.hi = cut;
                    band.hi_synthetic = false;
                }
            } else {
                double cut = (hp.c - hp.a * x) / hp.b;
                if (cut > band.lo) {
                    band.lo = cut;
                    band.lo_synthetic = false;
                }
            }
        }
        if (band.lo > band.hi) return std::nullopt;
        return band;
    };

    int total_evals = 0;
    double best_y_for_x = 0.0;  // reported alongside the outer argmax
    auto profiled = [&](double x) -> double {
        auto iv = y_interval(x);
        if (!iv) return kNegInf;
        GridResult inner = shrink_grid_max(
            [&](double y) { return f(x, y); }, iv->lo, iv->hi, tol * 0.1);
        total_evals += inner.evals;
        best_y_for_x = inner.x;
        // An optimum pressed against a cap that no constraint produced means
        // the objective keeps improving toward infinite y; the magnitude of
        // the cap would otherwise swamp the x-resolution in rounding and
        // return an arbitrary point.
        if (std::isfinite(inner.value)) {
            double margin = 1e-6 * (1.0 + std::fabs(kLimit));
            if ((iv->hi_synthetic && inner.x > iv->hi - margin) ||
                (iv->lo_synthetic && inner.x < iv->lo + margin)) {
                throw std::runtime_error(
                    "maximize_concave_2d_constrained: objective appears "
                    "unbounded in y over the feasible set");
            }
        }
        return inner.value;
    };

    double x0 = init.empty() ? 0.0 : init[0];
    x0 = std::clamp(x0, x_min, x_max);
    double half = 1.0;
    double xlo = x_min, xhi = x_max;
    constexpr int kCoarse = 33;
    // Expand a window around the initial point until the coarse argmax is
    // interior (or an explicit bound is hit); runaway growth means the
    // objective increases without bound along the cone.
    for (int attempt = 0;; ++attempt) {
        xlo = std::max(x_min, x0 - half);
        xhi = std::min(x_max, x0 + half);
        double st = (xhi - xlo) / (kCoarse - 1);
        double best_v = kNegInf;
        int best_i = 0;
        for (int i = 0; i < kCoarse; ++i) {
            double v = profiled(xlo + st * i);
            if (v > best_v) {
                best_v = v;
                best_i = i;
            }
        }
        bool want_left = best_i == 0 && xlo > x_min + 1e-12;
        bool want_right = best_i == kCoarse - 1 && xhi < x_max - 1e-12;
        if (std::isfinite(best_v) && !want_left && !want_right) {
            xlo = xlo + st * std::max(0, best_i - 1);
            xhi = std::min(xhi, xlo + 2.0 * st);
            break;
        }
        half *= 8.0;
        if (half > 1e13 || attempt > 60) {
            throw std::runtime_error(
                "maximize_concave_2d_constrained: objective appears unbounded "
                "over the feasible set");
        }
    }

    GridResult outer = shrink_grid_max(profiled, xlo, xhi, tol);
    double x_star = outer.x;
    double v_star = profiled(x_star);  // refresh best_y_for_x
    SolveReport report;
    report.argmax = {x_star, best_y_for_x};
    report.value = v_star;
    report.iterations = total_evals;
    report.tolerance_met = outer.tolerance_met;
    return report;
}

SolveReport grid_oracle_1d(const std::function<double(double)>& f,
                           Interval1D domain, int points) {
    if (points < 2 || !(domain.hi >= domain.lo)) {
        throw std::invalid_argument("grid_oracle_1d: bad domain or points");
    }
    SolveReport report;
    report.value = kNegInf;
    double step = (domain.hi - domain.lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        double x = domain.lo + step * i;
        double v = f(x);
        if (v > report.value) {
            report.value = v;
            report.argmax = {x};
        }
    }
    report.iterations = points;
    report.tolerance_met = true;
    return report;
}

SolveReport grid_oracle_2d(const std::function<double(double, double)>& f,
                           Interval1D xdom, Interval1D ydom, int points) {
    if (points < 2 || !(xdom.hi >= xdom.lo) || !(ydom.hi >= ydom.lo)) {
        throw std::invalid_argument("grid_oracle_2d: bad domain or points");
    }
    SolveReport report;
    report.value = kNegInf;
    double xstep = (xdom.hi - xdom.lo) / (points - 1);
    double ystep = (ydom.hi - ydom.lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        for (int j = 0; j < points; ++j) {
            double x = xdom.lo + xstep * i;
            double y = ydom.lo + ystep * j;
            double v = f(x, y);
            if (v > report.value) {
                report.value = v;
                report.argmax = {x, y};
            }
        }
    }
    report.iterations = points * points;
    report.tolerance_met = true;
    return report;
}

std::optional<double> primal_profile_oracle(const Dataset& ds, double v,
                                            double tol, int max_iters) {
    if (ds.items.empty()) return std::nullopt;
    auto atoms = compress(ds);
    const auto& rg = ds.range;
    // Support: sample atoms plus the four weight-range corner atoms; corners
    // carry no likelihood term, they only absorb constraint slack.
    struct Slot {
        double w, wr, count;  // count == 0 marks a corner (barrier mass)
    };
    std::vector<Slot> slots;
    for (const auto& a : atoms) {
        slots.push_back({a.w, a.w * a.r, a.count});
    }
    for (double w : {rg.w_min, rg.w_max}) {
        for (double r : {0.0, 1.0}) {
            slots.push_back({w, w * r, 0.0});
        }
    }
    const size_t n = slots.size();
    const double total = atom_count(atoms);

    // Equality rows: total mass 1, mean weight 1, value moment v.  Variables
    // are per-datum masses, so sample columns carry their multiplicity.
    auto coeff = [&](size_t j, int row) {
        double mult = slots[j].count > 0.0 ? slots[j].count : 1.0;
        if (row == 0) return mult;
        if (row == 1) return mult * slots[j].w;
        return mult * slots[j].wr;
    };
    const std::vector<double> b = {1.0, 1.0, v};

    std::vector<double> z(n, 1.0 / static_cast<double>(n));
    std::vector<double> nu(3, 0.0);

    auto residuals = [&](const std::vector<double>& zz,
                         const std::vector<double>& nunu, double mu,
                         std::vector<double>& rd, std::vector<double>& rp) {
        rd.assign(n, 0.0);
        rp.assign(3, 0.0);
        for (size_t j = 0; j < n; ++j) {
            double grad = slots[j].count > 0.0 ? slots[j].count / zz[j]
                                               : mu / zz[j];
            rd[j] = -grad;
            for (int row = 0; row < 3; ++row) {
                rd[j] += coeff(j, row) * nunu[row];
            }
        }
        for (int row = 0; row < 3; ++row) {
            double acc = -b[row];
            for (size_t j = 0; j < n; ++j) acc += coeff(j, row) * zz[j];
            rp[row] = acc;
        }
    };
    auto norm_inf = [](const std::vector<double>& a) {
        double m = 0.0;
        for (double x : a) m = std::max(m, std::fabs(x));
        return m;
    };

    bool converged_primal = false;
    for (double mu : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
        std::vector<double> rd, rp;
        int stage_cap = std::min(max_iters, 400);
        double best_r = std::numeric_limits<double>::infinity();
        std::vector<double> best_z = z, best_nu = nu;
        for (int it = 0; it < stage_cap; ++it) {
            residuals(z, nu, mu, rd, rp);
            double rp_norm = norm_inf(rp);
            double rd_norm = norm_inf(rd);
            double r_cur = std::max(rp_norm, rd_norm);
            if (r_cur < best_r) {
                best_r = r_cur;
                best_z = z;
                best_nu = nu;
            } else if (r_cur > 1e8 * (1.0 + best_r)) {
                break;  // diverging tail; the stage best is restored below
            }
            if (rp_norm < 1e-12 && rd_norm < 1e-8 * (1.0 + total)) {
                converged_primal = true;
                break;
            }
            // Newton step through the Schur complement A H^{-1} A^T.
            std::vector<double> hinv(n);
            for (size_t j = 0; j < n; ++j) {
                double hj = (slots[j].count > 0.0 ? slots[j].count : mu) /
                            (z[j] * z[j]);
                hinv[j] = 1.0 / hj;
            }
            std::vector<std::vector<double>> schur(3,
                                                   std::vector<double>(3, 0.0));
            std::vector<double> rhs(3, 0.0);
            for (int row = 0; row < 3; ++row) {
                for (int col = 0; col < 3; ++col) {
                    double acc = 0.0;
                    for (size_t j = 0; j < n; ++j) {
                        acc += coeff(j, row) * hinv[j] * coeff(j, col);
                    }
                    schur[row][col] = acc;
                }
                double acc = rp[row];
                for (size_t j = 0; j < n; ++j) {
                    acc += coeff(j, row) * hinv[j] * (-rd[j]);
                }
                rhs[row] = acc;
            }
            std::vector<double> dnu;
            try {
                dnu = solve_small(schur, rhs);
            } catch (const std::runtime_error&) {
                // A boundary-feasible v drains corner masses until the Schur
                // system degenerates; the iterate is already near-optimal by
                // then, so leave the stage and let the final residual check
                // make the feasibility call.
                break;
            }
            std::vector<double> dz(n, 0.0);
            for (size_t j = 0; j < n; ++j) {
                double aT_dnu = 0.0;
                for (int row = 0; row < 3; ++row) {
                    aT_dnu += coeff(j, row) * dnu[row];
                }
                dz[j] = hinv[j] * (-rd[j] - aT_dnu);
            }
            // Fraction-to-boundary step, taken unconditionally: demanding a
            // monotone residual decrease makes the iteration crawl whenever a
            // corner mass drains to zero (the Newton direction repeatedly
            // points at the boundary), while the plain damped step converges
            // quadratically there.  The stage-best bookkeeping above guards
            // the rare nonmonotone excursion.
            double t = 1.0;
            for (size_t j = 0; j < n; ++j) {
                if (dz[j] < 0.0) {
                    t = std::min(t, -0.995 * z[j] / dz[j]);
                }
            }
            for (size_t j = 0; j < n; ++j) z[j] += t * dz[j];
            for (int row = 0; row < 3; ++row) nu[row] += t * dnu[row];
        }
        {
            residuals(z, nu, mu, rd, rp);
            if (std::max(norm_inf(rp), norm_inf(rd)) > best_r) {
                z = best_z;
                nu = best_nu;
            }
        }
    }
    // Judge feasibility only once the barrier is essentially off: a boundary
    // value of v forces some corner mass to exactly zero, so early stages sit
    // a barrier-scale distance from the constraint set even though the
    // residual vanishes as mu does.
    {
        std::vector<double> rd, rp;
        residuals(z, nu, 0.0, rd, rp);
        if (norm_inf(rp) > 1e-8) {
            return std::nullopt;  // no nonnegative point attains v
        }
    }
    (void)converged_primal;
    (void)tol;
    double objective = 0.0;
    for (size_t j = 0; j < n; ++j) {
        if (slots[j].count > 0.0) {
            objective += slots[j].count * std::log(z[j]);
        }
    }
    return objective;
}

std::vector<double> min_norm_solution(
    const std::vector<std::vector<double>>& rows_a,
    const std::vector<double>& b) {
    const size_t m = rows_a.size();
    if (m == 0 || b.size() != m) {
        throw std::invalid_argument("min_norm_solution: shape mismatch");
    }
    const size_t n = rows_a.front().size();
    for (const auto& row : rows_a) {
        if (row.size() != n) {
            throw std::invalid_argument("min_norm_solution: ragged rows");
        }
    }
    std::vector<std::vector<double>> gram(m, std::vector<double>(m, 0.0));
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < n; ++k) acc += rows_a[i][k] * rows_a[j][k];
            gram[i][j] = acc;
        }
    }
    std::vector<double> y = solve_small(gram, b);
    std::vector<double> x(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (size_t i = 0; i < m; ++i) acc += rows_a[i][k] * y[i];
        x[k] = acc;
    }
    return x;
}

}  // namespace elcb
