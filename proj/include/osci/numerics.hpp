#pragma once

// Shared 1-D numerical kernels: adaptive quadrature, bracketed root finding,
// and grid-scan + golden-section maximization. Everything here is a pure
// function of its inputs with a fixed evaluation order, so results are
// bit-reproducible across runs and thread counts.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace osci {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_depth = 60;
};

struct RootSpec {
    double x_tol = 1e-9;
    double f_tol = 1e-12;
    int max_iter = 200;
};

struct OptSpec {
    double x_tol = 1e-9;
    double f_tol = 1e-12;
    int max_iter = 200;
    int grid_points = 512;
};

/// Thrown when an iterative kernel runs out of budget. Carries the best
/// estimate reached and a bound on its error so callers can still inspect it.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
    double estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

namespace detail {

template <typename F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double eps, int depth, int max_depth,
                            double& defect) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Richardson: S2 + delta/15 is the next-order estimate.
    if (std::abs(delta) <= 15.0 * eps || (b - a) < 1e-308) {
        return left + right + delta / 15.0;
    }
    if (depth >= max_depth) {
        defect += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1, max_depth, defect)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1, max_depth, defect);
}

inline constexpr double golden_ratio_section = 0.381966011250105151;  // 2 - phi

// Golden-section search for a maximum of h on [a, b]. Returns the refined
// abscissa; the caller compares values itself.
template <typename F>
double golden_max(F& h, double a, double b, double x_tol, int max_iter) {
    double x1 = a + golden_ratio_section * (b - a);
    double x2 = b - golden_ratio_section * (b - a);
    double f1 = h(x1);
    double f2 = h(x2);
    for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - golden_ratio_section * (b - a);
            f2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + golden_ratio_section * (b - a);
            f1 = h(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over the finite interval [lo, hi].
/// Accuracy target: abs_tol + rel_tol * |I|. lo == hi returns exactly 0.
/// Callers clamp infinite limits to the density's tail_cut before calling.
template <typename F>
double integrate(F&& f, double lo, double hi, QuadratureSpec spec = {}) {
    if (!(std::isfinite(lo) && std::isfinite(hi))) {
        throw std::invalid_argument("integrate: limits must be finite");
    }
    if (lo > hi) throw std::invalid_argument("integrate: lo > hi");
    if (lo == hi) return 0.0;

    const double fa = f(lo);
    const double m = 0.5 * (lo + hi);
    const double fm = f(m);
    const double fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = std::max(spec.abs_tol, spec.rel_tol * std::abs(whole));
    double defect = 0.0;
    const double result = detail::adaptive_simpson_rec(f, lo, hi, fa, fm, fb, whole, eps, 0,
                                                       spec.max_depth, defect);
    if (defect > std::max(spec.abs_tol, spec.rel_tol * std::abs(result))) {
        throw NonConvergence("integrate: max_depth exceeded before reaching tolerance",
                             result, defect);
    }
    return result;
}

/// Brent root finder on a sign-changing bracket [lo, hi]. Never leaves the
/// bracket; stops when |g| <= f_tol or the bracket width reaches x_tol.
template <typename F>
double find_root(F&& g, double lo, double hi, RootSpec spec = {}) {
    double a = lo, b = hi;
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        throw std::domain_error("find_root: no sign change on bracket");
    }
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < spec.max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b)
                          + 0.5 * spec.x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= spec.f_tol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {  // secant
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {  // inverse quadratic
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = g(b);
    }
    return b;
}

struct ScalarMax {
    double x_max = 0.0;
    double h_max = 0.0;
};

/// Maximize h on [lo, hi]: equispaced grid pre-scan (spec.grid_points points,
/// endpoints included), then golden-section refinement around the best grid
/// point. The returned h_max dominates every grid sample.
template <typename F>
ScalarMax maximize_scalar(F&& h, double lo, double hi, OptSpec spec = {}) {
    if (!(lo < hi)) throw std::invalid_argument("maximize_scalar: need lo < hi");
    const int n = std::max(spec.grid_points, 3);
    double best_x = lo, best_h = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        const double v = h(x);
        if (v > best_h) {
            best_h = v;
            best_x = x;
            best_i = i;
        }
    }
    const double a = lo + (hi - lo) * static_cast<double>(std::max(best_i - 1, 0)) / (n - 1);
    const double b = lo + (hi - lo) * static_cast<double>(std::min(best_i + 1, n - 1)) / (n - 1);
    const double xr = detail::golden_max(h, a, b, spec.x_tol, spec.max_iter);
    const double hr = h(xr);
    if (hr >= best_h) return {xr, hr};
    return {best_x, best_h};
}

}  // namespace osci
