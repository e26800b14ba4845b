#pragma once

// Finite-length confidence intervals for the location parameter from a single
// observation: the interval x +- t|x-a| with either a known symmetric density
// (worst-case miscoverage beta*(t)) or the nonparametric bound 1/(1+t) over
// the class of unimodal symmetric densities.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "osci/densities.hpp"
#include "osci/numerics.hpp"

namespace osci {

enum class LocationMethod { parametric, nonparametric };

/// The interval x +- t|x-a| plus its construction parameters and the
/// guaranteed confidence bound (1 - beta*(t) or 1 - 1/(1+t)).
struct LocationInterval {
    double center_x = 0.0;
    double guess_a = 0.0;
    double t = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double length = 0.0;
    double confidence_bound = 0.0;
    LocationMethod method = LocationMethod::nonparametric;
    std::string density_name;  // empty for nonparametric
};

/// Miscoverage probability of x +- t|x-a| at standardized offset
/// alpha = (a-mu)/sigma: the mass of f between alpha*t/(t+1) and
/// alpha*t/(t-1) (the cdf is that integral of the pdf).
inline double beta(double alpha, double t, const SymmetricDensity& f) {
    if (!(t > 1.0)) throw std::domain_error("beta: t must exceed 1");
    const double lo_lim = alpha * t / (t + 1.0);
    const double hi_lim = alpha * t / (t - 1.0);
    const double v = std::abs(f.cdf(hi_lim) - f.cdf(lo_lim));
    return std::clamp(v, 0.0, 1.0);
}

/// Stationary offset of beta(., t) for the standard normal:
/// ((t^2-1)/t) * sqrt(log((t+1)/(t-1)) / (2t)).
inline double alpha_star_normal(double t) {
    if (!(t > 1.0)) throw std::domain_error("alpha_star_normal: t must exceed 1");
    return ((t * t - 1.0) / t) * std::sqrt(std::log((t + 1.0) / (t - 1.0)) / (2.0 * t));
}

struct BetaStar {
    double beta_star = 0.0;
    double alpha_star = 0.0;
};

namespace detail {

// Generic worst-offset search. beta(-alpha) = beta(alpha), so scan alpha > 0
// only. The window (0, (t+1)/t * tail_cut] is where beta can exceed 1e-12;
// for heavy tails that window is enormous while the hump sits at alpha = O(1),
// so scan a dense linear grid over the central quantile range plus a
// log-spaced grid out to the window edge, then golden-refine the best point.
inline BetaStar beta_star_generic(double t, const SymmetricDensity& f, const OptSpec& spec) {
    const double window = (t + 1.0) / t * f.tail_cut;
    const double central = std::min((t + 1.0) / t * f.quantile(0.999), window);
    std::vector<double> candidates;
    candidates.reserve(static_cast<std::size_t>(spec.grid_points) + 129);
    const int n = std::max(spec.grid_points, 16);
    for (int i = 1; i <= n; ++i) {
        candidates.push_back(central * static_cast<double>(i) / n);
    }
    if (window > central * 1.0001) {
        const double ratio = window / central;
        for (int i = 1; i <= 128; ++i) {
            candidates.push_back(central * std::pow(ratio, static_cast<double>(i) / 128.0));
        }
    }
    auto h = [&](double alpha) { return beta(alpha, t, f); };
    double best_a = candidates.front();
    double best_v = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double v = h(candidates[i]);
        if (v > best_v) {
            best_v = v;
            best_a = candidates[i];
            best_i = i;
        }
    }
    const double lo = best_i > 0 ? candidates[best_i - 1] : 0.0;
    const double hi = best_i + 1 < candidates.size() ? candidates[best_i + 1] : window;
    const double xr = detail::golden_max(h, lo, hi, spec.x_tol, spec.max_iter);
    const double vr = h(xr);
    if (vr >= best_v) return {vr, xr};
    return {best_v, best_a};
}

}  // namespace detail

/// Worst-case miscoverage beta*(t) = sup_alpha beta(alpha, t) and its argmax.
/// The normal family uses the closed-form stationary point; other densities
/// use the generic grid + golden-section search (best refined point, no
/// global-optimality claim for exotic shapes).
inline BetaStar beta_star(double t, const SymmetricDensity& f, OptSpec spec = {}) {
    if (!(t > 1.0)) throw std::domain_error("beta_star: t must exceed 1");
    if (f.family == Family::normal) {
        const double s = std::sqrt(std::log((t + 1.0) / (t - 1.0)) / (2.0 * t));
        const double value = detail::normal_cdf((t + 1.0) * s) - detail::normal_cdf((t - 1.0) * s);
        return {value, alpha_star_normal(t)};
    }
    return detail::beta_star_generic(t, f, spec);
}

/// Generic search path regardless of family; cross-check oracle for the
/// normal closed form.
inline BetaStar beta_star_generic(double t, const SymmetricDensity& f, OptSpec spec = {}) {
    if (!(t > 1.0)) throw std::domain_error("beta_star_generic: t must exceed 1");
    return detail::beta_star_generic(t, f, spec);
}

/// Robbins bound: miscoverage <= 1/(1+t) for every unimodal symmetric f.
inline double robbins_bound(double t) {
    if (!(t > 1.0)) throw std::domain_error("robbins_bound: t must exceed 1");
    return 1.0 / (1.0 + t);
}

/// Smallest t with 1 - 1/(1+t) >= confidence, i.e. t = confidence/(1-confidence).
inline double solve_t_nonparametric(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::domain_error("solve_t_nonparametric: confidence must lie in (0,1)");
    }
    const double t = confidence / (1.0 - confidence);
    if (!(t > 1.0)) {
        throw std::domain_error("solve_t_nonparametric: confidence <= 0.5 needs t <= 1, "
                                "which the construction excludes");
    }
    return t;
}

/// Smallest t (within x_tol) with beta*(t) <= 1 - confidence. beta* is
/// expected to be non-increasing in t; that is checked on a coarse scan and
/// a violation downgrades to a full scan before the bisection.
inline double solve_t_parametric(double confidence, const SymmetricDensity& f,
                                 RootSpec spec = {}) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::domain_error("solve_t_parametric: confidence must lie in (0,1)");
    }
    const double target = 1.0 - confidence;
    const double t_lo = 1.0 + 1e-6;
    const double t_hi = 1e6;
    auto miss = [&](double t) { return beta_star(t, f).beta_star; };
    if (miss(t_lo) <= target) return t_lo;
    if (miss(t_hi) > target) {
        throw std::domain_error("solve_t_parametric: bound not reachable within t <= 1e6");
    }
    auto grid_t = [&](int i, int n) {
        return t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / n);
    };
    // coarse monotonicity check; a violation downgrades to a dense scan so the
    // bisection still brackets the *first* crossing
    bool monotone = true;
    constexpr int scan_n = 24;
    double prev = miss(t_lo);
    for (int i = 1; i <= scan_n; ++i) {
        const double v = miss(grid_t(i, scan_n));
        if (v > prev + 1e-9) {
            monotone = false;
            break;
        }
        prev = v;
    }
    const int n = monotone ? scan_n : 512;
    double lo_bracket = t_lo;
    double hi_bracket = t_hi;
    for (int i = 1; i <= n; ++i) {
        const double t = grid_t(i, n);
        if (miss(t) <= target) {
            hi_bracket = t;
            break;
        }
        lo_bracket = t;
    }
    double t = find_root([&](double tt) { return miss(tt) - target; }, lo_bracket, hi_bracket,
                         spec);
    // land on the feasible side of the crossing
    while (miss(t) > target && t < hi_bracket) {
        t = std::min(t + spec.x_tol * std::max(1.0, t), hi_bracket);
    }
    return t;
}

/// Mean value of the pdf on (x, b); decreasing in x for unimodal f.
inline double mean_value_l(double x, double b, const SymmetricDensity& f) {
    if (!(x >= 0.0 && x < b)) throw std::domain_error("mean_value_l: need 0 <= x < b");
    return (f.cdf(b) - f.cdf(x)) / (b - x);
}

/// Builds x +- t|x-a| with the confidence bound of the chosen method.
/// x == a yields the valid degenerate interval [x, x].
inline LocationInterval location_interval(double x, double a, double t, LocationMethod method,
                                          const SymmetricDensity* f = nullptr) {
    if (!(t > 1.0)) throw std::domain_error("location_interval: t must exceed 1");
    LocationInterval iv;
    iv.center_x = x;
    iv.guess_a = a;
    iv.t = t;
    iv.method = method;
    const double half = t * std::abs(x - a);
    iv.lo = x - half;
    iv.hi = x + half;
    iv.length = iv.hi - iv.lo;
    if (method == LocationMethod::parametric) {
        if (f == nullptr) {
            throw std::invalid_argument("location_interval: parametric method needs a density");
        }
        iv.confidence_bound = 1.0 - beta_star(t, *f).beta_star;
        iv.density_name = f->name;
    } else {
        iv.confidence_bound = 1.0 - robbins_bound(t);
    }
    return iv;
}

/// Expected interval length E(L) = 2t E|X-a|; empty when the model has no
/// first moment (cauchy, student_t with df <= 1).
inline std::optional<double> expected_length(double t, double a, const LocationScaleModel& model,
                                             QuadratureSpec spec = {}) {
    if (!(t > 1.0)) throw std::domain_error("expected_length: t must exceed 1");
    if (!model.density.has_first_moment) return std::nullopt;
    const double lo = model.mu - model.density.tail_cut * model.sigma;
    const double hi = model.mu + model.density.tail_cut * model.sigma;
    auto integrand = [&](double x) {
        return std::abs(x - a) * model.density.pdf((x - model.mu) / model.sigma) / model.sigma;
    };
    double e_abs;
    if (a > lo && a < hi) {  // split at the |x-a| kink
        e_abs = integrate(integrand, lo, a, spec) + integrate(integrand, a, hi, spec);
    } else {
        e_abs = integrate(integrand, lo, hi, spec);
    }
    return 2.0 * t * e_abs;
}

}  // namespace osci
