#pragma once

// Symmetric-about-zero standard densities: pdf/cdf/quantile/pdf' plus the
// metadata the interval constructions need (unimodality claim, first-moment
// flag, effective support cut). All objects are immutable after construction
// and safe for concurrent reads.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "osci/numerics.hpp"

namespace osci {

enum class Family { normal, laplace, uniform, student_t, cauchy, triangular, custom };

namespace detail {

inline constexpr double inv_sqrt_2pi = 0.39894228040143268;

inline double normal_pdf(double y) { return inv_sqrt_2pi * std::exp(-0.5 * y * y); }

inline double normal_cdf(double y) { return 0.5 * std::erfc(-y * std::numbers::sqrt2 / 2.0); }

// Acklam's rational approximation for the standard normal quantile,
// polished with one Halley step against erfc. Absolute cdf error of the
// result is ~1e-15 over (1e-300, 1-1e-16).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    }
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
          / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
          / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
           / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double dens = normal_pdf(x);
    if (dens > 1e-300) {
        const double err = normal_cdf(x) - p;
        const double u = err / dens;
        x -= u / (1.0 + 0.5 * x * u);  // Halley
    }
    return x;
}

// Continued-fraction core of the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
    constexpr int max_it = 300;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double fpmin = std::numeric_limits<double>::min() / eps;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double cc = 1.0;
    double dd = 1.0 - qab * x / qap;
    if (std::abs(dd) < fpmin) dd = fpmin;
    dd = 1.0 / dd;
    double h = dd;
    for (int m = 1; m <= max_it; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        dd = 1.0 + aa * dd;
        if (std::abs(dd) < fpmin) dd = fpmin;
        cc = 1.0 + aa / cc;
        if (std::abs(cc) < fpmin) cc = fpmin;
        dd = 1.0 / dd;
        h *= dd * cc;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        dd = 1.0 + aa * dd;
        if (std::abs(dd) < fpmin) dd = fpmin;
        cc = 1.0 + aa / cc;
        if (std::abs(cc) < fpmin) cc = fpmin;
        dd = 1.0 / dd;
        const double del = dd * cc;
        h *= del;
        if (std::abs(del - 1.0) <= eps) return h;
    }
    throw NonConvergence("betacf: continued fraction did not converge", h, std::abs(h));
}

/// Regularized incomplete beta I_x(a, b).
inline double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                       + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double y, double df) {
    const double x = df / (df + y * y);
    const double half_tail = 0.5 * ibeta(0.5 * df, 0.5, x);
    return y >= 0.0 ? 1.0 - half_tail : half_tail;
}

}  // namespace detail

/// A density symmetric about zero in standard form. `tail_cut` is a positive
/// T with cdf(-T) < 1e-12 and 1-cdf(T) < 1e-12; quadratures over the density
/// clamp infinite limits to [-T, T]. `pdf_derivative` may be empty; use
/// pdf_derivative_value() which falls back to central differences.
struct SymmetricDensity {
    std::string name;
    Family family = Family::custom;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
    std::function<double(double)> pdf_derivative;
    bool is_unimodal = false;
    bool has_first_moment = true;
    double tail_cut = 0.0;
};

inline double pdf_derivative_value(const SymmetricDensity& d, double y) {
    if (d.pdf_derivative) return d.pdf_derivative(y);
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(y));
    return (d.pdf(y + h) - d.pdf(y - h)) / (2.0 * h);
}

/// Location-scale model X ~ (1/sigma) f((x-mu)/sigma).
struct LocationScaleModel {
    SymmetricDensity density;
    double mu = 0.0;
    double sigma = 1.0;

    LocationScaleModel(SymmetricDensity d, double location, double scale)
        : density(std::move(d)), mu(location), sigma(scale) {
        if (!(sigma > 0.0)) throw std::invalid_argument("LocationScaleModel: sigma must be > 0");
    }
};

/// Standardized observation y = (x-mu)/sigma and offset alpha = (a-mu)/sigma.
inline std::pair<double, double> standardize(const LocationScaleModel& m, double x, double a) {
    return {(x - m.mu) / m.sigma, (a - m.mu) / m.sigma};
}

namespace detail {

// Total mass of a (possibly heavy-tailed) density over [-T, T], integrated
// over geometrically growing panels so the adaptive rule cannot mistake a
// spike-at-origin integrand for zero on a huge interval.
template <typename F>
double integrate_panels(F&& f, double lo, double hi, QuadratureSpec spec = {1e-12, 1e-10, 60}) {
    if (lo >= hi) return 0.0;
    std::vector<double> cuts;
    cuts.push_back(lo);
    if (lo < 0.0 && hi > 0.0) {
        for (double c = -1.0; c > lo; c *= 2.0) cuts.push_back(c);
        cuts.push_back(0.0);
        for (double c = 1.0; c < hi; c *= 2.0) cuts.push_back(c);
    } else {
        const double base = std::max(1.0, std::abs(lo));
        for (double c = (lo >= 0.0 ? base : -base); c > lo && c < hi; c *= 2.0) {
            if (c > lo) cuts.push_back(c);
        }
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += integrate(f, cuts[i], cuts[i + 1], spec);
    }
    return total;
}

inline double density_mass(const SymmetricDensity& d) {
    return integrate_panels([&](double y) { return d.pdf(y); }, -d.tail_cut, d.tail_cut);
}

}  // namespace detail

/// Builds one of the built-in standard families. `param` is the Student t
/// degrees of freedom (>= 1) and is ignored by the other families.
inline SymmetricDensity make_builtin(Family family, double param = 0.0) {
    SymmetricDensity d;
    d.family = family;
    d.is_unimodal = true;
    d.has_first_moment = true;
    switch (family) {
        case Family::normal: {
            d.name = "normal";
            d.pdf = [](double y) { return detail::normal_pdf(y); };
            d.cdf = [](double y) { return detail::normal_cdf(y); };
            d.quantile = [](double p) { return detail::normal_quantile(p); };
            d.pdf_derivative = [](double y) { return -y * detail::normal_pdf(y); };
            d.tail_cut = 9.0;
            break;
        }
        case Family::laplace: {
            d.name = "laplace";
            d.pdf = [](double y) { return 0.5 * std::exp(-std::abs(y)); };
            d.cdf = [](double y) {
                return y < 0.0 ? 0.5 * std::exp(y) : 1.0 - 0.5 * std::exp(-y);
            };
            d.quantile = [](double p) {
                if (!(p > 0.0 && p < 1.0)) throw std::domain_error("laplace quantile: p in (0,1)");
                return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
            };
            // right-hand limit at the kink y = 0
            d.pdf_derivative = [](double y) {
                return y >= 0.0 ? -0.5 * std::exp(-y) : 0.5 * std::exp(y);
            };
            d.tail_cut = 30.0;
            break;
        }
        case Family::uniform: {
            d.name = "uniform";
            d.pdf = [](double y) { return std::abs(y) <= 1.0 ? 0.5 : 0.0; };
            d.cdf = [](double y) { return std::clamp(0.5 * (y + 1.0), 0.0, 1.0); };
            d.quantile = [](double p) {
                if (!(p > 0.0 && p < 1.0)) throw std::domain_error("uniform quantile: p in (0,1)");
                return 2.0 * p - 1.0;
            };
            d.pdf_derivative = [](double) { return 0.0; };
            d.tail_cut = 1.0;
            break;
        }
        case Family::triangular: {
            d.name = "triangular";
            d.pdf = [](double y) { return std::abs(y) < 1.0 ? 1.0 - std::abs(y) : 0.0; };
            d.cdf = [](double y) {
                if (y <= -1.0) return 0.0;
                if (y >= 1.0) return 1.0;
                return y < 0.0 ? 0.5 * (1.0 + y) * (1.0 + y) : 1.0 - 0.5 * (1.0 - y) * (1.0 - y);
            };
            d.quantile = [](double p) {
                if (!(p > 0.0 && p < 1.0)) throw std::domain_error("triangular quantile: p in (0,1)");
                return p < 0.5 ? std::sqrt(2.0 * p) - 1.0 : 1.0 - std::sqrt(2.0 * (1.0 - p));
            };
            d.pdf_derivative = [](double y) {
                if (std::abs(y) >= 1.0) return 0.0;
                return y >= 0.0 ? -1.0 : 1.0;  // right-hand limit at 0
            };
            d.tail_cut = 1.0;
            break;
        }
        case Family::cauchy: {
            d.name = "cauchy";
            d.pdf = [](double y) { return 1.0 / (std::numbers::pi * (1.0 + y * y)); };
            d.cdf = [](double y) { return 0.5 + std::atan(y) / std::numbers::pi; };
            d.quantile = [](double p) {
                if (!(p > 0.0 && p < 1.0)) throw std::domain_error("cauchy quantile: p in (0,1)");
                return std::tan(std::numbers::pi * (p - 0.5));
            };
            d.pdf_derivative = [](double y) {
                const double s = 1.0 + y * y;
                return -2.0 * y / (std::numbers::pi * s * s);
            };
            d.has_first_moment = false;
            d.tail_cut = std::tan(std::numbers::pi * (0.5 - 1e-12));
            break;
        }
        case Family::student_t: {
            if (!(param >= 1.0)) {
                throw std::invalid_argument("make_builtin: student_t needs df >= 1");
            }
            const double df = param;
            char buf[48];
            std::snprintf(buf, sizeof(buf), "student_t:%g", df);
            d.name = buf;
            const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)
                                  - 0.5 * std::log(df * std::numbers::pi);
            const double norm = std::exp(log_norm);
            d.pdf = [df, norm](double y) {
                return norm * std::pow(1.0 + y * y / df, -0.5 * (df + 1.0));
            };
            d.cdf = [df](double y) { return detail::student_t_cdf(y, df); };
            d.pdf_derivative = [df, norm](double y) {
                const double f = norm * std::pow(1.0 + y * y / df, -0.5 * (df + 1.0));
                return f * (-(df + 1.0) * y / (df + y * y));
            };
            d.has_first_moment = df > 1.0;
            // effective support: solve 1 - cdf(T) = 1e-12
            d.tail_cut = find_root(
                [df](double y) { return detail::student_t_cdf(y, df) - (1.0 - 1e-12); }, 1.0,
                1e13, {1e-6, 0.0, 300});
            const double tail = d.tail_cut;
            auto cdf_fn = d.cdf;
            d.quantile = [cdf_fn, tail](double p) {
                if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t quantile: p in (0,1)");
                if (p == 0.5) return 0.0;
                // clamp to the 1e-12 support cut so extreme draws stay bracketed
                if (p <= cdf_fn(-tail)) return -tail;
                if (p >= cdf_fn(tail)) return tail;
                return find_root([&](double y) { return cdf_fn(y) - p; }, -tail, tail,
                                 {1e-12, 0.0, 300});
            };
            break;
        }
        case Family::custom:
            throw std::invalid_argument("make_builtin: custom is not a built-in family");
    }
    return d;
}

/// Parses a density name as used on the command line and in config files:
/// "normal", "laplace", "uniform", "cauchy", "triangular", "student_t:<df>".
inline SymmetricDensity make_builtin(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view head = spec.substr(0, colon);
    if (head == "normal") return make_builtin(Family::normal);
    if (head == "laplace") return make_builtin(Family::laplace);
    if (head == "uniform") return make_builtin(Family::uniform);
    if (head == "cauchy") return make_builtin(Family::cauchy);
    if (head == "triangular") return make_builtin(Family::triangular);
    if (head == "student_t") {
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("make_builtin: student_t needs a df, e.g. \"student_t:4\"");
        }
        const std::string_view tail = spec.substr(colon + 1);
        double df = 0.0;
        const auto res = std::from_chars(tail.data(), tail.data() + tail.size(), df);
        if (res.ec != std::errc{} || res.ptr != tail.data() + tail.size()) {
            throw std::invalid_argument("make_builtin: bad student_t df: " + std::string(spec));
        }
        return make_builtin(Family::student_t, df);
    }
    throw std::invalid_argument("make_builtin: unknown density name: " + std::string(spec));
}

/// Numeric audit of the class-membership claims: symmetry about zero,
/// non-increasing pdf on (0, tail_cut], and unit mass.
struct ClassMembershipReport {
    double max_symmetry_violation = 0.0;
    double max_unimodality_increase = 0.0;
    double normalization_mass = 0.0;
    bool symmetric = false;
    bool unimodal = false;
    bool normalized = false;
    bool in_class = false;  // all of the above and the density claims unimodality
};

inline ClassMembershipReport verify_class_membership(const SymmetricDensity& d, int grid_size) {
    if (grid_size < 100) throw std::invalid_argument("verify_class_membership: grid_size >= 100");
    ClassMembershipReport rep;
    const double T = d.tail_cut;
    double prev = d.pdf(T / grid_size);
    for (int i = 1; i <= grid_size; ++i) {
        const double y = T * static_cast<double>(i) / grid_size;
        const double py = d.pdf(y);
        rep.max_symmetry_violation =
            std::max(rep.max_symmetry_violation, std::abs(py - d.pdf(-y)));
        if (i > 1) {
            rep.max_unimodality_increase = std::max(rep.max_unimodality_increase, py - prev);
        }
        prev = py;
    }
    rep.normalization_mass = detail::density_mass(d);
    rep.symmetric = rep.max_symmetry_violation <= 1e-12;
    rep.unimodal = rep.max_unimodality_increase <= 1e-12;
    rep.normalized = rep.normalization_mass >= 1.0 - 1e-8 && rep.normalization_mass <= 1.0 + 1e-10;
    rep.in_class = rep.symmetric && rep.unimodal && rep.normalized && d.is_unimodal;
    return rep;
}

}  // namespace osci
