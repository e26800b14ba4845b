#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "osci/location_ci.hpp"

using Catch::Approx;
using namespace osci;

namespace {

const SymmetricDensity normal_d = make_builtin(Family::normal);
const SymmetricDensity laplace_d = make_builtin(Family::laplace);
const SymmetricDensity uniform_d = make_builtin(Family::uniform);
const SymmetricDensity triangular_d = make_builtin(Family::triangular);
const SymmetricDensity cauchy_d = make_builtin(Family::cauchy);

}  // namespace

TEST_CASE("beta: degenerate offset, symmetry, domain", "[location]") {
    CHECK(beta(0.0, 5.0, normal_d) == 0.0);
    CHECK(beta(1.3, 5.0, normal_d) == Approx(beta(-1.3, 5.0, normal_d)).margin(1e-15));
    // the often-quoted offset 1.0796 is not the maximizer; its miss rate is
    // 0.09556, strictly below the supremum 0.09679 attained at 0.96654
    CHECK(beta(1.0796, 5.0, normal_d) == Approx(0.095560623565502169).margin(1e-12));
    CHECK(beta(1.0796, 5.0, normal_d) < beta(0.96653588090727944, 5.0, normal_d));
    CHECK_THROWS_AS(beta(1.0, 1.0, normal_d), std::domain_error);
    CHECK_THROWS_AS(beta(1.0, 0.5, normal_d), std::domain_error);
}

TEST_CASE("beta: cdf evaluation agrees with direct quadrature", "[location]") {
    for (const auto* d : {&normal_d, &laplace_d, &cauchy_d}) {
        for (const double alpha : {0.3, 0.9665, 2.0}) {
            for (const double t : {2.0, 5.0}) {
                const double lo = alpha * t / (t + 1.0);
                const double hi = alpha * t / (t - 1.0);
                const double direct = integrate([&](double y) { return d->pdf(y); }, lo, hi);
                CHECK(beta(alpha, t, *d) == Approx(direct).margin(1e-8));
            }
        }
    }
}

TEST_CASE("beta: symmetry and range across a grid", "[location]") {
    for (const auto* d : {&normal_d, &laplace_d, &uniform_d, &triangular_d, &cauchy_d}) {
        for (int i = 0; i <= 60; ++i) {
            const double alpha = -3.0 + 0.1 * i;
            const double b = beta(alpha, 5.0, *d);
            CHECK(b >= 0.0);
            CHECK(b <= 1.0);
            CHECK(b == Approx(beta(-alpha, 5.0, *d)).margin(1e-8));
        }
    }
}

// The published t=5 worst case (alpha* = 1.0796, beta* = .1) fails its own
// stationarity equation; the displayed closed form yields 0.9665358809 /
// 0.0967900463, which three independent routes below agree on.
TEST_CASE("alpha_star_normal: closed form vs frozen values", "[location]") {
    CHECK(alpha_star_normal(2.0) == Approx(0.78611030547615371).margin(1e-12));
    CHECK(alpha_star_normal(3.0) == Approx(0.90637065792783014).margin(1e-12));
    CHECK(alpha_star_normal(5.0) == Approx(0.96653588090727944).margin(1e-12));
    CHECK(alpha_star_normal(10.0) == Approx(0.99165858192841362).margin(1e-12));
    CHECK_THROWS_AS(alpha_star_normal(1.0), std::domain_error);
}

TEST_CASE("alpha_star_normal matches the numeric argmax of beta", "[location]") {
    for (const double t : {2.0, 3.0, 5.0, 10.0}) {
        const auto m = maximize_scalar(
            [&](double a) { return beta(a, t, normal_d); }, 0.0, 9.0, {});
        CHECK(alpha_star_normal(t) == Approx(m.x_max).margin(1e-5));
    }
}

TEST_CASE("beta_star: normal closed form and generic search agree", "[location]") {
    const auto closed = beta_star(5.0, normal_d);
    CHECK(closed.beta_star == Approx(0.096790046321509492).margin(1e-12));
    CHECK(closed.alpha_star == Approx(0.96653588090727944).margin(1e-12));
    const auto generic = beta_star_generic(5.0, normal_d);
    CHECK(generic.beta_star == Approx(closed.beta_star).margin(1e-6));
    CHECK(generic.alpha_star == Approx(closed.alpha_star).margin(1e-4));
}

TEST_CASE("beta_star: laplace t=9 has closed-form value 0.04096", "[location]") {
    // 0.5 (r^((t-1)/2) - r^((t+1)/2)) with r = (t-1)/(t+1) = 0.8: 0.5(0.8^4 - 0.8^5)
    const auto bs = beta_star(9.0, laplace_d);
    CHECK(bs.beta_star == Approx(0.04096).margin(1e-6));
    CHECK(bs.beta_star > 0.0);
    CHECK(bs.beta_star <= robbins_bound(9.0));
}

TEST_CASE("beta_star: heavy tails still find the O(1) hump", "[location]") {
    // cauchy: sup_alpha (atan(1.125a) - atan(0.9a))/pi = 0.0354403 near a ~ 1
    const auto bs = beta_star(9.0, cauchy_d);
    CHECK(bs.beta_star == Approx(0.0354403).margin(2e-4));
    CHECK(bs.alpha_star > 0.5);
    CHECK(bs.alpha_star < 2.0);
}

TEST_CASE("Robbins domination: beta* <= 1/(1+t) for the unimodal class", "[location]") {
    for (const auto* d : {&normal_d, &laplace_d, &uniform_d, &triangular_d, &cauchy_d}) {
        for (const double t : {2.0, 5.0, 9.0, 19.0}) {
            INFO(d->name << " t=" << t);
            CHECK(beta_star(t, *d).beta_star <= robbins_bound(t) + 1e-6);
        }
    }
}

TEST_CASE("beta* is non-increasing in t (normal, laplace)", "[location]") {
    for (const auto* d : {&normal_d, &laplace_d}) {
        double prev = beta_star(1.5, *d).beta_star;
        for (const double t : {2.0, 3.0, 5.0, 9.0, 19.0, 50.0}) {
            const double cur = beta_star(t, *d).beta_star;
            CHECK(cur <= prev + 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("robbins_bound values", "[location]") {
    CHECK(robbins_bound(9.0) == Approx(0.1).margin(1e-15));
    CHECK(robbins_bound(99.0) == Approx(0.01).margin(1e-15));
    CHECK(robbins_bound(1.0 + 1e-9) == Approx(0.5).margin(1e-9));
    CHECK_THROWS_AS(robbins_bound(1.0), std::domain_error);
}

TEST_CASE("solve_t_nonparametric", "[location]") {
    CHECK(solve_t_nonparametric(0.9) == Approx(9.0).margin(1e-12));
    CHECK(solve_t_nonparametric(0.95) == Approx(19.0).margin(1e-12));
    CHECK_THROWS_AS(solve_t_nonparametric(0.5), std::domain_error);
    CHECK_THROWS_AS(solve_t_nonparametric(1.0), std::domain_error);
}

TEST_CASE("solve_t_parametric: self-consistency and frozen root", "[location]") {
    // smallest t with beta*(t) <= 0.1 for the normal: 4.8395146995 (not 5; the
    // published beta*(5)=.1 rounds 0.09679 up)
    const double t90 = solve_t_parametric(0.90, normal_d);
    CHECK(t90 == Approx(4.8395146995038809).margin(1e-5));
    CHECK(beta_star(t90, normal_d).beta_star <= 0.1);
    CHECK(beta_star(t90, normal_d).beta_star >= 0.0999);

    const double t50 = solve_t_parametric(0.50, normal_d);
    CHECK(t50 < 5.0);

    const double t95 = solve_t_parametric(0.95, normal_d);
    CHECK(t95 == Approx(9.6788413018956257).margin(1e-5));
    CHECK(beta_star(t95, normal_d).beta_star <= 0.05);
    CHECK(beta_star(t95, normal_d).beta_star >= 0.0499);

    CHECK_THROWS_AS(solve_t_parametric(1.5, normal_d), std::domain_error);
}

TEST_CASE("mean_value_l: constant density, monotonicity, pdf bound", "[location]") {
    CHECK(mean_value_l(0.0, 0.8, uniform_d) == Approx(0.5).margin(1e-12));
    CHECK(mean_value_l(0.3, 1.0, uniform_d) == Approx(0.5).margin(1e-12));

    for (const double b : {1.0, 3.0}) {
        double prev = mean_value_l(0.0, b, normal_d);
        for (int i = 1; i < 50; ++i) {
            const double x = b * static_cast<double>(i) / 50.0;
            const double cur = mean_value_l(x, b, normal_d);
            CHECK(cur <= prev + 1e-12);
            CHECK(cur <= normal_d.pdf(x) + 1e-12);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(mean_value_l(1.0, 1.0, normal_d), std::domain_error);
    CHECK_THROWS_AS(mean_value_l(2.0, 1.0, normal_d), std::domain_error);
}

TEST_CASE("mean_value_l agrees with direct quadrature", "[location]") {
    for (const double x : {0.1, 0.5, 1.4}) {
        const double direct =
            integrate([&](double y) { return normal_d.pdf(y); }, x, 3.0) / (3.0 - x);
        CHECK(mean_value_l(x, 3.0, normal_d) == Approx(direct).margin(1e-9));
    }
}

TEST_CASE("location_interval: parametric and nonparametric examples", "[location]") {
    const auto par = location_interval(1.0, 0.0, 5.0, LocationMethod::parametric, &normal_d);
    CHECK(par.lo == Approx(-4.0).margin(1e-12));
    CHECK(par.hi == Approx(6.0).margin(1e-12));
    CHECK(par.length == Approx(10.0).margin(1e-12));
    CHECK(par.confidence_bound >= 0.90);
    CHECK(par.confidence_bound == Approx(1.0 - 0.096790046321509492).margin(1e-9));

    const auto rob = location_interval(1.0, 0.0, 9.0, LocationMethod::nonparametric);
    CHECK(rob.lo == Approx(-8.0).margin(1e-12));
    CHECK(rob.hi == Approx(10.0).margin(1e-12));
    CHECK(rob.confidence_bound == Approx(0.9).margin(1e-12));

    const auto degenerate = location_interval(2.5, 2.5, 9.0, LocationMethod::nonparametric);
    CHECK(degenerate.lo == 2.5);
    CHECK(degenerate.hi == 2.5);
    CHECK(degenerate.length == 0.0);

    CHECK_THROWS_AS(location_interval(1.0, 0.0, 0.5, LocationMethod::nonparametric),
                    std::domain_error);
    CHECK_THROWS_AS(location_interval(1.0, 0.0, 5.0, LocationMethod::parametric, nullptr),
                    std::invalid_argument);
}

TEST_CASE("location_interval arithmetic identities", "[location]") {
    for (const double x : {-2.0, 0.25, 7.5}) {
        for (const double a : {-1.0, 0.0, 3.0}) {
            for (const double t : {2.0, 9.0}) {
                const auto iv = location_interval(x, a, t, LocationMethod::nonparametric);
                CHECK(iv.lo + iv.hi == Approx(2.0 * x).epsilon(1e-12));
                CHECK(iv.hi - iv.lo ==
                      Approx(2.0 * t * std::abs(x - a)).epsilon(1e-12).margin(1e-12));
                CHECK(iv.lo <= x);
                CHECK(x <= iv.hi);
            }
        }
    }
}

TEST_CASE("expected_length: normal value, argmin at mu, cauchy diverges", "[location]") {
    const LocationScaleModel m(normal_d, 0.0, 1.0);
    const auto len = expected_length(5.0, 0.0, m);
    REQUIRE(len.has_value());
    // 2 t E|Z| = 10 sqrt(2/pi)
    CHECK(*len == Approx(7.9788456080286536).margin(1e-4));

    // independent Monte Carlo cross-check of E|Z|
    std::mt19937_64 eng(12345);
    double acc = 0.0;
    constexpr int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
        acc += std::abs(normal_d.quantile(u));
    }
    const double mc = acc / n;
    CHECK(*len == Approx(10.0 * mc).margin(10.0 * 3.0 * 0.6 / std::sqrt(double(n))));

    const LocationScaleModel shifted(normal_d, 1.5, 2.0);
    double best_a = -10.0;
    double best_len = 1e300;
    for (int i = 0; i <= 60; ++i) {
        const double a = -1.5 + 0.1 * i;
        const double v = *expected_length(5.0, a, shifted);
        if (v < best_len) {
            best_len = v;
            best_a = a;
        }
    }
    CHECK(best_a == Approx(1.5).margin(1e-9));  // grid argmin lands on mu

    const LocationScaleModel c(cauchy_d, 0.0, 1.0);
    CHECK_FALSE(expected_length(5.0, 0.0, c).has_value());
}

TEST_CASE("expected_length: laplace / uniform / triangular closed forms", "[location]") {
    // E|X| with a = mu = 0: laplace 1, uniform 1/2, triangular 1/3
    CHECK(*expected_length(2.0, 0.0, {laplace_d, 0.0, 1.0}) == Approx(4.0).margin(1e-6));
    CHECK(*expected_length(2.0, 0.0, {uniform_d, 0.0, 1.0}) == Approx(2.0).margin(1e-9));
    CHECK(*expected_length(2.0, 0.0, {triangular_d, 0.0, 1.0}) ==
          Approx(4.0 / 3.0).margin(1e-9));
}
