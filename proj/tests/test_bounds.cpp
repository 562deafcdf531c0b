#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ratelab/bounds.hpp"
#include "ratelab/rng.hpp"

using namespace ratelab;

namespace {

// Largest solution of x = a x^nu + b, located by bracketed bisection;
// independent of implicit_bound.
double largest_fixed_point(double a, double b, double nu) {
    if (a == 0.0) return b;
    const auto g = [&](double x) { return a * std::pow(x, nu) + b - x; };
    double hi = std::max({2.0 * b, std::pow(2.0 * a, 1.0 / (1.0 - nu)), 1.0});
    while (g(hi) > 0.0) hi *= 2.0;
    double lo = b > 0.0 ? 0.0 : 1e-300;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

TEST_CASE("exponent_a hand values") {
    // max{l^2/r - (1-b) l + bC, [b(1-a/2) - 1/2] l + bC}
    CHECK(exponent_a(24.0, 64.0, 4.0, 0.25, 1.0) == doctest::Approx(-8.0).epsilon(1e-13));
    CHECK(exponent_a(19.2, 64.0, 4.0, 0.4, 2.0) == doctest::Approx(-4.16).epsilon(1e-12));
    // beta -> 0+: the first branch approaches l^2/r - l <= 0 for l <= r, and
    // the evaluator is exactly the max of the two displayed branches.
    for (double l : {1.0, 8.0, 32.0, 64.0}) {
        const double beta = 1e-12, c = 1.0, alpha = 1.0, r = 64.0;
        const double first = l * l / r - (1.0 - beta) * l + beta * c;
        const double second = (beta * (1.0 - 0.5 * alpha) - 0.5) * l + beta * c;
        CHECK(first <= 1e-9);  // l^2/r - l <= 0 for l <= r
        CHECK(exponent_a(l, r, c, beta, alpha) ==
              doctest::Approx(std::max(first, second)).epsilon(1e-15));
    }
    CHECK_THROWS_AS((void)exponent_a(0.0, 4.0, 1.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)exponent_a(1.0, 4.0, 1.0, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("admissible_beta") {
    const auto i1 = admissible_beta(64.0, 4.0, 1.0);
    CHECK(!i1.empty);
    CHECK(i1.beta_max == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(i1.witness_l(0.5) == doctest::Approx(16.0).epsilon(1e-14));

    const auto boundary = admissible_beta(16.0, 4.0, 0.7);  // r = 4C
    CHECK(boundary.beta_max == doctest::Approx(0.0));
    CHECK(boundary.empty);

    const auto below = admissible_beta(15.0, 4.0, 1.0);  // r < 4C
    CHECK(below.empty);
    CHECK(!below.diagnostic.empty());

    const auto i2 = admissible_beta(100.0, 4.0, 2.0);  // alpha >= 1 branch
    CHECK(i2.beta_max == doctest::Approx(0.6).epsilon(1e-14));

    // The two branches agree at alpha = 1.
    CHECK(admissible_beta(64.0, 4.0, 1.0 - 1e-12).beta_max ==
          doctest::Approx(admissible_beta(64.0, 4.0, 1.0 + 1e-12).beta_max).epsilon(1e-9));
}

TEST_CASE("admissible-beta witness: exponent negative inside the interval") {
    Draw draw(777, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double c = 1.0 + 7.0 * draw.u01();
        const double r = 4.0 * c * (1.01 + 7.0 * draw.u01());
        const double alpha = (trial % 2 == 0) ? draw.u01_open_below() : 2.0;
        const auto interval = admissible_beta(r, c, alpha);
        REQUIRE(!interval.empty);
        const double beta = interval.beta_max * (1e-6 + (1.0 - 2e-6) * draw.u01());
        const double l = interval.witness_l(beta);
        CHECK(l >= 1.0);
        CHECK(l <= r);
        CHECK(exponent_a(l, r, c, beta, alpha) < 0.0);
    }
}

TEST_CASE("lederer tail hand values") {
    // l = 1 term at n=1e4, r=8, M=2, sigma=0.1, zeta=8, x=1:
    //   23 * 2 * (1e-4)^0.875 + 4 * 0.1 * 0.01 = 0.018546...
    const double l1_term = 46.0 * std::pow(1e-4, 0.875) + 0.4 * 0.01;
    const auto tb = lederer_tail(1e4, 8.0, 2.0, 0.1, 8.0, 1.0);
    CHECK(tb.bound <= l1_term + 1e-12);
    CHECK(tb.bound > 0.0);

    // Vacuous case: minimum sits at l = 1 with value ~1.8546.
    const auto vac = lederer_tail(100.0, 4.0, 2.0, 1.0, 8.0, 1.0);
    const double expect = 46.0 * std::pow(0.01, 0.75) + 4.0 * 0.1;
    CHECK(vac.bound == doctest::Approx(expect).epsilon(1e-9));
    CHECK(vac.argmin_l == doctest::Approx(1.0));
    CHECK(vac.bound > 1.0);

    // Degenerate inputs return 0 rather than NaN.
    const auto zero = lederer_tail(100.0, 4.0, 0.0, 0.0, 8.0, 1.0);
    CHECK(zero.bound == 0.0);

    // The zeta constant is overridable; halving it can only shrink the bound.
    const auto smaller = lederer_tail(100.0, 4.0, 2.0, 1.0, 8.0, 1.0, 10.0);
    CHECK(smaller.bound <= vac.bound);

    CHECK_THROWS_AS((void)lederer_tail(0.0, 4.0, 1.0, 1.0, 8.0, 1.0), std::invalid_argument);
}

TEST_CASE("lederer tail decreases in x and can go below 1") {
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto tb = lederer_tail(1e4, 8.0, 2.0, 0.1, 8.0, x);
        CHECK(tb.bound <= prev);
        prev = tb.bound;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("reverse Holder hand values") {
    // Constant sample: equality of all norms.
    const std::vector<double> c{3.0, 3.0, 3.0};
    const auto eq = reverse_holder_check(c, 4.0);
    CHECK(eq.holds);
    CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-14));

    // {0, 2} at r = 4: two-point supports sit exactly at equality.
    const std::vector<double> u{0.0, 2.0};
    const auto two = reverse_holder_check(u, 4.0);
    CHECK(two.lhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(two.rhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(two.holds);

    // {1, 3} at r = 3: lhs = sqrt(5), rhs = 2^(1/4) * 14^(1/4) = 28^(1/4).
    const std::vector<double> v{1.0, 3.0};
    const auto three = reverse_holder_check(v, 3.0);
    CHECK(three.lhs == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    CHECK(three.rhs == doctest::Approx(std::pow(28.0, 0.25)).epsilon(1e-12));
    CHECK(three.holds);

    CHECK_THROWS_AS((void)reverse_holder_check(u, 2.0), std::invalid_argument);
    const std::vector<double> neg{-1.0};
    CHECK_THROWS_AS((void)reverse_holder_check(neg, 3.0), std::invalid_argument);
}

TEST_CASE("reverse Holder property on random weighted samples") {
    Draw draw(31337, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + draw.below(64);
        std::vector<double> values(n), weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Heavy-ish values spanning several decades.
            values[i] = std::pow(draw.u01_open_below(), -1.0 / 3.0) - 0.5;
            weights[i] = draw.u01_open_below();
        }
        const double r = 2.0 + 62.0 * draw.u01_open_below();
        const auto check = reverse_holder_check(values, r, weights);
        CHECK(check.lhs <= check.rhs + 1e-12);
    }
}

TEST_CASE("implicit bound hand values") {
    CHECK(implicit_bound(0.0, 5.0, 0.5) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(largest_fixed_point(0.0, 5.0, 0.5) == doctest::Approx(5.0));

    // a=1, b=0, nu=1/2: C1 = 2*(1/2)*(2*1/2)^1 = 1; fixed point of x = sqrt(x) is 1.
    CHECK(implicit_bound(1.0, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(largest_fixed_point(1.0, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-10));

    // a=2, b=1, nu=1/2: bound = 1*4 + 2 = 6; x* = (1 + sqrt(2))^2.
    CHECK(implicit_bound(2.0, 1.0, 0.5) == doctest::Approx(6.0).epsilon(1e-14));
    const double xstar = largest_fixed_point(2.0, 1.0, 0.5);
    CHECK(xstar == doctest::Approx(std::pow(1.0 + std::sqrt(2.0), 2.0)).epsilon(1e-10));
    CHECK(xstar <= 6.0);

    CHECK_THROWS_AS((void)implicit_bound(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)implicit_bound(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)implicit_bound(-1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("implicit bound dominates the largest fixed point") {
    Draw draw(4242, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = 10.0 * draw.u01();
        const double b = 10.0 * draw.u01();
        const double nu = 0.05 + 0.9 * draw.u01();
        const double xstar = largest_fixed_point(a, b, nu);
        const double bound = implicit_bound(a, b, nu);
        CHECK(xstar <= bound * (1.0 + 1e-10) + 1e-12);
    }
}

TEST_CASE("guaranteed rate") {
    BoundParams params;
    params.r = 64.0;
    params.c_entropy = 4.0;

    BernsteinProfile one;
    one.pieces = {{"all", 1.0, 1.0}};
    const auto g1 = guaranteed_rate(params, one);
    CHECK(g1.beta_max == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g1.beta_max == admissible_beta(64.0, 4.0, 1.0).beta_max);  // exact agreement

    BernsteinProfile two;
    two.pieces = {{"near", 1.0, 1.0}, {"far", 1.0, 0.5}};
    const auto g2 = guaranteed_rate(params, two);
    CHECK(g2.beta_max == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // Closed form (1 - 2 sqrt(C/r)) / (2 - min gamma), and monotonicity in gamma.
    Draw draw(5, 0);
    for (int trial = 0; trial < 500; ++trial) {
        params.c_entropy = 1.0 + 3.0 * draw.u01();
        params.r = 4.0 * params.c_entropy * (1.05 + 4.0 * draw.u01());
        const double ga = draw.u01_open_below();
        const double gb = draw.u01_open_below();
        BernsteinProfile p;
        p.pieces = {{"a", 1.0, ga}, {"b", 1.0, gb}};
        const auto g = guaranteed_rate(params, p);
        const double expect = (1.0 - 2.0 * std::sqrt(params.c_entropy / params.r)) /
                              (2.0 - std::min(ga, gb));
        CHECK(g.beta_max == doctest::Approx(expect).epsilon(1e-12));

        BernsteinProfile worse = p;
        worse.pieces[0].gamma *= 0.5;
        CHECK(guaranteed_rate(params, worse).beta_max <= g.beta_max + 1e-15);
    }

    // r -> infinity approaches the O(1/n) rate.
    params.c_entropy = 4.0;
    params.r = 1e12;
    CHECK(guaranteed_rate(params, one).beta_max == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("kmeans rate") {
    const auto i = kmeans_rate(100.0, 2, 2);
    CHECK(!i.empty);
    CHECK(i.beta_max == doctest::Approx(0.99 * (1.0 - 2.0 * std::sqrt(0.06))).epsilon(1e-14));
    CHECK(i.beta_max == doctest::Approx(0.505).epsilon(1e-3));

    CHECK(kmeans_rate(24.0, 2, 2).empty);  // r = 4k(d+1) boundary
    CHECK(kmeans_rate(23.0, 2, 2).empty);
    CHECK(kmeans_rate(1e12, 2, 2).beta_max == doctest::Approx(1.0).epsilon(1e-5));

    // Equals the generic rate with C = k(d+1) and gammas {(r-2)/(r-1), 1}.
    for (double r : {24.0, 50.0, 100.0, 400.0}) {
        BoundParams params;
        params.r = r;
        params.c_entropy = 2.0 * 2.0;  // k=2, d=1
        BernsteinProfile profile;
        profile.pieces = {{"far", 1.0, (r - 2.0) / (r - 1.0)}, {"near", 1.0, 1.0}};
        const auto generic = guaranteed_rate(params, profile);
        const auto km = kmeans_rate(r, 2, 1);
        CHECK(km.empty == generic.empty);
        if (!km.empty) CHECK(km.beta_max == doctest::Approx(generic.beta_max).epsilon(1e-13));
    }
}

TEST_CASE("far-field Bernstein constants") {
    const auto ff = far_field_bernstein(1.0, 4.0, 2.0);
    CHECK(ff.m_threshold == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ff.threshold_ratio == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ff.gamma == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(ff.b == doctest::Approx(2.0 * std::pow(2.0, 2.0 / 3.0)).epsilon(1e-13));
    CHECK(ff.b == doctest::Approx(3.1748).epsilon(1e-4));

    CHECK(far_field_bernstein(2.0, 4.0, 5.0).m_threshold == doctest::Approx(4.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)far_field_bernstein(2.0, 4.0, 4.0), std::invalid_argument);

    CHECK(far_field_bernstein(1.0, 1e9, 2.0).gamma == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("BoundParams and profile validation") {
    BoundParams p;
    p.r = 4.0;
    p.c_entropy = 3.5;  // violates r >= C + 1
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p.c_entropy = 1.0;
    p.delta = 1.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p.delta = 0.1;
    CHECK_NOTHROW(validate(p));

    BernsteinProfile bad;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad.pieces = {{"x", 1.0, 1.5}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad.pieces = {{"x", 0.0, 0.5}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}
