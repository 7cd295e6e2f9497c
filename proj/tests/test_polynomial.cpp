#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "tensegrity/polynomial.hpp"

using tensegrity::BivariatePoly;
using tensegrity::RootCluster;
using tensegrity::UnivariatePoly;

namespace {

std::mt19937_64 rng(77190233u);

double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

UnivariatePoly from_roots(const std::vector<double>& roots, double lead = 1.0) {
    UnivariatePoly p({lead});
    for (double r : roots) p = p * UnivariatePoly({-r, 1.0});
    return p;
}

// Sorted list of root values ignoring multiplicity.
std::vector<double> values(const std::vector<RootCluster>& cs) {
    std::vector<double> v;
    for (const auto& c : cs) v.push_back(c.value);
    return v;
}

}  // namespace

TEST_CASE("evaluation matches naive power sum") {
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> c;
        const int deg = 1 + trial % 9;
        for (int i = 0; i <= deg; ++i) c.push_back(uniform(-5.0, 5.0));
        UnivariatePoly p(c);
        const double t = uniform(-3.0, 3.0);
        double naive = 0.0;
        for (int i = 0; i <= deg; ++i) naive += c[static_cast<size_t>(i)] * std::pow(t, i);
        REQUIRE_THAT(p(t), Catch::Matchers::WithinAbs(naive, 1e-9 * (1.0 + std::abs(naive))));
    }
}

TEST_CASE("degree ignores zero padding and trim drops tiny leads") {
    UnivariatePoly p({1.0, 2.0, 0.0, 0.0});
    REQUIRE(p.degree() == 1);
    REQUIRE(UnivariatePoly({}).degree() == -1);
    REQUIRE(UnivariatePoly({0.0, 0.0}).degree() == -1);

    UnivariatePoly q({1.0, 2.0, 3.0, 1e-15});
    REQUIRE(q.degree() == 3);
    REQUIRE(q.trimmed().degree() == 2);
    // a genuinely small polynomial must not be trimmed away relative to itself
    UnivariatePoly tiny({1e-30, 2e-30});
    REQUIRE(tiny.trimmed().degree() == 1);
}

TEST_CASE("derivative agrees with finite differences") {
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> c;
        for (int i = 0; i < 7; ++i) c.push_back(uniform(-4.0, 4.0));
        UnivariatePoly p(c);
        UnivariatePoly dp = p.derivative();
        const double t = uniform(-2.0, 2.0);
        const double h = 1e-6;
        const double fd = (p(t + h) - p(t - h)) / (2.0 * h);
        REQUIRE_THAT(dp(t), Catch::Matchers::WithinAbs(fd, 1e-5 * (1.0 + std::abs(fd))));
    }
    REQUIRE(UnivariatePoly({3.0}).derivative().degree() == -1);
}

TEST_CASE("product and sum evaluate consistently") {
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> ca, cb;
        for (int i = 0; i < 4; ++i) ca.push_back(uniform(-3.0, 3.0));
        for (int i = 0; i < 5; ++i) cb.push_back(uniform(-3.0, 3.0));
        UnivariatePoly a(ca), b(cb);
        const double t = uniform(-2.0, 2.0);
        REQUIRE_THAT((a * b)(t), Catch::Matchers::WithinAbs(a(t) * b(t), 1e-8));
        REQUIRE_THAT((a + b)(t), Catch::Matchers::WithinAbs(a(t) + b(t), 1e-10));
        REQUIRE_THAT((a - b)(t), Catch::Matchers::WithinAbs(a(t) - b(t), 1e-10));
        REQUIRE_THAT((2.5 * a)(t), Catch::Matchers::WithinAbs(2.5 * a(t), 1e-10));
    }
}

TEST_CASE("division reconstructs the numerator") {
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> cn, cd;
        for (int i = 0; i < 9; ++i) cn.push_back(uniform(-3.0, 3.0));
        for (int i = 0; i < 3; ++i) cd.push_back(uniform(-3.0, 3.0));
        cd.back() = uniform(0.5, 2.0);  // keep the divisor well conditioned
        UnivariatePoly num(cn), den(cd);
        auto [quo, rem] = UnivariatePoly::divrem(num, den);
        REQUIRE(rem.degree() < den.degree());
        UnivariatePoly back = quo * den + rem;
        for (int i = 0; i <= num.degree(); ++i)
            REQUIRE_THAT(back.coeff(i), Catch::Matchers::WithinAbs(num.coeff(i), 1e-9));
    }
}

TEST_CASE("dividing out an exact quadratic factor leaves no remainder") {
    const UnivariatePoly one_plus_t2({1.0, 0.0, 1.0});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> cs;
        for (int i = 0; i < 7; ++i) cs.push_back(uniform(-10.0, 10.0));
        UnivariatePoly s(cs);
        UnivariatePoly r = s * one_plus_t2;
        auto [quo, rem] = UnivariatePoly::divrem(r, one_plus_t2);
        REQUIRE(rem.max_abs_coeff() <= 1e-10 * r.max_abs_coeff());
        for (int i = 0; i <= 6; ++i)
            REQUIRE_THAT(quo.coeff(i), Catch::Matchers::WithinAbs(s.coeff(i), 1e-9));
    }
}

TEST_CASE("real_roots recovers planted simple roots") {
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 5;
        std::vector<double> roots;
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            double r = uniform(-3.0, 3.0);
            for (double prev : roots)
                if (std::abs(r - prev) < 0.05) ok = false;
            roots.push_back(r);
        }
        if (!ok) continue;
        std::sort(roots.begin(), roots.end());
        auto found = real_roots(from_roots(roots, uniform(0.5, 2.0)));
        REQUIRE(found.size() == roots.size());
        for (size_t i = 0; i < roots.size(); ++i) {
            REQUIRE(found[i].multiplicity == 1);
            REQUIRE_THAT(found[i].value, Catch::Matchers::WithinAbs(roots[i], 1e-8));
        }
    }
}

TEST_CASE("real_roots reports multiplicity for repeated roots") {
    // (t - 1)^2 (t + 2)
    UnivariatePoly p = from_roots({1.0, 1.0, -2.0});
    auto cs = real_roots(p, 1e-5);
    REQUIRE(cs.size() == 2);
    REQUIRE_THAT(cs[0].value, Catch::Matchers::WithinAbs(-2.0, 1e-9));
    REQUIRE(cs[0].multiplicity == 1);
    REQUIRE_THAT(cs[1].value, Catch::Matchers::WithinAbs(1.0, 1e-5));
    REQUIRE(cs[1].multiplicity == 2);
}

TEST_CASE("real_roots ignores complex pairs") {
    // (t^2 + 1)(t - 0.5)
    UnivariatePoly p = UnivariatePoly({1.0, 0.0, 1.0}) * UnivariatePoly({-0.5, 1.0});
    auto cs = real_roots(p);
    REQUIRE(cs.size() == 1);
    REQUIRE_THAT(cs[0].value, Catch::Matchers::WithinAbs(0.5, 1e-10));

    REQUIRE(real_roots(UnivariatePoly({1.0, 0.0, 1.0})).empty());
    REQUIRE(real_roots(UnivariatePoly({2.0, -1.0, 2.0, -1.0, 2.0})).empty());
}

TEST_CASE("real_roots edge cases") {
    REQUIRE_THROWS_AS(real_roots(UnivariatePoly({})), tensegrity::ZeroPolynomial);
    REQUIRE_THROWS_AS(real_roots(UnivariatePoly({0.0, 0.0, 0.0})), tensegrity::ZeroPolynomial);
    REQUIRE(real_roots(UnivariatePoly({5.0})).empty());
    // linear
    auto lin = real_roots(UnivariatePoly({-3.0, 2.0}));
    REQUIRE(lin.size() == 1);
    REQUIRE_THAT(lin[0].value, Catch::Matchers::WithinAbs(1.5, 1e-12));
}

TEST_CASE("real_roots handles widely scaled roots") {
    std::vector<double> roots = {-2000.0, 0.001, 1000.0};
    auto cs = real_roots(from_roots(roots), 1e-7);
    REQUIRE(cs.size() == 3);
    REQUIRE_THAT(cs[0].value, Catch::Matchers::WithinAbs(-2000.0, 1e-4));
    REQUIRE_THAT(cs[1].value, Catch::Matchers::WithinAbs(0.001, 1e-8));
    REQUIRE_THAT(cs[2].value, Catch::Matchers::WithinAbs(1000.0, 1e-4));
}

TEST_CASE("real_roots resolves the 1..8 integer ladder") {
    std::vector<double> roots = {1, 2, 3, 4, 5, 6, 7, 8};
    auto cs = real_roots(from_roots(roots));
    REQUIRE(cs.size() == 8);
    for (size_t i = 0; i < 8; ++i)
        REQUIRE_THAT(cs[i].value, Catch::Matchers::WithinAbs(roots[i], 1e-6));
}

TEST_CASE("near-identical roots merge to one cluster") {
    UnivariatePoly p = from_roots({0.0, 1e-9, 2.0});
    auto cs = real_roots(p, 1e-7);
    REQUIRE(cs.size() == 2);
    REQUIRE(cs[0].multiplicity == 2);
    REQUIRE_THAT(cs[0].value, Catch::Matchers::WithinAbs(0.0, 1e-7));
    REQUIRE(cs[1].multiplicity == 1);
}

TEST_CASE("resultant vanishes exactly for shared roots") {
    for (int trial = 0; trial < 100; ++trial) {
        const double shared = uniform(-2.0, 2.0);
        UnivariatePoly f = from_roots({shared, uniform(-2.0, 2.0), uniform(-2.0, 2.0)});
        UnivariatePoly g = from_roots({shared, uniform(-2.0, 2.0)});
        REQUIRE(std::abs(resultant(f, g)) < 1e-10);

        UnivariatePoly h = from_roots({shared + 0.3, uniform(2.5, 3.5)});
        REQUIRE(std::abs(resultant(f, h)) > 1e-6);
    }
}

TEST_CASE("resultant of quadratics matches the explicit formula") {
    for (int trial = 0; trial < 100; ++trial) {
        const double a0 = uniform(-3, 3), a1 = uniform(-3, 3), a2 = uniform(0.5, 3);
        const double b0 = uniform(-3, 3), b1 = uniform(-3, 3), b2 = uniform(0.5, 3);
        const double expected = std::pow(a2 * b0 - a0 * b2, 2) -
                                (a2 * b1 - a1 * b2) * (a1 * b0 - a0 * b1);
        const double got = resultant(UnivariatePoly({a0, a1, a2}), UnivariatePoly({b0, b1, b2}));
        REQUIRE_THAT(got, Catch::Matchers::WithinAbs(expected, 1e-9 * (1.0 + std::abs(expected))));
    }
}

TEST_CASE("resultant handles degenerate degrees") {
    REQUIRE_THAT(resultant(UnivariatePoly({3.0}), UnivariatePoly({-1.0, 0.0, 2.0})),
                 Catch::Matchers::WithinAbs(9.0, 1e-12));
    REQUIRE_THAT(resultant(UnivariatePoly({-1.0, 1.0}), UnivariatePoly({2.0})),
                 Catch::Matchers::WithinAbs(2.0, 1e-12));
    REQUIRE_THROWS_AS(resultant(UnivariatePoly({}), UnivariatePoly({1.0, 1.0})),
                      tensegrity::ZeroPolynomial);
}

TEST_CASE("bivariate evaluation and partial derivatives") {
    for (int trial = 0; trial < 100; ++trial) {
        BivariatePoly b;
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j) b.set_coeff(i, j, uniform(-4.0, 4.0));
        const double t1 = uniform(-2.0, 2.0), t2 = uniform(-2.0, 2.0);

        double naive = 0.0;
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2; ++j) naive += b.coeff(i, j) * std::pow(t1, i) * std::pow(t2, j);
        REQUIRE_THAT(b(t1, t2), Catch::Matchers::WithinAbs(naive, 1e-10));

        const double h = 1e-6;
        const double fd1 = (b(t1 + h, t2) - b(t1 - h, t2)) / (2.0 * h);
        const double fd2 = (b(t1, t2 + h) - b(t1, t2 - h)) / (2.0 * h);
        REQUIRE_THAT(b.d_t1(t1, t2), Catch::Matchers::WithinAbs(fd1, 1e-5));
        REQUIRE_THAT(b.d_t2(t1, t2), Catch::Matchers::WithinAbs(fd2, 1e-5));

        REQUIRE_THAT(b.swapped()(t2, t1), Catch::Matchers::WithinAbs(b(t1, t2), 1e-12));

        auto a = b.coeffs_in_t2();
        const double recon = a[0](t1) + a[1](t1) * t2 + a[2](t1) * t2 * t2;
        REQUIRE_THAT(recon, Catch::Matchers::WithinAbs(b(t1, t2), 1e-10));
    }
}
