#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "divopt/errors.hpp"
#include "divopt/model.hpp"
#include "support.hpp"

using namespace divopt;
using testsupport::Gen;
using testsupport::kRow1;
using testsupport::kRow2;
using testsupport::kRow3;

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(kRow1.validate());
    CHECK_THROWS_AS((ModelParams{0.0, 0.3, 1.2, 0.2}.validate()), DomainError);
    CHECK_THROWS_AS((ModelParams{0.5, -0.3, 1.2, 0.2}.validate()), DomainError);
    CHECK_THROWS_AS((ModelParams{0.5, 0.3, 0.1, 0.2}.validate()), DomainError);
    CHECK_THROWS_AS((ModelParams{0.5, 0.3, 0.0, 0.0}.validate()), DomainError);
    CHECK(branch_of(kRow1) == Branch::A);
    CHECK(branch_of(kRow2) == Branch::B);
    CHECK(branch_of(kRow3) == Branch::C);
    CHECK(branch_of(ModelParams{1.0, 0.3, 0.4, 0.2}) == Branch::A);
}

TEST_CASE("characteristic roots") {
    SUBCASE("row 1 discount roots") {
        const CharRoots r = char_roots(kRow1, 1e-9);
        CHECK(std::fabs(r.theta_minus - -6.22839) < 1e-5);
        CHECK(std::fabs(r.theta_plus - 1.78395) < 1e-5);
    }
    SUBCASE("radical and quadratic agree") {
        for (const auto& p : {kRow1, kRow2, kRow3})
            for (double g : {0.1, 1.0, 10.0}) {
                const double s2 = p.sigma * p.sigma;
                const double rad = (-p.eta - std::sqrt(p.eta * p.eta + 2.0 * s2 * (p.delta + g))) / s2;
                CHECK(lambda_gamma(p, g) == doctest::Approx(rad).epsilon(1e-12));
                CHECK(char_roots(p, g).lambda_gamma == doctest::Approx(rad).epsilon(1e-12));
            }
    }
    SUBCASE("row 2 Vieta") {
        const CharRoots r = char_roots(kRow2, 1.0);
        CHECK(r.theta_plus * r.theta_minus == doctest::Approx(-2.0 * 1.5 / 0.09).epsilon(1e-12));
    }
}

TEST_CASE("characteristic roots: ordering and residuals on random parameters") {
    Gen gen(21);
    for (int i = 0; i < 300; ++i) {
        const double eta = gen.uniform(0.05, 1.0);
        const ModelParams p{gen.uniform(0.05, 3.0), gen.uniform(0.05, 1.0), eta * gen.uniform(1.0, 3.0), eta};
        const double g = gen.log_uniform(1e-3, 1e3);
        const CharRoots r = char_roots(p, g);
        CHECK(r.lambda_gamma < r.theta_minus);
        CHECK(r.theta_minus < 0.0);
        CHECK(r.theta_plus > 0.0);
        const double s2 = 0.5 * p.sigma * p.sigma;
        auto q = [&](double x, double c) { return s2 * x * x + p.eta * x - c; };
        const double scale = std::max(1.0, p.delta + g);
        CHECK(std::fabs(q(r.theta_plus, p.delta)) <= 1e-10 * scale);
        CHECK(std::fabs(q(r.theta_minus, p.delta)) <= 1e-10 * scale);
        CHECK(std::fabs(q(r.lambda_gamma, p.delta + g)) <= 1e-10 * scale);
    }
}

TEST_CASE("f1") {
    CHECK(std::fabs(f1(kRow1, 0.28125)) < 1e-10);
    CHECK(f1(kRow2, 1.0078) == doctest::Approx((2.0 * 0.5 - 0.8) / 3.0).epsilon(5e-4 / 0.0667));
    for (const auto& p : {kRow1, kRow2, kRow3}) {
        CHECK(f1(p, 1.0) < f1(p, 2.0));
        double prev = f1(p, std::exp2(-21.0));
        for (double n = -20.0; n <= 40.0; n += 0.25) {
            const double v = f1(p, std::exp2(n));
            CHECK(v > prev);
            prev = v;
        }
        const CharRoots r = char_roots(p, 1.0);
        CHECK(f1(p, 1e-12) == doctest::Approx(1.0 / r.theta_minus).epsilon(1e-8));
        CHECK(f1(p, 1e15) == doctest::Approx(p.eta / p.delta).epsilon(1e-6));
    }
}

TEST_CASE("slope functions g1, g2, g4") {
    SUBCASE("row 1 barrier anchor") {
        CHECK(g1(kRow1, 0.1082) == doctest::Approx(f1(kRow1, std::exp2(-0.2))).epsilon(1e-2));
        CHECK(std::fabs(g1(kRow1, 0.1082) - f1(kRow1, std::exp2(-0.2))) < 1e-3);
    }
    SUBCASE("limits") {
        for (const auto& p : {kRow1, kRow2, kRow3}) {
            const double tp = char_roots(p, 1.0).theta_plus;
            CHECK(g1(p, 20.0 / tp) == doctest::Approx(1.0 / tp).epsilon(1e-6));
            CHECK(g1(p, 1e-9) < 1e-8);
        }
        CHECK(g2(kRow2, 1e-10) == doctest::Approx((2.0 * kRow2.eta - kRow2.mu) / (2.0 * kRow2.delta)).epsilon(1e-8));
        CHECK(g4(kRow3, 1e-10) == doctest::Approx(kRow3.mu / (2.0 * kRow3.delta)).epsilon(1e-8));
        const double tp2 = char_roots(kRow2, 1.0).theta_plus, tp3 = char_roots(kRow3, 1.0).theta_plus;
        CHECK(g2(kRow2, 30.0 / tp2) == doctest::Approx(1.0 / tp2).epsilon(1e-6));
        CHECK(g4(kRow3, 30.0 / tp3) == doctest::Approx(1.0 / tp3).epsilon(1e-6));
    }
    SUBCASE("strictly increasing") {
        double p1 = 0.0, p2 = 0.0, p4 = 0.0;
        for (int i = 0; i < 300; ++i) {
            const double b = 1e-4 * std::pow(1.03, i);
            const double v1 = g1(kRow1, b), v2 = g2(kRow2, b), v4 = g4(kRow3, b);
            if (i > 0) {
                CHECK(v1 > p1);
                CHECK(v2 > p2);
                CHECK(v4 > p4);
            }
            p1 = v1;
            p2 = v2;
            p4 = v4;
        }
    }
    CHECK_THROWS_AS(g1(kRow1, 0.0), DomainError);
    CHECK_THROWS_AS(g2(kRow2, -1.0), DomainError);
    CHECK_THROWS_AS(g4(kRow3, 0.0), DomainError);
}

TEST_CASE("f2, f3, f4 on branch B") {
    const ModelParams& p = kRow2;
    const double gamma1 = (p.delta / p.mu) * (2.0 * p.delta * p.sigma * p.sigma / p.mu + 2.0 * p.eta - p.mu);
    CHECK(gamma1 == doctest::Approx(1.0078125).epsilon(1e-15));
    CHECK(f2(p, gamma1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(alpha_gamma(p, 0.5) == doctest::Approx(f2(p, 0.5)).epsilon(1e-15));
    const double eb = p.eta_bar();
    CHECK(f3(p, 1e-7) == doctest::Approx(eb * (p.mu - p.eta) / (eb * p.delta + 1.0)).epsilon(1e-5));
    CHECK(f4(p, 0.3) == doctest::Approx(eb * (p.mu - p.eta) * std::exp(eb * 0.3)).epsilon(1e-14));

    double prev2 = INFINITY, prev3 = -INFINITY, prev4 = -INFINITY;
    for (int i = 1; i < 100; ++i) {
        const double g = gamma1 * i / 100.0;
        const double a = f2(p, g), c = f3(p, g), d = f4(p, g);
        CHECK(a > 1.0);
        CHECK(a < prev2);
        CHECK(c > prev3);
        CHECK(d > prev4);
        prev2 = a;
        prev3 = c;
        prev4 = d;
    }
    const double g2v = *thresholds(p).gamma2;
    CHECK(f3(p, g2v) == doctest::Approx(f4(p, g2v)).epsilon(1e-10));
    CHECK_THROWS_AS(f2(kRow1, 0.1), RegimeError);
    CHECK_THROWS_AS(f3(p, 2.0), RegimeError);
}

TEST_CASE("thresholds") {
    SUBCASE("row 1") {
        const Thresholds t = thresholds(kRow1);
        REQUIRE(t.gamma0);
        CHECK_FALSE(t.gamma1);
        CHECK(*t.gamma0 == doctest::Approx(0.5 * std::pow(0.3 * 0.5 / 0.2, 2)).epsilon(1e-12));
        CHECK(std::fabs(*t.gamma0 - 0.2812) < 1e-3);
        CHECK(std::fabs(f1(kRow1, *t.gamma0)) < 1e-10);
    }
    SUBCASE("row 2") {
        const Thresholds t = thresholds(kRow2);
        REQUIRE(t.gamma1);
        REQUIRE(t.gamma2);
        CHECK(*t.gamma1 == doctest::Approx(1.0078125).epsilon(1e-12));
        CHECK(std::fabs(*t.gamma1 - 1.0078) < 5e-4);
        CHECK(std::fabs(*t.gamma2 - 0.3979) < 5e-4);
        CHECK(*t.gamma2 > 0.0);
        CHECK(*t.gamma2 < *t.gamma1);
        CHECK(f1(kRow2, *t.gamma1) == doctest::Approx((2.0 * 0.5 - 0.8) / 3.0).epsilon(1e-10));
    }
    SUBCASE("row 3") {
        const Thresholds t = thresholds(kRow3);
        REQUIRE(t.gamma_bar1);
        CHECK(std::fabs(*t.gamma_bar1 - 3.7959) < 5e-4);
        CHECK(f1(kRow3, *t.gamma_bar1) == doctest::Approx(kRow3.mu / (2.0 * kRow3.delta)).epsilon(1e-10));
    }
}

TEST_CASE("classify") {
    CHECK(classify(kRow1, std::exp2(-2.4)).kind == Case::A2);
    CHECK(classify(kRow1, std::exp2(-0.2)).kind == Case::A1);
    CHECK(classify(kRow2, 2.0).kind == Case::B1);
    CHECK(classify(kRow2, std::exp2(-0.4)).kind == Case::B2);
    CHECK(classify(kRow2, std::exp2(-1.4)).kind == Case::B3);
    CHECK(classify(kRow3, std::exp2(2.2)).kind == Case::C1);
    CHECK(classify(kRow3, std::exp2(0.8)).kind == Case::C2);

    SUBCASE("thresholds go to the lower case") {
        const Thresholds t1 = thresholds(kRow1), t2 = thresholds(kRow2), t3 = thresholds(kRow3);
        CHECK(classify(kRow1, *t1.gamma0).kind == Case::A2);
        CHECK(classify(kRow1, std::nextafter(*t1.gamma0, 1.0)).kind == Case::A1);
        CHECK(classify(kRow2, *t2.gamma1).kind == Case::B2);
        CHECK(classify(kRow2, *t2.gamma2).kind == Case::B3);
        CHECK(classify(kRow3, *t3.gamma_bar1).kind == Case::C2);
    }
}

TEST_CASE("classify is total and deterministic") {
    Gen gen(22);
    for (int i = 0; i < 60; ++i) {
        const double eta = gen.uniform(0.05, 1.0);
        const double ratio = i % 3 == 0 ? 1.0 : gen.uniform(1.0001, 3.0);
        const ModelParams p{gen.uniform(0.1, 3.0), gen.uniform(0.1, 1.0), eta * ratio, eta};
        const double g = gen.log_uniform(1e-3, 1e3);
        const Regime a = classify(p, g), b = classify(p, g);
        CHECK(a.kind == b.kind);
        CHECK(a.branch == branch_of(p));
    }
}
