#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "divopt/errors.hpp"
#include "divopt/policy.hpp"
#include "support.hpp"

using namespace divopt;
using testsupport::kRow1;
using testsupport::kRow2;
using testsupport::kRow3;

TEST_CASE("retention") {
    SUBCASE("branch A retains everything") {
        const Strategy s = Strategy::optimal(solve(kRow1, 2.0));
        for (double x : {1e-6, 0.05, 0.3, 5.0}) CHECK(retention(s, x) == 1.0);
    }
    SUBCASE("branch B near zero") {
        for (double n : {1.0, -0.4, -1.4}) {
            const Strategy s = Strategy::optimal(solve(kRow2, std::exp2(n)));
            CHECK(retention(s, 1e-10) == doctest::Approx(2.0 * (kRow2.mu - kRow2.eta) / kRow2.mu).epsilon(1e-6));
        }
    }
    SUBCASE("branch C is linear below the switch") {
        const Solution sol = solve(kRow3, std::exp2(2.2));
        const Strategy s = Strategy::optimal(sol);
        CHECK(retention(s, 0.5 * sol.x_switch) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("constant retention") {
        const Strategy s = Strategy::constant(0.4, 0.2);
        CHECK(retention(s, 0.01) == 0.4);
        CHECK(s.barrier() == 0.2);
        CHECK_THROWS_AS(Strategy::constant(1.2, 0.1), DomainError);
        CHECK_THROWS_AS(Strategy::constant(-0.1, 0.1), DomainError);
        CHECK_THROWS_AS(Strategy::constant(0.5, -1.0), DomainError);
    }
    CHECK_THROWS_AS(retention(Strategy::constant(1.0, 0.0), 0.0), DomainError);
    CHECK_THROWS_AS(retention(Strategy::optimal(solve(kRow2, 2.0)), -1.0), DomainError);
}

TEST_CASE("retention is nondecreasing, continuous and inside [0,1]") {
    for (const auto& inst : testsupport::regime_instances()) {
        const Solution sol = solve(inst.p, std::exp2(inst.log2_gamma));
        const Strategy s = Strategy::optimal(sol);
        double prev = 0.0;
        const double hi = 2.0 * std::max(sol.x_switch, 0.05);
        for (int i = 0; i <= 4000; ++i) {
            const double x = 1e-6 + hi * i / 4000.0;
            const double u = retention(s, x);
            CHECK(u >= 0.0);
            CHECK(u <= 1.0);
            CHECK(u >= prev);
            if (i > 0) CHECK(u - prev < 5e-3);
            prev = u;
        }
    }
}

TEST_CASE("inconsistent retention raises") {
    Solution sol = solve(kRow2, 2.0);
    const auto inner = sol.segments.at(0).f;
    sol.segments.at(0).f = [inner](double x) {
        Eval e = inner(x);
        e.u = 1.5;
        return e;
    };
    const Strategy s = Strategy::optimal(sol);
    CHECK_THROWS_AS(retention(s, 0.5 * sol.x_switch), NumericalError);

    Solution tiny = solve(kRow2, 2.0);
    const auto inner2 = tiny.segments.at(0).f;
    tiny.segments.at(0).f = [inner2](double x) {
        Eval e = inner2(x);
        e.u = -1e-10;
        return e;
    };
    CHECK(retention(Strategy::optimal(tiny), 0.5 * tiny.x_switch) == 0.0);
}

TEST_CASE("dividend") {
    const Strategy s = Strategy::constant(1.0, 0.4);
    CHECK(dividend(s, 0.4) == 0.0);
    CHECK(dividend(s, 0.7) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(dividend(Strategy::constant(1.0, 0.0), 0.7) == 0.7);
    CHECK(dividend(Strategy::constant(1.0, std::numeric_limits<double>::infinity()), 1e6) == 0.0);
    CHECK_THROWS_AS(dividend(s, -0.1), DomainError);

    const Solution sol = solve(kRow2, 2.0);
    const Strategy opt = Strategy::optimal(sol);
    testsupport::Gen gen(41);
    for (int i = 0; i < 1000; ++i) {
        const double x = gen.uniform(0.0, 1.0);
        const double d = dividend(opt, x);
        CHECK(d >= 0.0);
        CHECK(d <= x);
        CHECK(d + (x - d) == x);
        CHECK(x - d == doctest::Approx(std::min(x, sol.b)).epsilon(1e-15));
    }
}
