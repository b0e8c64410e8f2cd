#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "divopt/errors.hpp"
#include "divopt/montecarlo.hpp"
#include "support.hpp"

using namespace divopt;
using testsupport::kRow2;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// nearly deterministic surplus: drift eta, negligible noise
const ModelParams kQuiet{0.5, 1e-8, 1.2, 0.2};

std::vector<double> distinct_times(const PathRecord& r) {
    std::vector<double> t = r.times;
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

}  // namespace

TEST_CASE("splitmix64 and xoshiro256++") {
    std::uint64_t st = 0;
    CHECK(splitmix64(st) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(st) == 0x6e789e6aa1b965f4ULL);
    CHECK(stream_seed(5, 3) == stream_seed(6, 0));
    Xoshiro256pp a(1), b(1), c(2);
    for (int i = 0; i < 100; ++i) {
        const auto va = a();
        CHECK(va == b());
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("pairwise_sum") {
    CHECK(pairwise_sum(nullptr, 0) == 0.0);
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    CHECK(pairwise_sum(v.data(), v.size()) == 500500.0);
    std::vector<double> tiny(1 << 20, 0.1);
    CHECK(pairwise_sum(tiny.data(), tiny.size()) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
}

TEST_CASE("configuration validation") {
    const Strategy s = Strategy::constant(1.0, 0.5);
    SimConfig c;
    CHECK_NOTHROW(c.validate(kRow2));
    c.x0 = 0.0;
    CHECK_THROWS_AS(estimate_npv(s, kRow2, 1.0, c), DomainError);
    c = SimConfig{};
    c.dt = 0.02;
    CHECK_THROWS_AS(c.validate(kRow2), DomainError);
    c = SimConfig{};
    c.t_max = 10.0;
    CHECK_THROWS_AS(c.validate(kRow2), DomainError);
    c.t_max = 20.0 / kRow2.delta;
    CHECK_NOTHROW(c.validate(kRow2));
    c = SimConfig{};
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(kRow2), DomainError);
    CHECK(SimConfig{}.horizon(kRow2) == doctest::Approx(40.0 / 1.5));
}

TEST_CASE("noise-free surplus follows the drift") {
    SimConfig c;
    c.t_max = 40.0;
    c.dt = 1e-2;
    c.bridge_ruin = false;
    const PathRecord r = simulate_path(Strategy::constant(1.0, kInf), kQuiet, 1.0, c, 0);
    REQUIRE(r.times.size() > 4000);
    CHECK_FALSE(r.ruin_time);
    CHECK(r.dividend_events.empty());
    CHECK(r.npv == 0.0);
    for (std::size_t i = 0; i < r.times.size(); ++i) CHECK(std::fabs(r.surplus[i] - (1.0 + 0.2 * r.times[i])) < 1e-6);
    CHECK(r.times.back() == doctest::Approx(40.0));
}

TEST_CASE("zero barrier pays at every arrival") {
    SimConfig c;
    c.t_max = 40.0;
    c.dt = 1e-2;
    c.bridge_ruin = false;
    const double gamma = 50.0;
    for (std::uint64_t i = 0; i < 4; ++i) {
        const PathRecord r = simulate_path(Strategy::constant(1.0, 0.0), kQuiet, gamma, c, i);
        CHECK_FALSE(r.ruin_time);
        const double n = static_cast<double>(r.dividend_events.size());
        const double expected = gamma * 40.0;
        CHECK(std::fabs(n - expected) < 5.0 * std::sqrt(expected));
        double paid = 0.0;
        for (const auto& e : r.dividend_events) paid += e.amount;
        CHECK(paid + r.surplus.back() == doctest::Approx(1.0 + 0.2 * 40.0).epsilon(1e-6));
    }
}

TEST_CASE("never paying gives zero value") {
    SimConfig c;
    c.n_paths = 200;
    c.x0 = 0.3;
    c.t_max = 20.0 / kRow2.delta;
    const SimResult r = estimate_npv(Strategy::constant(1.0, kInf), kRow2, 2.0, c);
    CHECK(r.npv_mean == 0.0);
    CHECK(r.npv_stderr == 0.0);
    CHECK(r.n_simulated == 400);
}

TEST_CASE("path records") {
    const Solution sol = solve(kRow2, 2.0);
    const Strategy s = Strategy::optimal(sol);
    SimConfig c;
    c.x0 = 0.2;
    for (std::uint64_t pair = 0; pair < 20; ++pair) {
        const PathRecord a = simulate_path(s, kRow2, 2.0, c, 2 * pair);
        const PathRecord b = simulate_path(s, kRow2, 2.0, c, 2 * pair + 1);
        for (const PathRecord* r : {&a, &b}) {
            CHECK(r->npv >= 0.0);
            CHECK(r->times.size() == r->surplus.size());
            CHECK(std::is_sorted(r->times.begin(), r->times.end()));
            const std::size_t last = r->surplus.size() - 1;
            for (std::size_t i = 0; i < last; ++i) CHECK(r->surplus[i] >= 0.0);
            if (r->ruin_time) CHECK(*r->ruin_time == r->times.back());
            double npv = 0.0;
            for (const auto& e : r->dividend_events) {
                CHECK(e.amount > 0.0);
                npv += std::exp(-kRow2.delta * e.time) * e.amount;
                const auto it = std::find(r->times.begin(), r->times.end(), e.time);
                REQUIRE(it != r->times.end());
            }
            CHECK(npv == doctest::Approx(r->npv).epsilon(1e-12));
        }
        // the two members of a pair step on the same grid until one of them stops
        const auto ta = distinct_times(a), tb = distinct_times(b);
        const std::size_t m = std::min(ta.size(), tb.size());
        CHECK(std::equal(ta.begin(), ta.begin() + m, tb.begin()));
    }
}

TEST_CASE("determinism") {
    {
        const Strategy s1 = Strategy::optimal(solve(testsupport::kRow1, 2.0));
        SimConfig c1;
        c1.dt = 1e-2;
        const PathRecord a = simulate_path(s1, testsupport::kRow1, 2.0, c1, 3);
        const PathRecord b = simulate_path(s1, testsupport::kRow1, 2.0, c1, 3);
        CHECK(a.times == b.times);
        CHECK(a.surplus == b.surplus);
        CHECK(a.ruin_time == b.ruin_time);
        CHECK(a.dividend_events.size() == b.dividend_events.size());
    }
    const Strategy s = Strategy::optimal(solve(kRow2, 2.0));
    SimConfig c;
    c.x0 = 0.2;
    const PathRecord a = simulate_path(s, kRow2, 2.0, c, 7);
    const PathRecord b = simulate_path(s, kRow2, 2.0, c, 7);
    CHECK(a.times == b.times);
    CHECK(a.surplus == b.surplus);
    CHECK(a.npv == b.npv);

    c.n_paths = 1500;
    c.threads = 1;
    const SimResult r1 = estimate_npv(s, kRow2, 2.0, c);
    c.threads = 4;
    const SimResult r4 = estimate_npv(s, kRow2, 2.0, c);
    CHECK(r1.npv_mean == r4.npv_mean);
    CHECK(r1.npv_stderr == r4.npv_stderr);
    CHECK(r1.ruin_fraction == r4.ruin_fraction);
    // seeds differing only in the low bits permute the same set of streams
    c.master_seed = 7;
    CHECK(estimate_npv(s, kRow2, 2.0, c).npv_mean != r1.npv_mean);
}

TEST_CASE("estimates agree with the value function") {
    const Solution sol = solve(kRow2, 2.0);
    SimConfig c;
    c.x0 = 0.2;
    c.n_paths = 4000;
    const SimResult opt = estimate_npv(Strategy::optimal(sol), kRow2, 2.0, c);
    const double v = sol.value(0.2);
    CHECK(std::fabs(opt.npv_mean - v) < 4.0 * opt.npv_stderr);
    CHECK(opt.npv_stderr < 0.01 * v);
    CHECK(opt.ruin_fraction > 0.0);
    CHECK(opt.ruin_fraction <= 1.0);
    CHECK(opt.truncation_bound < opt.npv_stderr / 10.0);

    for (const Strategy& other : {Strategy::constant(0.6, sol.b), Strategy::constant(1.0, 0.5 * sol.b)}) {
        const SimResult r = estimate_npv(other, kRow2, 2.0, c);
        CHECK(r.npv_mean < v + 3.0 * r.npv_stderr);
    }
}

TEST_CASE("halving the step size does not move the estimate") {
    const Strategy s = Strategy::optimal(solve(kRow2, 2.0));
    SimConfig c;
    c.x0 = 0.2;
    c.n_paths = 3000;
    c.dt = 2e-3;
    const SimResult coarse = estimate_npv(s, kRow2, 2.0, c);
    c.dt = 1e-3;
    const SimResult fine = estimate_npv(s, kRow2, 2.0, c);
    const double se = std::hypot(coarse.npv_stderr, fine.npv_stderr);
    CHECK(std::fabs(coarse.npv_mean - fine.npv_mean) < 2.0 * se);
}
