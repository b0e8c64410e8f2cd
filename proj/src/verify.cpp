#include "divopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

constexpr double kExclusion = 1e-7;

double decay_length(const Solution& sol) {
    auto it = sol.constants.find("lambda");
    if (it == sol.constants.end()) return 1.0;
    return 1.0 / std::fabs(it->second);
}

double top_breakpoint(const Solution& sol) {
    const auto bps = sol.breakpoints();
    double top = std::max(sol.b, sol.x_switch);
    if (!bps.empty()) top = std::max(top, bps.back());
    return top;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

}  // namespace

std::vector<double> verification_grid(const Solution& sol, std::size_t n) {
    const auto bps = sol.breakpoints();
    const std::size_t per_bp = 50;
    const std::size_t cluster = per_bp * bps.size();
    const std::size_t n_log = n > cluster + 2 ? n - cluster : 2;
    const double hi = top_breakpoint(sol) + 5.0 * decay_length(sol);

    std::vector<double> g = log_grid(1e-4, hi, n_log);
    for (double bp : bps) {
        const auto offsets = log_grid(1e-6, 1e-3, per_bp / 2);
        for (double o : offsets) {
            g.push_back(bp - o);
            g.push_back(bp + o);
        }
    }
    std::vector<double> out;
    out.reserve(g.size());
    for (double x : g) {
        if (!(x > 0.0)) continue;
        bool near = false;
        for (double bp : bps) near = near || std::fabs(x - bp) < kExclusion;
        if (!near) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double payout_level(const Solution& sol) {
    auto slope_gap = [&](double x) { return sol.at(x).v1 - 1.0; };
    if (slope_gap(1e-12) <= 0.0) return 0.0;
    if (sol.is_asymptotic()) return sol.b;
    double lo = 1e-12, hi = -1.0;
    for (double bp : sol.breakpoints()) {
        if (slope_gap(bp) < 0.0) {
            hi = bp;
            break;
        }
        lo = bp;
    }
    if (hi < 0.0) {
        double step = std::max(1e-3, top_breakpoint(sol));
        hi = lo + step;
        while (slope_gap(hi) >= 0.0) {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
            if (hi > 1e9) return std::numeric_limits<double>::infinity();
        }
    }
    for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (slope_gap(mid) >= 0.0) lo = mid; else hi = mid;
    }
    return lo;
}

VerificationReport hjb_residual(const Solution& sol, const ModelParams& p, double gamma,
                                const std::vector<double>& grid) {
    VerificationReport rep;
    rep.grid_points = grid.size();
    const double s2 = p.sigma * p.sigma;
    const double ystar = payout_level(sol);
    const double v_ystar = std::isfinite(ystar) ? sol.value(ystar) : 0.0;
    for (double x : grid) {
        const Eval e = sol.at(x);
        double gen;
        const double u_int = (e.v2 < 0.0) ? -p.mu * e.v1 / (s2 * e.v2) : std::numeric_limits<double>::infinity();
        if (u_int < 1.0)
            gen = -p.mu * p.mu * e.v1 * e.v1 / (2.0 * s2 * e.v2) + (p.eta - p.mu) * e.v1 - p.delta * e.v;
        else
            gen = 0.5 * s2 * e.v2 + p.eta * e.v1 - p.delta * e.v;
        double jump = 0.0;
        if (std::isfinite(ystar) && x > ystar) jump = std::max(0.0, v_ystar + x - ystar - e.v);
        const double r = std::fabs(gen + gamma * jump) / (1.0 + std::fabs(e.v));
        if (r > rep.max_hjb_residual || !std::isfinite(r)) {
            rep.max_hjb_residual = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
            rep.worst_x = x;
        }
    }
    return rep;
}

VerificationReport check_shape(const Solution& sol) {
    VerificationReport rep;
    ShapeFlags& f = rep.shape_flags;
    const auto grid = verification_grid(sol);
    rep.grid_points = grid.size();

    std::vector<Eval> ev;
    ev.reserve(grid.size());
    for (double x : grid) ev.push_back(sol.at(x));

    double prev_ratio = std::numeric_limits<double>::infinity();
    double prev_u = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Eval& e = ev[i];
        const double x = grid[i];
        if (!(e.v1 > 0.0)) f.increasing = false;
        if (e.v2 > 1e-12 * std::max(1.0, std::fabs(e.v1))) f.concave = false;
        if (e.v2 < -1e-12) {
            const double ratio = e.v1 / e.v2;
            if (ratio > prev_ratio + 1e-9 * std::fabs(prev_ratio)) f.ratio_decreasing = false;
            prev_ratio = ratio;
        }
        if (e.u < -1e-12 || e.u > 1.0 + 1e-12) f.retention = false;
        if (e.u < prev_u - 1e-12) f.retention = false;
        prev_u = e.u;
        if (x < sol.x_switch && !(e.u < 1.0)) f.retention = false;
        if (i > 0 && !(e.v >= ev[i - 1].v)) f.increasing = false;
    }

    if (!sol.is_asymptotic()) {
        // Tail identity of the top branch: (v' - gamma/(gamma+delta)) / v'' -> 1/lambda.
        const double lam = sol.constants.at("lambda");
        const double x = top_breakpoint(sol) + 10.0 / std::fabs(lam);
        const Eval e = sol.at(x);
        const double lim = (e.v1 - sol.gamma / (sol.gamma + sol.params.delta)) / e.v2;
        if (std::fabs(lim * lam - 1.0) > 1e-6) f.ratio_decreasing = false;
    }

    if (sol.b > 0.0) {
        if (std::fabs(sol.at(sol.b).v1 - 1.0) > 1e-8) f.barrier_slope = false;
    } else if (sol.at(1e-12).v1 > 1.0 + 1e-10) {
        f.barrier_slope = false;
    }
    if (sol.x_switch > 0.0 && std::fabs(sol.at(sol.x_switch).u - 1.0) > 1e-6) f.retention = false;

    for (std::size_t i = 0; i + 1 < sol.segments.size(); ++i) {
        const double bp = sol.segments[i].hi;
        const Eval l = sol.segments[i].f(bp);
        const Eval r = sol.segments[i + 1].f(bp);
        const BreakpointJump j{bp, l.v - r.v, l.v1 - r.v1, l.v2 - r.v2};
        rep.breakpoint_jumps.push_back(j);
        auto rel = [](double d, double a, double b) {
            return std::fabs(d) / std::max({std::fabs(a), std::fabs(b), 1e-300});
        };
        if (rel(j.dv, l.v, r.v) > 1e-6 || rel(j.dv1, l.v1, r.v1) > 1e-6 || rel(j.dv2, l.v2, r.v2) > 1e-6)
            f.smooth_fit = false;
    }
    return rep;
}

VerificationReport verify_solution(const Solution& sol, double tolerance) {
    VerificationReport rep = hjb_residual(sol, sol.params, sol.gamma, verification_grid(sol));
    const VerificationReport shape = check_shape(sol);
    rep.shape_flags = shape.shape_flags;
    rep.breakpoint_jumps = shape.breakpoint_jumps;
    rep.tolerance = tolerance;
    return rep;
}

LimitTable check_limits(const ModelParams& p, Branch branch, const std::vector<double>& gamma_list) {
    if (gamma_list.empty()) throw DomainError("check_limits: empty gamma list");
    for (std::size_t i = 1; i < gamma_list.size(); ++i)
        if (!(gamma_list[i] > gamma_list[i - 1])) throw DomainError("check_limits: gamma list must increase");
    const Solution inf = asymptotic(p, branch);
    LimitTable t{{}, inf.b, inf.value(inf.b), true, false};

    const std::size_t n = 2000;
    const double hi = inf.b + 1.0;
    for (double g : gamma_list) {
        const Solution s = solve(p, g);
        if (s.builder != Case::A1 && s.builder != Case::B1 && s.builder != Case::C1)
            throw RegimeError("check_limits: gamma " + std::to_string(g) + " is not in the top regime");
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double x = hi * static_cast<double>(i) / static_cast<double>(n);
            d = std::max(d, std::fabs(s.value(x) - inf.value(x)));
        }
        t.rows.push_back({g, s.b, s.value(s.b), d});
    }
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        if (t.rows[i].sup_distance > t.rows[i - 1].sup_distance * (1.0 + 1e-9) + 1e-15)
            t.distance_nonincreasing = false;
    const LimitRow& last = t.rows.back();
    t.endpoint_within = last.sup_distance <= 1e-3 && std::fabs(last.b - t.b_inf) <= 1e-3 &&
                        std::fabs(last.v_at_b - t.v_inf_at_b) <= 1e-3;
    return t;
}

}  // namespace divopt
