#pragma once

#include <vector>

#include "divopt/model.hpp"
#include "divopt/valuefn.hpp"

namespace divopt {

struct ShapeFlags {
    bool increasing = true;
    bool concave = true;
    bool ratio_decreasing = true;
    bool smooth_fit = true;
    bool barrier_slope = true;
    bool retention = true;  // u* in [0,1], nondecreasing, < 1 below the switch and = 1 at it

    bool all() const { return increasing && concave && ratio_decreasing && smooth_fit && barrier_slope && retention; }
};

struct BreakpointJump {
    double x;
    double dv;
    double dv1;
    double dv2;
};

struct VerificationReport {
    double max_hjb_residual = 0.0;
    double worst_x = 0.0;
    double tolerance = 1e-6;
    std::size_t grid_points = 0;
    ShapeFlags shape_flags;
    std::vector<BreakpointJump> breakpoint_jumps;

    bool passed() const { return max_hjb_residual <= tolerance && shape_flags.all(); }
};

// Log-spaced grid on (1e-4, top + 5/|lambda|) plus points clustered around every breakpoint;
// nothing within 1e-7 of a breakpoint.
std::vector<double> verification_grid(const Solution& sol, std::size_t n = 2000);

// Level where v' first drops below one (0 when v'(0+) <= 1). This is the maximizer of the
// dividend term for a concave v.
double payout_level(const Solution& sol);

// HJB residual at every grid point, normalized by 1 + |v|.
VerificationReport hjb_residual(const Solution& sol, const ModelParams& p, double gamma,
                                const std::vector<double>& grid);

VerificationReport check_shape(const Solution& sol);

// Residual and shape checks combined on the default grid.
VerificationReport verify_solution(const Solution& sol, double tolerance = 1e-6);

struct LimitRow {
    double gamma;
    double b;
    double v_at_b;
    double sup_distance;
};

struct LimitTable {
    std::vector<LimitRow> rows;
    double b_inf;
    double v_inf_at_b;
    bool distance_nonincreasing;
    bool endpoint_within;  // last row within 1e-3 in distance and in (b, v(b))
};

// gamma_list must be increasing and lie in the branch's top regime (A1, B1 or C1).
LimitTable check_limits(const ModelParams& p, Branch branch, const std::vector<double>& gamma_list);

}  // namespace divopt
