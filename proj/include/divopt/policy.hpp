#pragma once

#include <memory>
#include <variant>

#include "divopt/valuefn.hpp"

namespace divopt {

// Feedback retention u*(x) taken from a value function, with that function's barrier.
struct OptimalStrategy {
    std::shared_ptr<const Solution> solution;
};

// Fixed retention level and dividend barrier (barrier may be +inf: never pay).
struct ConstantRetention {
    double u;
    double barrier;
};

struct Strategy {
    std::variant<OptimalStrategy, ConstantRetention> kind;

    static Strategy optimal(Solution sol);
    static Strategy constant(double u, double barrier);

    double barrier() const;
};

// Retention fraction at surplus x > 0. Throws NumericalError if the analytic value leaves
// [0, 1] by more than 1e-8.
double retention(const Strategy& s, double x);

// Amount paid at a dividend decision with pre-decision surplus x: max(x - b, 0).
double dividend(const Strategy& s, double x);

}  // namespace divopt
