#include "divopt/policy.hpp"

#include <algorithm>
#include <cmath>

#include "divopt/errors.hpp"

namespace divopt {

Strategy Strategy::optimal(Solution sol) {
    return Strategy{OptimalStrategy{std::make_shared<const Solution>(std::move(sol))}};
}

Strategy Strategy::constant(double u, double barrier) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("retention level must lie in [0,1]");
    if (!(barrier >= 0.0)) throw DomainError("barrier must be nonnegative");
    return Strategy{ConstantRetention{u, barrier}};
}

double Strategy::barrier() const {
    if (const auto* o = std::get_if<OptimalStrategy>(&kind)) return o->solution->b;
    return std::get<ConstantRetention>(kind).barrier;
}

double retention(const Strategy& s, double x) {
    if (!(x > 0.0)) throw DomainError("retention: surplus must be positive");
    if (const auto* c = std::get_if<ConstantRetention>(&s.kind)) return c->u;
    const Solution& sol = *std::get<OptimalStrategy>(s.kind).solution;
    if (x >= sol.x_switch) return 1.0;
    const double u = sol.at(x).u;
    if (u < -1e-8 || u > 1.0 + 1e-8) throw NumericalError("retention outside [0,1]", x);
    return std::clamp(u, 0.0, 1.0);
}

double dividend(const Strategy& s, double x) {
    if (!(x >= 0.0)) throw DomainError("dividend: surplus must be nonnegative");
    return std::max(x - s.barrier(), 0.0);
}

}  // namespace divopt
