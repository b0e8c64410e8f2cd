#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "divopt/model.hpp"

namespace testsupport {

inline const divopt::ModelParams kRow1{0.5, 0.3, 1.2, 0.2};
inline const divopt::ModelParams kRow2{1.5, 0.3, 0.8, 0.5};
inline const divopt::ModelParams kRow3{1.5, 0.5, 0.7, 0.7};

struct Instance {
    const char* name;
    divopt::ModelParams p;
    double log2_gamma;
};

// One instance per regime reachable from the three parameter rows.
inline std::vector<Instance> regime_instances() {
    return {
        {"row1 A1", kRow1, -0.2},  {"row1 A1 hi", kRow1, 3.0},  {"row1 A2", kRow1, -2.4},
        {"row2 B1", kRow2, 1.0},   {"row2 B2", kRow2, -0.4},    {"row2 B3", kRow2, -1.4},
        {"row3 C1", kRow3, 2.2},   {"row3 C2", kRow3, 0.8},     {"row3 C2 lo", kRow3, -2.0},
    };
}

// Composite trapezoid rule on n intervals.
template <class F>
double trapezoid(F&& f, double a, double b, long n) {
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
    return s * h;
}

// Fixed-seed generator for hand-rolled property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

private:
    std::mt19937_64 rng_;
};

inline bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace testsupport
