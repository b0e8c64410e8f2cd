#pragma once

// Exponential kernels shared by model and valuefn.

#include <cmath>
#include <utility>

#include "divopt/model.hpp"

namespace divopt::detail {

// h(x) = (a1 e^{tp x} - a2 e^{tm x}) / scale and its derivatives.
struct ExpKernel {
    double a1, a2, tp, tm, scale;

    double h(double x) const { return (a1 * std::exp(tp * x) - a2 * std::exp(tm * x)) / scale; }
    double h1(double x) const { return (a1 * tp * std::exp(tp * x) - a2 * tm * std::exp(tm * x)) / scale; }
    double h2(double x) const {
        return (a1 * tp * tp * std::exp(tp * x) - a2 * tm * tm * std::exp(tm * x)) / scale;
    }
    double ratio(double x) const {
        // h/h' written in terms of e^{(tm - tp) x} so large x does not overflow.
        const double r = std::exp((tm - tp) * x);
        return (a1 - a2 * r) / (a1 * tp - a2 * tm * r);
    }
};

inline std::pair<double, double> thetas(const ModelParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double root = std::sqrt(p.eta * p.eta + 2.0 * s2 * p.delta);
    return {(-p.eta + root) / s2, (-p.eta - root) / s2};  // (theta_plus, theta_minus)
}

inline ExpKernel kernel_h1(const ModelParams& p) {
    const auto [tp, tm] = thetas(p);
    return {1.0, 1.0, tp, tm, 1.0};
}

inline ExpKernel kernel_h2(const ModelParams& p) {
    const auto [tp, tm] = thetas(p);
    const double c = (2.0 * p.eta - p.mu) / (2.0 * p.delta);
    return {1.0 - tm * c, 1.0 - tp * c, tp, tm, tp - tm};
}

inline double xhat_of(const ModelParams& p) { return p.sigma * p.sigma / (p.mu * p.kappa()); }

inline ExpKernel kernel_h3(const ModelParams& p) {
    const auto [tp, tm] = thetas(p);
    const double K = p.kappa();
    const double e = p.delta * p.eta_bar() / K;
    const double xh = xhat_of(p);
    const double lead = e * std::pow(xh, -1.0 / K);
    const double pw = std::pow(xh, e);
    return {lead - tm * pw, lead - tp * pw, tp, tm, tp - tm};
}

}  // namespace divopt::detail
