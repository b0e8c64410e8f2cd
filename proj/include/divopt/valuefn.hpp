#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "divopt/model.hpp"
#include "divopt/numerics.hpp"

namespace divopt {

// Value, first and second derivative, and the maximizing retention level at one surplus level.
struct Eval {
    double v;
    double v1;
    double v2;
    double u;
};

// Analytic branch on the half-open interval (lo, hi].
struct Segment {
    double lo;
    double hi;
    std::function<Eval(double)> f;
};

enum class TransformKind { X1, X2 };

// Monotone change of variables z -> x used by the reduced-retention branches.
class Transform {
public:
    virtual ~Transform() = default;

    virtual TransformKind kind() const = 0;
    virtual double z_lo() const = 0;
    virtual double z_hi() const = 0;
    virtual double forward(double z) const = 0;
    virtual double derivative(double z) const = 0;
    virtual double inverse(double x) const = 0;
    virtual std::map<std::string, double> params() const = 0;
};

struct Solution {
    Regime regime;     // classification of (params, gamma)
    Case builder;      // closed form used to build this function
    ModelParams params;
    double gamma;      // +inf for the singular-control limit
    double b;
    double x_switch;
    std::vector<Segment> segments;
    std::map<std::string, double> constants;
    std::vector<std::shared_ptr<const Transform>> transforms;

    bool is_asymptotic() const;
    std::vector<double> breakpoints() const;
    // v, v', v'' and u* at x > 0; at a breakpoint the lower segment is used.
    Eval at(double x) const;
    double value(double x) const;  // also accepts x == 0
};

struct Derivs {
    double v;
    double v1;
    double v2;
};

Derivs eval(const Solution& sol, double x);

// H_beta(z) = int_{e^-beta}^{z} dy / (y^2 g(y)).
double hbeta(const GammaLaw& law, double beta, double z);

// fbar_beta(z) with slope = eta_bar (mu - eta).
double fbar(const GammaLaw& law, double beta, double lead_coeff, double slope, double z);

GammaLaw gamma_law(const ModelParams& p, double gamma);

Solution build_A1(const ModelParams& p, double gamma, double b);
Solution build_A2(const ModelParams& p, double gamma);
Solution build_B1(const ModelParams& p, double gamma, double b);
Solution build_B2(const ModelParams& p, double gamma, double b);
Solution build_B3(const ModelParams& p, double gamma);
Solution build_C1(const ModelParams& p, double gamma, double b);
Solution build_C2(const ModelParams& p, double gamma, double b);

// Switch level below which the B1 solution reduces retention.
double x_bar(const ModelParams& p);
// Switch level below which the C1 solution reduces retention.
double x_hat(const ModelParams& p);
// Largest barrier admitted by build_B2 (its optimal barrier); requires gamma2 < gamma < gamma1.
double b_gamma_B2(const ModelParams& p, double gamma);
// Largest barrier admitted by build_C2 (its optimal barrier); requires gamma <= gamma_bar1.
double b_bar1(const ModelParams& p, double gamma);

// Optimal barrier and value function for the classified regime.
Solution solve(const ModelParams& p, double gamma);

// Value function for barrier b at rate gamma, choosing the closed form whose domain contains b.
// Throws DomainError when no closed form admits b.
Solution build(const ModelParams& p, double gamma, double b);

// gamma -> infinity limit (barrier paid continuously).
Solution asymptotic(const ModelParams& p, Branch branch);

// Thresholds computed once per parameter set and shared across calls.
const Thresholds& cached_thresholds(const ModelParams& p);

}  // namespace divopt
