#include "divopt/numerics.hpp"

#include <cmath>

namespace divopt {

std::pair<double, double> quadratic_roots(double a2, double a1, double a0) {
    if (!(a2 > 0.0)) throw DomainError("quadratic_roots: leading coefficient must be positive");
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (!(disc > 0.0)) throw DomainError("quadratic_roots: non-positive discriminant");
    // Cancellation-free form: q carries the sign of a1.
    const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
    double r1 = q / a2;
    double r2 = (q != 0.0) ? a0 / q : -r1;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

GammaLaw::GammaLaw(double shape, double rate) : shape_(shape), rate_(rate) {
    if (!(shape > 1.0) || !std::isfinite(shape)) throw DomainError("GammaLaw: shape must exceed 1");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("GammaLaw: rate must be positive");
    lgamma_shape_ = std::lgamma(shape);
    log_norm_ = shape * std::log(rate) - lgamma_shape_;
}

double GammaLaw::log_pdf(double x) const {
    if (x < 0.0) throw DomainError("gamma_pdf: negative abscissa");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    return log_norm_ + (shape_ - 1.0) * std::log(x) - rate_ * x;
}

double gamma_pdf(const GammaLaw& law, double x) {
    if (x == 0.0) return 0.0;
    return std::exp(law.log_pdf(x));
}

double regularized_gamma_p(double a, double x, double lgamma_a) {
    if (x <= 0.0) return 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    const double log_prefix = a * std::log(x) - x - lgamma_a;
    if (x < a + 1.0) {
        double ap = a, term = 1.0 / a, sum = term;
        for (int n = 0; n < 100000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * eps) break;
        }
        return std::min(1.0, sum * std::exp(log_prefix));
    }
    // Modified Lentz evaluation of the continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double gamma_cdf(const GammaLaw& law, double x) {
    if (x < 0.0) throw DomainError("gamma_cdf: negative abscissa");
    if (std::isinf(x)) return 1.0;
    return regularized_gamma_p(law.shape_, law.rate_ * x, law.lgamma_shape_);
}

double gamma_inv_cdf(const GammaLaw& law, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("gamma_inv_cdf: probability must lie in (0,1)");
    double hi = law.shape() / law.rate();
    while (gamma_cdf(law, hi) < p) hi *= 2.0;
    auto cdf = [&](double x) { return gamma_cdf(law, x); };
    double x = invert_monotone(cdf, p, {0.0, hi}, 1e-15 * hi);
    // Newton polish with the exact density.
    for (int i = 0; i < 3; ++i) {
        const double pdf = gamma_pdf(law, x);
        if (!(pdf > 0.0)) break;
        const double step = (gamma_cdf(law, x) - p) / pdf;
        if (!std::isfinite(step) || x - step <= 0.0) break;
        x -= step;
        if (std::fabs(step) <= 1e-16 * x) break;
    }
    return x;
}

}  // namespace divopt
