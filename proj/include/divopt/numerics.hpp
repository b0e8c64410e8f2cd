#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "divopt/errors.hpp"

namespace divopt {

inline constexpr double kRootTol = 1e-12;
inline constexpr double kQuadRelTol = 1e-10;

struct Bracket {
    double lo;
    double hi;
};

// Real roots of a2*r^2 + a1*r + a0, ascending. Requires a2 > 0 and a positive discriminant.
std::pair<double, double> quadratic_roots(double a2, double a1, double a0);

// Brent's method. Terminates when the bracket is narrower than tol (absolute, on the argument)
// or an exact zero is hit.
template <class F>
double find_root(F&& f, Bracket br, double tol = kRootTol) {
    if (!(br.lo <= br.hi)) throw DomainError("find_root: empty bracket");
    double a = br.lo, b = br.hi;
    double fa = f(a), fb = f(b);
    if (!std::isfinite(fa)) throw NumericalError("find_root: non-finite value", a);
    if (!std::isfinite(fb)) throw NumericalError("find_root: non-finite value", b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw BracketError("find_root: no sign change on bracket");

    double c = a, fc = fa, d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 400; ++iter) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (m > 0 ? tol1 : -tol1);
        fb = f(b);
        if (!std::isfinite(fb)) throw NumericalError("find_root: non-finite value", b);
    }
    return b;
}

template <class F>
double invert_monotone(F&& f, double target, Bracket br, double tol = kRootTol) {
    const double flo = f(br.lo), fhi = f(br.hi);
    if (!(target >= std::min(flo, fhi) && target <= std::max(flo, fhi)))
        throw RangeError("invert_monotone: target outside the range of f on the bracket");
    if (flo == target) return br.lo;
    if (fhi == target) return br.hi;
    return find_root([&](double x) { return f(x) - target; }, br, tol);
}

// Grows hi geometrically (doubling) from the initial bracket until f changes sign; hi <= cap.
template <class F>
Bracket expand_upward(F&& f, Bracket br, double cap = 1e6) {
    const double flo = f(br.lo);
    double hi = br.hi;
    while (true) {
        const double fhi = f(hi);
        if ((flo > 0) != (fhi > 0) || fhi == 0.0) return {br.lo, hi};
        if (hi >= cap) throw BracketError("expand_upward: no sign change below cap");
        hi = std::min(2.0 * hi, cap);
    }
}

namespace detail {

inline constexpr std::array<double, 8> kKronrodX = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussW = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
    double a, b;
    std::array<double, N> value;
    std::array<double, N> error;
    std::array<double, N> absval;
    double worst;
};

template <std::size_t N, class F>
Panel<N> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Panel<N> p{a, b, {}, {}, {}, 0.0};
    std::array<double, N> gauss{};
    auto eval = [&](double x) {
        std::array<double, N> y = f(x);
        for (double v : y)
            if (!std::isfinite(v)) throw NumericalError("integrate: non-finite integrand", x);
        return y;
    };
    const std::array<double, N> fc = eval(c);
    for (std::size_t k = 0; k < N; ++k) {
        p.value[k] = kKronrodW[7] * fc[k];
        p.absval[k] = kKronrodW[7] * std::fabs(fc[k]);
        gauss[k] = kGaussW[3] * fc[k];
    }
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kKronrodX[j];
        const std::array<double, N> f1 = eval(c - dx);
        const std::array<double, N> f2 = eval(c + dx);
        for (std::size_t k = 0; k < N; ++k) {
            p.value[k] += kKronrodW[j] * (f1[k] + f2[k]);
            p.absval[k] += kKronrodW[j] * (std::fabs(f1[k]) + std::fabs(f2[k]));
            if (j % 2 == 1) gauss[k] += kGaussW[j / 2] * (f1[k] + f2[k]);
        }
    }
    for (std::size_t k = 0; k < N; ++k) {
        p.value[k] *= h;
        p.absval[k] *= std::fabs(h);
        gauss[k] *= h;
        p.error[k] = std::fabs(p.value[k] - gauss[k]);
    }
    return p;
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) quadrature of a vector-valued integrand.
// Every component must satisfy err <= max(rel_tol*|I|, roundoff floor).
template <std::size_t N, class F>
std::array<double, N> integrate_n(F&& f, double a, double b, double rel_tol = kQuadRelTol) {
    if (!(a <= b)) throw DomainError("integrate: lower limit exceeds upper limit");
    std::array<double, N> total{};
    if (a == b) return total;

    using P = detail::Panel<N>;
    auto cmp = [](const P& x, const P& y) { return x.worst < y.worst; };
    std::priority_queue<P, std::vector<P>, decltype(cmp)> heap(cmp);
    auto score = [](P& p) {
        double w = 0.0;
        for (std::size_t k = 0; k < N; ++k) w = std::max(w, p.error[k]);
        p.worst = w;
    };

    P first = detail::gk15<N>(f, a, b);
    score(first);
    heap.push(first);
    const double eps = std::numeric_limits<double>::epsilon();

    std::array<double, N> val{}, err{}, absv{};
    for (std::size_t k = 0; k < N; ++k) {
        val[k] = first.value[k];
        err[k] = first.error[k];
        absv[k] = first.absval[k];
    }
    auto converged = [&]() {
        for (std::size_t k = 0; k < N; ++k) {
            const double target = std::max(rel_tol * std::fabs(val[k]), 50.0 * eps * absv[k]);
            if (err[k] > target) return false;
        }
        return true;
    };

    int splits = 0;
    while (!converged()) {
        if (splits++ > 5000) throw NumericalError("integrate: subdivision limit reached", heap.top().a);
        P p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            // Interval exhausted at machine precision; accept its contribution.
            P q = p;
            for (std::size_t k = 0; k < N; ++k) {
                err[k] -= q.error[k];
                q.error[k] = 0.0;
            }
            q.worst = 0.0;
            heap.push(q);
            continue;
        }
        P l = detail::gk15<N>(f, p.a, mid);
        P r = detail::gk15<N>(f, mid, p.b);
        score(l);
        score(r);
        for (std::size_t k = 0; k < N; ++k) {
            val[k] += l.value[k] + r.value[k] - p.value[k];
            err[k] += l.error[k] + r.error[k] - p.error[k];
            absv[k] += l.absval[k] + r.absval[k] - p.absval[k];
        }
        heap.push(l);
        heap.push(r);
    }

    // Final sum from the panels, ordered by abscissa, to avoid drift in the running totals.
    std::vector<P> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const P& x, const P& y) { return x.a < y.a; });
    for (const P& p : panels)
        for (std::size_t k = 0; k < N; ++k) total[k] += p.value[k];
    return total;
}

template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kQuadRelTol) {
    auto g = [&](double x) { return std::array<double, 1>{f(x)}; };
    return integrate_n<1>(g, a, b, rel_tol)[0];
}

// Gamma distribution with density rate^shape / Gamma(shape) * x^(shape-1) * exp(-rate*x).
class GammaLaw {
public:
    GammaLaw(double shape, double rate);

    double shape() const { return shape_; }
    double rate() const { return rate_; }

    double log_pdf(double x) const;

private:
    double shape_;
    double rate_;
    double log_norm_;  // shape*ln(rate) - lnGamma(shape)
    double lgamma_shape_;

    friend double gamma_cdf(const GammaLaw&, double);
};

double gamma_pdf(const GammaLaw& law, double x);
double gamma_cdf(const GammaLaw& law, double x);
double gamma_inv_cdf(const GammaLaw& law, double p);

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued fraction otherwise.
double regularized_gamma_p(double a, double x, double lgamma_a);

}  // namespace divopt
