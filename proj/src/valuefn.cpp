#include "divopt/valuefn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <tuple>

#include "divopt/errors.hpp"
#include "kernels.hpp"
#include "transforms.hpp"

namespace divopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond this many decay lengths past the top breakpoint the exponential term is dropped.
constexpr double kTailDecayLengths = 50.0;

using detail::ExpKernel;
using detail::GammaTransform;
using detail::X1Transform;

void require_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive and finite");
}

void require_branch(const ModelParams& p, Branch want, const char* who) {
    if (branch_of(p) != want)
        throw RegimeError(std::string(who) + ": parameters belong to branch " + to_string(branch_of(p)));
}

Solution skeleton(const ModelParams& p, double gamma, Case builder) {
    Solution s{classify(p, gamma, cached_thresholds(p)), builder, p, gamma, 0.0, 0.0, {}, {}, {}};
    return s;
}

// c e^{lambda (x - x0)} + (gamma/D) [x - b + vb + eta/D] on (x0, inf).
Segment top_segment(double x0, double c, double lambda, double gamma, double delta, double b, double vb,
                    double drift) {
    const double D = gamma + delta;
    const double slope = gamma / D;
    const double shift = vb - b + drift / D;
    const double cutoff = x0 + kTailDecayLengths / std::fabs(lambda);
    return {x0, kInf, [=](double x) {
                const double e = (x > cutoff) ? 0.0 : c * std::exp(lambda * (x - x0));
                return Eval{e + slope * (x + shift), lambda * e + slope, lambda * lambda * e, 1.0};
            }};
}

// Straight line of slope one on (x0, inf), the top branch of the singular-control limit.
Segment linear_segment(double x0, double v0) {
    return {x0, kInf, [=](double x) { return Eval{v0 + (x - x0), 1.0, 0.0, 1.0}; }};
}

Segment kernel_segment(double lo, double hi, double scale, ExpKernel k, double shift) {
    return {lo, hi, [=](double x) {
                const double y = x - shift;
                return Eval{scale * k.h(y), scale * k.h1(y), scale * k.h2(y), 1.0};
            }};
}

// Reduced-retention branch parameterized by x1: v' = e^{-z}.
Segment x1_segment(double lo, double hi, std::shared_ptr<const X1Transform> t, const ModelParams& p) {
    const double eb = p.eta_bar(), gap = p.mu - p.eta, s2 = p.sigma * p.sigma;
    return {lo, hi, [=](double x) {
                const double z = t->inverse(x);
                const double d = t->derivative(z);
                const double ez = std::exp(-z);
                return Eval{ez * (d / eb - gap) / p.delta, ez, -ez / d, p.mu * d / s2};
            }};
}

// Reduced-retention branch parameterized by x2, with the gamma-rate payout to barrier b.
Segment x2_segment(double lo, double hi, std::shared_ptr<const GammaTransform> t, const ModelParams& p,
                   double gamma, double b, double vb) {
    const double eb = p.eta_bar(), gap = p.mu - p.eta, s2 = p.sigma * p.sigma, D = p.delta + gamma;
    return {lo, hi, [=](double x) {
                const auto pt = t->locate(x);
                const double d = t->deriv_of(pt);
                const double ez = 1.0 / pt.w;
                const double v = (ez * (d / eb - gap) + gamma * (vb + x - b)) / D;
                return Eval{v, ez, -ez / d, p.mu * d / s2};
            }};
}

// Smallest y >= 0 with ratio(y) >= target, where ratio is increasing.
double invert_ratio(const ExpKernel& k, double target) {
    if (k.ratio(0.0) >= target) throw RangeError("barrier equation has no positive solution");
    if (!(target < 1.0 / k.tp)) throw RangeError("barrier equation has no finite solution");
    auto r = [&](double y) { return k.ratio(y); };
    const Bracket br = expand_upward([&](double y) { return r(y) - target; }, {0.0, 1.0 / k.tp}, 1e6);
    return invert_monotone(r, target, br, 1e-14);
}

struct BQuantities {
    double eb, K, c21, c22, xbar;
};

BQuantities b_quantities(const ModelParams& p) {
    const double eb = p.eta_bar(), K = p.kappa();
    const double c21 = eb * (p.mu - p.eta) / K;
    const double c22 = (p.delta * eb * p.mu + 2.0 * p.eta - p.mu) / (2.0 * p.delta * eb * (p.mu - p.eta));
    const double xbar = c21 / K * std::log(c22) + eb * (2.0 * p.eta - p.mu) / (2.0 * K);
    return {eb, K, c21, c22, xbar};
}

// Pieces shared by the gamma-law builders (B2, B3, C2).
struct GammaSetup {
    double alpha, lambda, gpdf_alpha, c32;
    GammaLaw law;
};

GammaSetup gamma_setup(const ModelParams& p, double gamma) {
    const double alpha = alpha_gamma(p, gamma);
    if (!(alpha >= 1.0)) throw RegimeError("alpha_gamma below one: gamma is above the reduced-retention range");
    const double lambda = lambda_gamma(p, gamma);
    GammaLaw law = gamma_law(p, gamma);
    const double c32 = -p.mu / (p.sigma * p.sigma * alpha * lambda * lambda);
    return {alpha, lambda, gamma_pdf(law, alpha), c32, law};
}

// State of the B2 construction needed to locate M2.
struct B2Ctx {
    const ModelParams& p;
    BQuantities q;
    GammaSetup gs;
    double slope;

    double c31(double beta) const {
        const double base = p.sigma * p.sigma / (p.mu * gs.alpha * gs.gpdf_alpha);
        return base + slope * hbeta(gs.law, beta, gs.alpha);
    }
    double f6(double beta) const {
        const double w = std::exp(-beta);
        return w * gamma_pdf(gs.law, w) * c31(beta) / q.c21;
    }
    double gbar(double beta) const {
        const double f = f6(beta);
        if (!(f > 1.0)) return -1e12;
        return f + std::log((f - 1.0) / (p.delta * q.eb));
    }
    double m_of(double beta) const {
        return std::log((f6(beta) - 1.0) / (p.delta * q.eb)) / q.K + beta;
    }
    double b_opt() const {
        const double M = m_of(0.0);
        return q.c21 * (p.delta * q.eb / q.K * std::expm1(q.K * M) + M);
    }
};

void require_b2_gamma(const ModelParams& p, double gamma) {
    require_branch(p, Branch::B, "build_B2");
    require_gamma(gamma);
    const Thresholds& th = cached_thresholds(p);
    if (!(gamma > *th.gamma2 && gamma < *th.gamma1))
        throw RegimeError("build_B2: gamma must lie strictly between gamma2 and gamma1");
}

struct CQuantities {
    double K, pe, xhat;
};

CQuantities c_quantities(const ModelParams& p) {
    const double K = p.kappa();
    return {K, p.delta * p.eta_bar() / K, detail::xhat_of(p)};
}

Segment power_segment(double hi, double coef, const ModelParams& p) {
    const CQuantities q = c_quantities(p);
    const double ucoef = p.mu * q.K / (p.sigma * p.sigma);
    return {0.0, hi, [=](double x) {
                const double xp = coef * std::pow(x, q.pe);
                return Eval{xp, q.pe * xp / x, q.pe * (q.pe - 1.0) * xp / (x * x), ucoef * x};
            }};
}

void finish(Solution& s) {
    for (std::size_t i = 1; i < s.segments.size(); ++i)
        if (!(s.segments[i].lo == s.segments[i - 1].hi))
            throw NumericalError("segments do not abut", s.segments[i].lo);
    for (const auto& seg : s.segments)
        if (!(seg.hi > seg.lo)) throw NumericalError("empty segment", seg.lo);
    s.constants["b"] = s.b;
    s.constants["x_switch"] = s.x_switch;
}

}  // namespace

bool Solution::is_asymptotic() const { return std::isinf(gamma); }

std::vector<double> Solution::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) out.push_back(segments[i].hi);
    return out;
}

Eval Solution::at(double x) const {
    if (!(x > 0.0)) throw DomainError("value function is evaluated at x > 0 only");
    auto it = std::lower_bound(segments.begin(), segments.end(), x,
                               [](const Segment& s, double v) { return s.hi < v; });
    if (it == segments.end()) --it;
    return it->f(x);
}

double Solution::value(double x) const {
    if (x == 0.0) return 0.0;
    return at(x).v;
}

Derivs eval(const Solution& sol, double x) {
    const Eval e = sol.at(x);
    return {e.v, e.v1, e.v2};
}

GammaLaw gamma_law(const ModelParams& p, double gamma) {
    const double eb = p.eta_bar();
    return GammaLaw(eb * (p.delta + gamma) + 1.0, gamma * eb);
}

double hbeta(const GammaLaw& law, double beta, double z) {
    const double lo = std::exp(-beta);
    if (z < lo * (1.0 - 4.0 * std::numeric_limits<double>::epsilon()))
        throw DomainError("hbeta: z below e^{-beta}");
    if (z <= lo) return 0.0;
    return integrate([&](double y) { return detail::inv_y2g(law, y); }, lo, z, 1e-13);
}

double fbar(const GammaLaw& law, double beta, double lead_coeff, double slope, double z) {
    const double lo = std::exp(-beta);
    if (z < lo * (1.0 - 4.0 * std::numeric_limits<double>::epsilon()))
        throw DomainError("fbar: z below e^{-beta}");
    if (z <= lo) return 0.0;
    auto f = [&](double y) {
        const double a = detail::inv_y2g(law, y);
        return std::array<double, 2>{a, gamma_cdf(law, y) * a};
    };
    const auto hj = integrate_n<2>(f, lo, z, 1e-13);
    const double Gz = gamma_cdf(law, z);
    return lead_coeff * (Gz - gamma_cdf(law, lo)) - slope * (Gz * hj[0] - hj[1]);
}

const Thresholds& cached_thresholds(const ModelParams& p) {
    static std::mutex mu;
    static std::map<std::tuple<double, double, double, double>, Thresholds> cache;
    const auto key = std::make_tuple(p.delta, p.sigma, p.mu, p.eta);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    Thresholds th = thresholds(p);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, th).first->second;
}

double x_bar(const ModelParams& p) {
    require_branch(p, Branch::B, "x_bar");
    return b_quantities(p).xbar;
}

double x_hat(const ModelParams& p) {
    require_branch(p, Branch::C, "x_hat");
    return detail::xhat_of(p);
}

Solution build_A1(const ModelParams& p, double gamma, double b) {
    require_branch(p, Branch::A, "build_A1");
    require_gamma(gamma);
    if (!(b > 0.0)) throw DomainError("build_A1: b must be positive (use build_A2 for b = 0)");
    Solution s = skeleton(p, gamma, Case::A1);
    const ExpKernel k = detail::kernel_h1(p);
    const double lam = lambda_gamma(p, gamma), D = gamma + p.delta;
    const double c11 = (gamma / D) * (1.0 - p.eta * lam / D) / (k.h1(b) - p.delta * lam * k.h(b) / D);
    const double vb = c11 * k.h(b);
    const double c12 = (p.delta * vb - gamma * p.eta / D) / D;
    s.b = b;
    s.x_switch = 0.0;
    s.segments.push_back(kernel_segment(0.0, b, c11, k, 0.0));
    s.segments.push_back(top_segment(b, c12, lam, gamma, p.delta, b, vb, p.eta));
    s.constants = {{"c11", c11}, {"c12", c12}, {"lambda", lam}, {"theta_plus", k.tp}, {"theta_minus", k.tm}};
    finish(s);
    return s;
}

Solution build_A2(const ModelParams& p, double gamma) {
    require_branch(p, Branch::A, "build_A2");
    require_gamma(gamma);
    if (gamma > *cached_thresholds(p).gamma0) throw RegimeError("build_A2: requires gamma <= gamma0");
    Solution s = skeleton(p, gamma, Case::A2);
    const double lam = lambda_gamma(p, gamma), D = gamma + p.delta;
    const double c = -gamma * p.eta / (D * D);
    s.segments.push_back(top_segment(0.0, c, lam, gamma, p.delta, 0.0, 0.0, p.eta));
    s.constants = {{"lambda", lam}, {"c", c}};
    finish(s);
    return s;
}

Solution build_B1(const ModelParams& p, double gamma, double b) {
    require_branch(p, Branch::B, "build_B1");
    require_gamma(gamma);
    const BQuantities q = b_quantities(p);
    if (!(b > q.xbar)) throw DomainError("build_B1: b must exceed x_bar (use build_B2 or build_B3)");
    Solution s = skeleton(p, gamma, Case::B1);
    const ExpKernel k = detail::kernel_h2(p);
    const double lam = lambda_gamma(p, gamma), D = gamma + p.delta;
    const double y = b - q.xbar;
    const double P = std::pow(q.c22, -1.0 / q.K);
    const double num = gamma / D - lam * p.eta * gamma / (D * D);
    const double M = std::log(num / (P * (k.h1(y) - lam * p.delta * k.h(y) / D)));
    const double scale = std::exp(M) * P;
    const double c23 = scale * p.delta * k.h(y) / D - p.eta * gamma / (D * D);
    const double vb = scale * k.h(y);
    const double zbar = std::log(q.c22) / q.K - M;
    auto t = std::make_shared<const X1Transform>(q.c21, q.K, p.delta * q.eb, M, zbar);
    s.b = b;
    s.x_switch = q.xbar;
    s.segments.push_back(x1_segment(0.0, q.xbar, t, p));
    s.segments.push_back(kernel_segment(q.xbar, b, scale, k, q.xbar));
    s.segments.push_back(top_segment(b, c23, lam, gamma, p.delta, b, vb, p.eta));
    s.transforms.push_back(t);
    s.constants = {{"M", M}, {"c21", q.c21}, {"c22", q.c22}, {"c23", c23}, {"x_bar", q.xbar},
                   {"lambda", lam}, {"theta_plus", k.tp}, {"theta_minus", k.tm}, {"z_bar", zbar}};
    finish(s);
    return s;
}

double b_gamma_B2(const ModelParams& p, double gamma) {
    require_b2_gamma(p, gamma);
    const B2Ctx ctx{p, b_quantities(p), gamma_setup(p, gamma), p.eta_bar() * (p.mu - p.eta)};
    return ctx.b_opt();
}

Solution build_B2(const ModelParams& p, double gamma, double b) {
    require_b2_gamma(p, gamma);
    const B2Ctx ctx{p, b_quantities(p), gamma_setup(p, gamma), p.eta_bar() * (p.mu - p.eta)};
    const double bopt = ctx.b_opt();
    if (!(b > 0.0) || b > bopt * (1.0 + 1e-12))
        throw DomainError("build_B2: b must lie in (0, b_gamma]");

    const double target = ctx.q.K * (1.0 + b / ctx.q.c21);
    double M2 = 0.0;
    if (ctx.gbar(0.0) - target > 1e-12 * target) {
        auto h = [&](double beta) { return ctx.gbar(beta) - target; };
        const Bracket br = expand_upward(h, {0.0, 0.25}, 700.0);
        M2 = find_root(h, br, 1e-14);
    }
    const double M = ctx.m_of(M2);
    const double k3 = ctx.c31(M2);
    const double zhi = std::log(ctx.gs.alpha);
    if (!(zhi > -M2)) throw NumericalError("build_B2: alpha_gamma below e^{-M2}");

    auto t1 = std::make_shared<const X1Transform>(ctx.q.c21, ctx.q.K, p.delta * ctx.q.eb, M, -M2);
    auto t2 = std::make_shared<const GammaTransform>(ctx.gs.law, M2, k3, ctx.slope, b, zhi);
    const double xb = t2->forward(zhi);
    const double vb = ctx.q.c21 * std::exp(M2) * std::expm1(ctx.q.K * (M - M2));

    Solution s = skeleton(p, gamma, Case::B2);
    s.b = b;
    s.x_switch = xb;
    s.segments.push_back(x1_segment(0.0, b, t1, p));
    s.segments.push_back(x2_segment(b, xb, t2, p, gamma, b, vb));
    s.segments.push_back(top_segment(xb, ctx.gs.c32, ctx.gs.lambda, gamma, p.delta, b, vb, p.eta));
    s.transforms = {t1, t2};
    s.constants = {{"M", M}, {"M2", M2}, {"alpha", ctx.gs.alpha}, {"c21", ctx.q.c21}, {"c31", k3},
                   {"c32", ctx.gs.c32}, {"lambda", ctx.gs.lambda}, {"b_gamma", bopt}, {"x1_at_b", t1->forward(-M2)}};
    finish(s);
    return s;
}

Solution build_B3(const ModelParams& p, double gamma) {
    require_branch(p, Branch::B, "build_B3");
    require_gamma(gamma);
    if (gamma > *cached_thresholds(p).gamma2) throw RegimeError("build_B3: requires gamma <= gamma2");
    const GammaSetup gs = gamma_setup(p, gamma);
    const double gap = p.mu - p.eta, slope = p.eta_bar() * gap;
    const double za = std::log(gs.alpha);
    const double rhs0 = p.mu / (2.0 * gs.alpha * gs.gpdf_alpha);
    auto F = [&](double M) {
        const double w = std::exp(M);
        return gap / (w * gamma_pdf(gs.law, w)) - rhs0 - gap * hbeta(gs.law, -M, gs.alpha);
    };
    double M = 0.0;
    if (F(0.0) > 0.0) M = find_root(F, {0.0, za}, 1e-14);
    const double wM = std::exp(M);
    const double c33 = slope / (wM * gamma_pdf(gs.law, wM));
    auto t = std::make_shared<const GammaTransform>(gs.law, -M, c33, slope, 0.0, za);
    const double x0 = t->forward(za);

    Solution s = skeleton(p, gamma, Case::B3);
    s.b = 0.0;
    s.x_switch = x0;
    s.segments.push_back(x2_segment(0.0, x0, t, p, gamma, 0.0, 0.0));
    s.segments.push_back(top_segment(x0, gs.c32, gs.lambda, gamma, p.delta, 0.0, 0.0, p.eta));
    s.transforms = {t};
    s.constants = {{"M", M}, {"alpha", gs.alpha}, {"c33", c33}, {"c32", gs.c32}, {"lambda", gs.lambda}};
    finish(s);
    return s;
}

Solution build_C1(const ModelParams& p, double gamma, double b) {
    require_branch(p, Branch::C, "build_C1");
    require_gamma(gamma);
    const CQuantities q = c_quantities(p);
    if (!(b > q.xhat)) throw DomainError("build_C1: b must exceed x_hat (use build_C2)");
    Solution s = skeleton(p, gamma, Case::C1);
    const ExpKernel k = detail::kernel_h3(p);
    const double lam = lambda_gamma(p, gamma), D = gamma + p.delta;
    const double y = b - q.xhat;
    const double c41 = (gamma / D - p.mu * gamma * lam / (D * D)) / (k.h1(y) - lam * p.delta * k.h(y) / D);
    const double c42 = p.delta * c41 * k.h(y) / D - p.mu * gamma / (D * D);
    const double vb = c41 * k.h(y);
    s.b = b;
    s.x_switch = q.xhat;
    s.segments.push_back(power_segment(q.xhat, c41, p));
    s.segments.push_back(kernel_segment(q.xhat, b, c41, k, q.xhat));
    s.segments.push_back(top_segment(b, c42, lam, gamma, p.delta, b, vb, p.mu));
    s.constants = {{"c41", c41}, {"c42", c42}, {"x_hat", q.xhat}, {"lambda", lam},
                   {"theta_plus", k.tp}, {"theta_minus", k.tm}};
    finish(s);
    return s;
}

double b_bar1(const ModelParams& p, double gamma) {
    require_branch(p, Branch::C, "b_bar1");
    require_gamma(gamma);
    if (gamma > *cached_thresholds(p).gamma_bar1) throw RegimeError("b_bar1: requires gamma <= gamma_bar1");
    const GammaSetup gs = gamma_setup(p, gamma);
    const double c51 = p.sigma * p.sigma / (p.mu * gs.alpha * gs.gpdf_alpha);
    return c51 * gamma_pdf(gs.law, 1.0) / p.kappa();
}

Solution build_C2(const ModelParams& p, double gamma, double b) {
    const double bmax = b_bar1(p, gamma);
    if (!(b > 0.0) || b > bmax * (1.0 + 1e-12)) throw DomainError("build_C2: b must lie in (0, b_bar1]");
    const GammaSetup gs = gamma_setup(p, gamma);
    const CQuantities q = c_quantities(p);
    const double c51 = p.sigma * p.sigma / (p.mu * gs.alpha * gs.gpdf_alpha);
    double M2 = 0.0;
    const double target = b * q.K / c51;
    if (b < bmax * (1.0 - 1e-13)) {
        auto h = [&](double beta) {
            const double w = std::exp(-beta);
            return w * gamma_pdf(gs.law, w) - target;
        };
        const Bracket br = expand_upward(h, {0.0, 1.0}, 700.0);
        M2 = find_root(h, br, 1e-14);
    }
    const double zhi = std::log(gs.alpha);
    auto t = std::make_shared<const GammaTransform>(gs.law, M2, c51, 0.0, b, zhi);
    const double xb = t->forward(zhi);
    const double A = q.K * std::exp(M2) * std::pow(b, 1.0 / q.K) / (p.delta * p.eta_bar());
    const double vb = A * std::pow(b, q.pe);

    Solution s = skeleton(p, gamma, Case::C2);
    s.b = b;
    s.x_switch = xb;
    s.segments.push_back(power_segment(b, A, p));
    s.segments.push_back(x2_segment(b, xb, t, p, gamma, b, vb));
    s.segments.push_back(top_segment(xb, gs.c32, gs.lambda, gamma, p.delta, b, vb, p.mu));
    s.transforms = {t};
    s.constants = {{"M2", M2}, {"alpha", gs.alpha}, {"c51", c51}, {"c32", gs.c32}, {"lambda", gs.lambda},
                   {"b_bar1", bmax}, {"power_coeff", A}};
    finish(s);
    return s;
}

Solution solve(const ModelParams& p, double gamma) {
    require_gamma(gamma);
    const Regime r = classify(p, gamma, cached_thresholds(p));
    switch (r.kind) {
        case Case::A1:
            return build_A1(p, gamma, invert_ratio(detail::kernel_h1(p), f1(p, gamma)));
        case Case::A2:
            return build_A2(p, gamma);
        case Case::B1: {
            const double xb = b_quantities(p).xbar;
            return build_B1(p, gamma, xb + invert_ratio(detail::kernel_h2(p), f1(p, gamma)));
        }
        case Case::B2:
            return build_B2(p, gamma, b_gamma_B2(p, gamma));
        case Case::B3:
            return build_B3(p, gamma);
        case Case::C1: {
            const double xh = detail::xhat_of(p);
            return build_C1(p, gamma, xh + invert_ratio(detail::kernel_h3(p), f1(p, gamma)));
        }
        case Case::C2:
            return build_C2(p, gamma, b_bar1(p, gamma));
    }
    throw RegimeError("solve: unknown regime");
}

Solution build(const ModelParams& p, double gamma, double b) {
    require_gamma(gamma);
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("build: barrier must be finite and nonnegative");
    const Regime r = classify(p, gamma, cached_thresholds(p));
    switch (r.branch) {
        case Branch::A:
            if (b > 0.0) return build_A1(p, gamma, b);
            if (r.kind == Case::A2) return build_A2(p, gamma);
            break;
        case Branch::B:
            if (b > b_quantities(p).xbar) return build_B1(p, gamma, b);
            if (b == 0.0 && r.kind == Case::B3) return build_B3(p, gamma);
            if (b > 0.0 && r.kind == Case::B2 && b <= b_gamma_B2(p, gamma) * (1.0 + 1e-12))
                return build_B2(p, gamma, b);
            break;
        case Branch::C:
            if (b > detail::xhat_of(p)) return build_C1(p, gamma, b);
            if (b > 0.0 && r.kind == Case::C2 && b <= b_bar1(p, gamma) * (1.0 + 1e-12))
                return build_C2(p, gamma, b);
            break;
    }
    throw DomainError("build: no closed form admits this barrier for the given gamma");
}

Solution asymptotic(const ModelParams& p, Branch branch) {
    if (branch_of(p) != branch) throw RegimeError("asymptotic: branch does not match the parameters");
    Solution s{Regime{Case::A1, branch, cached_thresholds(p)}, Case::A1, p, kInf, 0.0, 0.0, {}, {}, {}};
    switch (branch) {
        case Branch::A: {
            const ExpKernel k = detail::kernel_h1(p);
            const double binf = invert_ratio(k, p.eta / p.delta);
            const double scale = 1.0 / k.h1(binf);
            s.regime.kind = s.builder = Case::A1;
            s.b = binf;
            s.segments.push_back(kernel_segment(0.0, binf, scale, k, 0.0));
            s.segments.push_back(linear_segment(binf, scale * k.h(binf)));
            s.constants = {{"theta_plus", k.tp}, {"theta_minus", k.tm}, {"scale", scale}};
            break;
        }
        case Branch::B: {
            const BQuantities q = b_quantities(p);
            const ExpKernel k = detail::kernel_h2(p);
            const double y = invert_ratio(k, p.eta / p.delta);
            const double M = std::log(std::pow(q.c22, 1.0 / q.K) / k.h1(y));
            const double scale = std::exp(M) * std::pow(q.c22, -1.0 / q.K);
            auto t = std::make_shared<const X1Transform>(q.c21, q.K, p.delta * q.eb, M, std::log(q.c22) / q.K - M);
            s.regime.kind = s.builder = Case::B1;
            s.b = q.xbar + y;
            s.x_switch = q.xbar;
            s.segments.push_back(x1_segment(0.0, q.xbar, t, p));
            s.segments.push_back(kernel_segment(q.xbar, s.b, scale, k, q.xbar));
            s.segments.push_back(linear_segment(s.b, scale * k.h(y)));
            s.transforms.push_back(t);
            s.constants = {{"M", M}, {"c21", q.c21}, {"c22", q.c22}, {"x_bar", q.xbar}};
            break;
        }
        case Branch::C: {
            const CQuantities q = c_quantities(p);
            const ExpKernel k = detail::kernel_h3(p);
            const double y = invert_ratio(k, p.mu / p.delta);
            const double c41 = 1.0 / k.h1(y);
            s.regime.kind = s.builder = Case::C1;
            s.b = q.xhat + y;
            s.x_switch = q.xhat;
            s.segments.push_back(power_segment(q.xhat, c41, p));
            s.segments.push_back(kernel_segment(q.xhat, s.b, c41, k, q.xhat));
            s.segments.push_back(linear_segment(s.b, c41 * k.h(y)));
            s.constants = {{"c41", c41}, {"x_hat", q.xhat}};
            break;
        }
    }
    finish(s);
    return s;
}

}  // namespace divopt
