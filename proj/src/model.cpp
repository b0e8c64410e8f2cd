#include "divopt/model.hpp"

#include <cmath>

#include "divopt/errors.hpp"
#include "divopt/numerics.hpp"
#include "kernels.hpp"

namespace divopt {

void ModelParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(delta) || !finite(sigma) || !finite(mu) || !finite(eta))
        throw DomainError("model parameters must be finite");
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
    if (!(mu >= eta)) throw DomainError("mu must be at least eta");
}

Branch branch_of(const ModelParams& p) {
    p.validate();
    if (p.mu >= 2.0 * p.eta) return Branch::A;
    if (p.mu == p.eta) return Branch::C;
    return Branch::B;
}

std::string to_string(Branch b) {
    switch (b) {
        case Branch::A: return "A";
        case Branch::B: return "B";
        case Branch::C: return "C";
    }
    return "?";
}

std::string to_string(Case c) {
    switch (c) {
        case Case::A1: return "A1";
        case Case::A2: return "A2";
        case Case::B1: return "B1";
        case Case::B2: return "B2";
        case Case::B3: return "B3";
        case Case::C1: return "C1";
        case Case::C2: return "C2";
    }
    return "?";
}

double lambda_gamma(const ModelParams& p, double gamma) {
    const double s2 = p.sigma * p.sigma;
    return (-p.eta - std::sqrt(p.eta * p.eta + 2.0 * s2 * (p.delta + gamma))) / s2;
}

CharRoots char_roots(const ModelParams& p, double gamma) {
    p.validate();
    if (!(gamma > 0.0)) throw DomainError("char_roots: gamma must be positive");
    const double a2 = 0.5 * p.sigma * p.sigma;
    const auto [tm, tp] = quadratic_roots(a2, p.eta, -p.delta);
    const auto lam = quadratic_roots(a2, p.eta, -(p.delta + gamma)).first;
    return {tp, tm, lam};
}

double f1(const ModelParams& p, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("f1: gamma must be positive");
    const double s2 = p.sigma * p.sigma;
    return p.eta * gamma / (p.delta * (p.delta + gamma)) -
           s2 / (p.eta + std::sqrt(p.eta * p.eta + 2.0 * s2 * (p.delta + gamma)));
}

double g1(const ModelParams& p, double b) {
    if (!(b > 0.0)) throw DomainError("g1: b must be positive");
    return detail::kernel_h1(p).ratio(b);
}

double g2(const ModelParams& p, double b) {
    if (!(b > 0.0)) throw DomainError("g2: b must be positive");
    return detail::kernel_h2(p).ratio(b);
}

double g4(const ModelParams& p, double b) {
    if (!(b > 0.0)) throw DomainError("g4: b must be positive");
    return detail::kernel_h3(p).ratio(b);
}

double alpha_gamma(const ModelParams& p, double gamma) {
    const double s2 = p.sigma * p.sigma;
    const double root = std::sqrt(p.eta * p.eta + 2.0 * s2 * (p.delta + gamma));
    return (gamma + p.delta) / gamma * (1.0 - p.mu / (p.eta + root));
}

namespace {

double gamma1_closed(const ModelParams& p) {
    return p.delta / p.mu * (2.0 * p.delta * p.sigma * p.sigma / p.mu + 2.0 * p.eta - p.mu);
}

void require_branch_b(const ModelParams& p, double gamma, const char* who) {
    if (branch_of(p) != Branch::B) throw RegimeError(std::string(who) + ": requires eta < mu < 2 eta");
    if (!(gamma > 0.0)) throw DomainError(std::string(who) + ": gamma must be positive");
    if (gamma > gamma1_closed(p) * (1.0 + 1e-12))
        throw RegimeError(std::string(who) + ": requires gamma below gamma1");
}

// Root of f1(gamma) = level, bracketed by geometric expansion from [1e-8, 1].
double f1_level_root(const ModelParams& p, double level) {
    auto h = [&](double g) { return f1(p, g) - level; };
    const Bracket br = expand_upward(h, {1e-8, 1.0});
    return find_root(h, br, 1e-14);
}

void check_agree(double closed, double rooted, const char* name) {
    if (std::fabs(closed - rooted) > 1e-8 * std::max(1.0, std::fabs(closed)))
        throw NumericalError(std::string("threshold ") + name + ": closed form and root disagree");
}

}  // namespace

double f2(const ModelParams& p, double gamma) {
    require_branch_b(p, gamma, "f2");
    return alpha_gamma(p, gamma);
}

namespace {

// f3 and f4 both carry the factor e^{eta_bar gamma}; this is f3 with that factor removed.
double f3_scaled(const ModelParams& p, double gamma) {
    const double eb = p.eta_bar();
    const double a = alpha_gamma(p, gamma);
    const double s = eb * (p.delta + gamma) + 1.0;
    const double lead = p.sigma * p.sigma * std::exp(eb * gamma * (a - 1.0) - s * std::log(a)) / p.mu;
    const double integral = integrate(
        [&](double y) { return std::exp(eb * gamma * (y - 1.0) - (s + 1.0) * std::log(y)); }, 1.0, a);
    return lead + eb * (p.mu - p.eta) * integral;
}

}  // namespace

double f3(const ModelParams& p, double gamma) {
    require_branch_b(p, gamma, "f3");
    return f3_scaled(p, gamma) * std::exp(p.eta_bar() * gamma);
}

double f4(const ModelParams& p, double gamma) {
    require_branch_b(p, gamma, "f4");
    const double eb = p.eta_bar();
    return eb * (p.mu - p.eta) * std::exp(eb * gamma);
}

Thresholds thresholds(const ModelParams& p) {
    Thresholds th;
    switch (branch_of(p)) {
        case Branch::A: {
            const double closed = 0.5 * std::pow(p.sigma * p.delta / p.eta, 2);
            check_agree(closed, f1_level_root(p, 0.0), "gamma0");
            th.gamma0 = closed;
            break;
        }
        case Branch::B: {
            const double closed = gamma1_closed(p);
            check_agree(closed, f1_level_root(p, (2.0 * p.eta - p.mu) / (2.0 * p.delta)), "gamma1");
            th.gamma1 = closed;
            auto h = [&](double g) { return f3_scaled(p, g) - p.eta_bar() * (p.mu - p.eta); };
            th.gamma2 = find_root(h, {closed * 1e-6, closed * (1.0 - 1e-9)}, 1e-13);
            break;
        }
        case Branch::C: {
            const double closed = gamma1_closed(p);
            check_agree(closed, f1_level_root(p, p.mu / (2.0 * p.delta)), "gamma_bar1");
            th.gamma_bar1 = closed;
            break;
        }
    }
    return th;
}

Regime classify(const ModelParams& p, double gamma) { return classify(p, gamma, thresholds(p)); }

Regime classify(const ModelParams& p, double gamma, const Thresholds& th) {
    if (!(gamma > 0.0)) throw DomainError("classify: gamma must be positive");
    const Branch br = branch_of(p);
    Regime r{Case::A1, br, th};
    switch (br) {
        case Branch::A:
            r.kind = gamma <= th.gamma0.value() ? Case::A2 : Case::A1;
            break;
        case Branch::B:
            if (gamma > th.gamma1.value())
                r.kind = Case::B1;
            else if (gamma > th.gamma2.value())
                r.kind = Case::B2;
            else
                r.kind = Case::B3;
            break;
        case Branch::C:
            r.kind = gamma <= th.gamma_bar1.value() ? Case::C2 : Case::C1;
            break;
    }
    return r;
}

}  // namespace divopt
