#include "transforms.hpp"

#include <algorithm>
#include <cmath>

namespace divopt::detail {

X1Transform::X1Transform(double c21, double kappa, double delta_eta_bar, double M, double z_hi)
    : c21_(c21),
      K_(kappa),
      k21_(delta_eta_bar * c21 / kappa),
      k22_(c21 * (M - delta_eta_bar / kappa)),
      M_(M),
      z_hi_(z_hi) {
    if (!(z_hi > -M)) throw NumericalError("X1Transform: empty domain");
}

double X1Transform::forward(double z) const { return k21_ * std::exp(K_ * (z + M_)) + c21_ * z + k22_; }

double X1Transform::derivative(double z) const { return k21_ * K_ * std::exp(K_ * (z + M_)) + c21_; }

double X1Transform::inverse(double x) const {
    double lo = -M_, hi = z_hi_;
    if (x <= forward(lo)) return lo;
    if (x >= forward(hi)) return hi;
    // x1 is convex and increasing, so Newton started at the right end decreases monotonically
    // onto the root; bisection guards against rounding.
    double z = hi;
    for (int i = 0; i < 200; ++i) {
        const double fz = forward(z) - x;
        if (fz == 0.0) return z;
        if (fz > 0) hi = z; else lo = z;
        double next = z - fz / derivative(z);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::fabs(next - z);
        z = next;
        if (step <= 4e-16 * std::max(1.0, std::fabs(z)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(z)))
            return z;
    }
    return z;
}

std::map<std::string, double> X1Transform::params() const {
    return {{"k21", k21_}, {"k22", k22_}, {"c21", c21_}, {"M", M_}, {"kappa", K_}, {"z_lo", -M_}, {"z_hi", z_hi_}};
}

double inv_y2g(const GammaLaw& law, double y) { return std::exp(-law.log_pdf(y)) / (y * y); }

namespace {

std::array<double, 2> hj_integrand(const GammaLaw& law, double y) {
    const double a = inv_y2g(law, y);
    return {a, gamma_cdf(law, y) * a};
}

std::array<double, 2> hj_between(const GammaLaw& law, double a, double b) {
    if (a == b) return {0.0, 0.0};
    auto f = [&](double y) { return hj_integrand(law, y); };
    if (a < b) return integrate_n<2>(f, a, b, 1e-13);
    auto r = integrate_n<2>(f, b, a, 1e-13);
    return {-r[0], -r[1]};
}

}  // namespace

GammaTransform::GammaTransform(const GammaLaw& law, double beta, double lead, double slope, double offset,
                               double z_hi, int nodes)
    : law_(law), beta_(beta), lead_(lead), slope_(slope), offset_(offset), z_hi_(z_hi) {
    if (!(z_hi > -beta)) throw NumericalError("GammaTransform: empty domain");
    if (nodes < 2) throw DomainError("GammaTransform: need at least two nodes");
    const double w0 = std::exp(-beta);
    G0_ = gamma_cdf(law_, w0);
    const auto n = static_cast<std::size_t>(nodes);
    z_.resize(n);
    w_.resize(n);
    H_.assign(n, 0.0);
    J_.assign(n, 0.0);
    x_.resize(n);
    const double zl = -beta;
    for (std::size_t k = 0; k < n; ++k) {
        z_[k] = (k + 1 == n) ? z_hi : zl + (z_hi - zl) * static_cast<double>(k) / static_cast<double>(n - 1);
        w_[k] = (k == 0) ? w0 : std::exp(z_[k]);
    }
    for (std::size_t k = 1; k < n; ++k) {
        const auto d = hj_between(law_, w_[k - 1], w_[k]);
        H_[k] = H_[k - 1] + d[0];
        J_[k] = J_[k - 1] + d[1];
    }
    for (std::size_t k = 0; k < n; ++k) x_[k] = x_of(complete(z_[k], w_[k], H_[k], J_[k]));
    for (std::size_t k = 1; k < n; ++k)
        if (!(x_[k] > x_[k - 1])) throw NumericalError("GammaTransform: map is not increasing", z_[k]);
}

GammaTransform::Point GammaTransform::complete(double z, double w, double H, double J) const {
    return {z, w, H, J, gamma_cdf(law_, w), gamma_pdf(law_, w)};
}

GammaTransform::Point GammaTransform::from_node(std::size_t k, double z) const {
    const double w = (z == z_[k]) ? w_[k] : std::exp(z);
    const auto d = hj_between(law_, w_[k], w);
    return complete(z, w, H_[k] + d[0], J_[k] + d[1]);
}

GammaTransform::Point GammaTransform::point_at(double z) const {
    const double span = z_hi_ - z_.front();
    if (z < z_.front() - 1e-12 * std::max(1.0, span) || z > z_hi_ + 1e-12 * std::max(1.0, span))
        throw DomainError("GammaTransform: z outside the transform domain");
    z = std::clamp(z, z_.front(), z_hi_);
    const auto it = std::lower_bound(z_.begin(), z_.end(), z);
    std::size_t k = static_cast<std::size_t>(it - z_.begin());
    if (k == z_.size()) k = z_.size() - 1;
    if (k > 0 && (z - z_[k - 1]) < (z_[k] - z)) --k;
    return from_node(k, z);
}

GammaTransform::Point GammaTransform::locate(double x) const {
    if (x <= x_.front()) return complete(z_.front(), w_.front(), 0.0, 0.0);
    if (x >= x_.back()) return complete(z_.back(), w_.back(), H_.back(), J_.back());
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    double lo = z_[k], hi = z_[k + 1];
    double z = lo + (hi - lo) * (x - x_[k]) / (x_[k + 1] - x_[k]);
    Point p = from_node(k, z);
    for (int i = 0; i < 100; ++i) {
        const double fz = x_of(p) - x;
        if (fz == 0.0) return p;
        if (fz > 0) hi = z; else lo = z;
        double next = z - fz / deriv_of(p);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::fabs(next - z);
        z = next;
        const std::size_t node = (z - z_[k] < z_[k + 1] - z) ? k : k + 1;
        p = from_node(node, z);
        if (step <= 4e-16 * std::max(1.0, std::fabs(z)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(z)))
            return p;
    }
    return p;
}

double GammaTransform::x_of(const Point& p) const {
    return lead_ * (p.G - G0_) - slope_ * (p.G * p.H - p.J) + offset_;
}

double GammaTransform::deriv_of(const Point& p) const { return p.w * p.g * (lead_ - slope_ * p.H); }

double GammaTransform::H(double w) const { return point_at(std::log(w)).H; }

double GammaTransform::fbar(double w) const { return x_of(point_at(std::log(w))) - offset_; }

std::map<std::string, double> GammaTransform::params() const {
    return {{"beta", beta_}, {"lead", lead_}, {"slope", slope_}, {"offset", offset_},
            {"z_lo", z_.front()}, {"z_hi", z_hi_}};
}

}  // namespace divopt::detail
