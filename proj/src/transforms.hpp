#pragma once

#include <vector>

#include "divopt/numerics.hpp"
#include "divopt/valuefn.hpp"

namespace divopt::detail {

// x1(z) = k21 e^{K(z+M)} + c21 z + k22 on [-M, z_hi].
class X1Transform final : public Transform {
public:
    X1Transform(double c21, double kappa, double delta_eta_bar, double M, double z_hi);

    TransformKind kind() const override { return TransformKind::X1; }
    double z_lo() const override { return -M_; }
    double z_hi() const override { return z_hi_; }
    double forward(double z) const override;
    double derivative(double z) const override;
    double inverse(double x) const override;
    std::map<std::string, double> params() const override;

private:
    double c21_, K_, k21_, k22_, M_, z_hi_;
};

// x2(z) = fbar_beta(e^z) + offset on [-beta, z_hi], built on cumulative quadrature tables.
class GammaTransform final : public Transform {
public:
    struct Point {
        double z, w, H, J, G, g;
    };

    GammaTransform(const GammaLaw& law, double beta, double lead, double slope, double offset, double z_hi,
                   int nodes = 512);

    TransformKind kind() const override { return TransformKind::X2; }
    double z_lo() const override { return -beta_; }
    double z_hi() const override { return z_hi_; }
    double forward(double z) const override { return x_of(point_at(z)); }
    double derivative(double z) const override { return deriv_of(point_at(z)); }
    double inverse(double x) const override { return locate(x).z; }
    std::map<std::string, double> params() const override;

    // Full state at z (H and J are the two integrals from e^{-beta} to e^z).
    Point point_at(double z) const;
    // State at the z with forward(z) == x.
    Point locate(double x) const;

    double x_of(const Point& p) const;
    double deriv_of(const Point& p) const;  // dx/dz

    double H(double w) const;
    double fbar(double w) const;

private:
    GammaLaw law_;
    double beta_, lead_, slope_, offset_, z_hi_, G0_;
    std::vector<double> z_, w_, H_, J_, x_;

    Point complete(double z, double w, double H, double J) const;
    Point from_node(std::size_t k, double z) const;
};

double inv_y2g(const GammaLaw& law, double y);

}  // namespace divopt::detail
