#pragma once

#include <optional>
#include <string>

namespace divopt {

struct ModelParams {
    double delta;  // discount rate
    double sigma;  // diffusion volatility
    double mu;     // reinsurer safety loading
    double eta;    // insurer safety loading

    // Throws DomainError unless delta > 0, sigma > 0 and mu >= eta > 0.
    void validate() const;

    double eta_bar() const { return 2.0 * sigma * sigma / (mu * mu); }
    // 1 + delta * eta_bar, the exponent scale shared by every reduced-retention branch.
    double kappa() const { return 1.0 + delta * eta_bar(); }
};

// A: mu >= 2 eta; B: eta < mu < 2 eta; C: mu == eta.
enum class Branch { A, B, C };

Branch branch_of(const ModelParams& p);
std::string to_string(Branch b);

struct CharRoots {
    double theta_plus;
    double theta_minus;
    double lambda_gamma;
};

CharRoots char_roots(const ModelParams& p, double gamma);

// Negative root of (sigma^2/2) r^2 + eta r - (delta + gamma), explicit radical.
double lambda_gamma(const ModelParams& p, double gamma);

double f1(const ModelParams& p, double gamma);
double g1(const ModelParams& p, double b);
double g2(const ModelParams& p, double b);
double g4(const ModelParams& p, double b);

// Branch B only, 0 < gamma < gamma1 (f2 is also defined at gamma1 where it equals 1).
double f2(const ModelParams& p, double gamma);
double f3(const ModelParams& p, double gamma);
double f4(const ModelParams& p, double gamma);

// alpha_gamma without the regime check; used by builders for any gamma > 0.
double alpha_gamma(const ModelParams& p, double gamma);

struct Thresholds {
    std::optional<double> gamma0;
    std::optional<double> gamma1;
    std::optional<double> gamma2;
    std::optional<double> gamma_bar1;
};

Thresholds thresholds(const ModelParams& p);

enum class Case { A1, A2, B1, B2, B3, C1, C2 };

std::string to_string(Case c);

struct Regime {
    Case kind;
    Branch branch;
    Thresholds thresholds;
};

Regime classify(const ModelParams& p, double gamma);
Regime classify(const ModelParams& p, double gamma, const Thresholds& th);

}  // namespace divopt
