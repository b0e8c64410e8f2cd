#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "divopt/model.hpp"
#include "divopt/policy.hpp"

namespace divopt {

struct SimConfig {
    double x0 = 1.0;
    double dt = 1e-3;
    double t_max = 0.0;          // 0 selects 40 / delta
    std::uint64_t n_paths = 1000;  // independent samples; each is an antithetic pair when antithetic is set
    std::uint64_t master_seed = 20240601;
    bool antithetic = true;
    // Kill a step whose endpoints are both solvent with the Brownian-bridge crossing probability.
    bool bridge_ruin = true;
    unsigned threads = 0;  // 0: SOLVER_THREADS, else hardware concurrency

    double horizon(const ModelParams& p) const { return t_max > 0.0 ? t_max : 40.0 / p.delta; }
    void validate(const ModelParams& p) const;
};

struct SimResult {
    double npv_mean = 0.0;
    double npv_stderr = 0.0;
    double ruin_fraction = 0.0;
    double mean_ruin_time = 0.0;  // over ruined paths; 0 when none
    std::uint64_t n_paths = 0;      // samples (pairs when antithetic)
    std::uint64_t n_simulated = 0;  // individual trajectories
    double truncation_bound = 0.0;  // e^{-delta T} gamma/(gamma+delta) E[X_T; survival]
};

struct DividendEvent {
    double time;
    double amount;
};

struct PathRecord {
    std::vector<double> times;
    std::vector<double> surplus;
    std::vector<DividendEvent> dividend_events;
    std::optional<double> ruin_time;
    double npv = 0.0;
};

// xoshiro256++ seeded through SplitMix64.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    double uniform();  // [0, 1) with 53 random bits

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Seed of sample stream i: one SplitMix64 step applied to master ^ i.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

// Trajectory path_index. With antithetic sampling, paths 2i and 2i+1 form pair i and share
// arrival times with mirrored Brownian increments.
PathRecord simulate_path(const Strategy& s, const ModelParams& p, double gamma, const SimConfig& cfg,
                         std::uint64_t path_index);

SimResult estimate_npv(const Strategy& s, const ModelParams& p, double gamma, const SimConfig& cfg);

// Order-independent sum used for the estimator.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace divopt
