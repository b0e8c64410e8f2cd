#include "divopt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "divopt/errors.hpp"

namespace divopt {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct PairOutcome {
    double npv[2] = {0.0, 0.0};
    bool ruined[2] = {false, false};
    double ruin_time[2] = {0.0, 0.0};
    double terminal[2] = {0.0, 0.0};  // surplus at the horizon for survivors
};

// Advances one sample stream (one path, or an antithetic pair) to ruin or the horizon.
// record_path selects a trajectory (0 or 1) to log into rec.
PairOutcome run_stream(const Strategy& s, const ModelParams& p, double gamma, const SimConfig& cfg,
                       std::uint64_t stream, int record_path, PathRecord* rec) {
    Xoshiro256pp rng(stream_seed(cfg.master_seed, stream));
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool pay = gamma > 0.0 && std::isfinite(gamma);
    std::exponential_distribution<double> expo(pay ? gamma : 1.0);

    const int n = cfg.antithetic ? 2 : 1;
    const double sign[2] = {1.0, -1.0};
    const double tmax = cfg.horizon(p);
    const double inf = std::numeric_limits<double>::infinity();

    PairOutcome out;
    double x[2] = {cfg.x0, cfg.x0};
    bool alive[2] = {true, true};
    if (n == 1) alive[1] = false;

    if (rec) {
        rec->times.push_back(0.0);
        rec->surplus.push_back(cfg.x0);
    }
    auto record = [&](int k, double t) {
        if (rec && k == record_path) {
            rec->times.push_back(t);
            rec->surplus.push_back(x[k]);
        }
    };

    double t = 0.0;
    double next_arrival = pay ? expo(rng) : inf;
    for (std::uint64_t step = 0; (alive[0] || alive[1]) && t < tmax; ++step) {
        const double grid_end = std::min(static_cast<double>(step + 1) * cfg.dt, tmax);
        while (true) {
            const double t_end = std::min(next_arrival, grid_end);
            const double h = t_end - t;
            if (h > 0.0) {
                const double z = normal(rng);
                const double uni = cfg.bridge_ruin ? rng.uniform() : 1.0;
                const double sq = std::sqrt(h);
                for (int k = 0; k < n; ++k) {
                    if (!alive[k]) continue;
                    const double xs = x[k];
                    const double u = xs > 0.0 ? retention(s, xs) : retention(s, 1e-300);
                    const double vol = p.sigma * u;
                    x[k] = xs + (p.eta - (1.0 - u) * p.mu) * h + vol * sq * sign[k] * z;
                    bool ruin = x[k] < 0.0;
                    if (!ruin && cfg.bridge_ruin && vol > 0.0) {
                        const double cross = std::exp(-2.0 * xs * x[k] / (vol * vol * h));
                        ruin = uni < cross;
                    }
                    record(k, t_end);
                    if (ruin) {
                        alive[k] = false;
                        out.ruined[k] = true;
                        out.ruin_time[k] = t_end;
                        if (rec && k == record_path) rec->ruin_time = t_end;
                    }
                }
            }
            t = t_end;
            if (next_arrival <= grid_end) {
                const double disc = std::exp(-p.delta * t);
                for (int k = 0; k < n; ++k) {
                    if (!alive[k]) continue;
                    const double d = dividend(s, x[k]);
                    if (d > 0.0) {
                        out.npv[k] += disc * d;
                        x[k] -= d;
                        if (rec && k == record_path) {
                            rec->dividend_events.push_back({t, d});
                            record(k, t);
                        }
                    }
                }
                next_arrival = t + expo(rng);
            }
            if (t >= grid_end) break;
        }
    }
    for (int k = 0; k < n; ++k)
        if (alive[k]) out.terminal[k] = x[k];
    if (rec) rec->npv = out.npv[record_path];
    return out;
}

unsigned thread_count(const SimConfig& cfg) {
    unsigned n = cfg.threads;
    if (n == 0) {
        if (const char* env = std::getenv("SOLVER_THREADS")) {
            try {
                n = static_cast<unsigned>(std::stoul(env));
            } catch (const std::exception&) {
                throw DomainError("SOLVER_THREADS must be a nonnegative integer");
            }
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

}  // namespace

void SimConfig::validate(const ModelParams& p) const {
    p.validate();
    if (!(x0 > 0.0)) throw DomainError("x0 must be positive");
    if (!(dt > 0.0 && dt <= 1e-2)) throw DomainError("dt must lie in (0, 0.01]");
    if (t_max != 0.0 && !(t_max >= 20.0 / p.delta)) throw DomainError("t_max must be at least 20/delta");
    if (n_paths == 0) throw DomainError("n_paths must be positive");
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ index;
    return splitmix64(s);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256pp::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

PathRecord simulate_path(const Strategy& s, const ModelParams& p, double gamma, const SimConfig& cfg,
                         std::uint64_t path_index) {
    cfg.validate(p);
    PathRecord rec;
    const std::uint64_t stream = cfg.antithetic ? path_index / 2 : path_index;
    const int which = cfg.antithetic ? static_cast<int>(path_index % 2) : 0;
    run_stream(s, p, gamma, cfg, stream, which, &rec);
    return rec;
}

SimResult estimate_npv(const Strategy& s, const ModelParams& p, double gamma, const SimConfig& cfg) {
    cfg.validate(p);
    const std::size_t n = static_cast<std::size_t>(cfg.n_paths);
    const int per = cfg.antithetic ? 2 : 1;
    std::vector<double> sample(n), ruined(n), ruin_time(n), terminal(n);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        try {
            const std::size_t chunk = 256;
            while (true) {
                const std::size_t start = next.fetch_add(chunk);
                if (start >= n) break;
                const std::size_t stop = std::min(n, start + chunk);
                for (std::size_t i = start; i < stop; ++i) {
                    const PairOutcome o = run_stream(s, p, gamma, cfg, i, 0, nullptr);
                    double v = 0.0, r = 0.0, rt = 0.0, term = 0.0;
                    for (int k = 0; k < per; ++k) {
                        v += o.npv[k];
                        r += o.ruined[k] ? 1.0 : 0.0;
                        rt += o.ruined[k] ? o.ruin_time[k] : 0.0;
                        term += o.terminal[k];
                    }
                    sample[i] = v / per;
                    ruined[i] = r;
                    ruin_time[i] = rt;
                    terminal[i] = term;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };
    const unsigned nt = std::min<std::size_t>(thread_count(cfg), std::max<std::size_t>(1, n / 256 + 1));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    SimResult res;
    res.n_paths = cfg.n_paths;
    res.n_simulated = cfg.n_paths * per;
    res.npv_mean = pairwise_sum(sample.data(), n) / static_cast<double>(n);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (sample[i] - res.npv_mean) * (sample[i] - res.npv_mean);
    const double var = n > 1 ? pairwise_sum(dev.data(), n) / static_cast<double>(n - 1) : 0.0;
    res.npv_stderr = std::sqrt(var / static_cast<double>(n));
    const double n_ruined = pairwise_sum(ruined.data(), n);
    res.ruin_fraction = n_ruined / static_cast<double>(res.n_simulated);
    res.mean_ruin_time = n_ruined > 0.0 ? pairwise_sum(ruin_time.data(), n) / n_ruined : 0.0;
    const double mean_terminal = pairwise_sum(terminal.data(), n) / static_cast<double>(res.n_simulated);
    const double g = std::isfinite(gamma) ? gamma / (gamma + p.delta) : 1.0;
    res.truncation_bound = std::exp(-p.delta * cfg.horizon(p)) * g * mean_terminal;
    return res;
}

}  // namespace divopt
