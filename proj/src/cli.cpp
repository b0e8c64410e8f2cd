#include "divopt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

#include "divopt/errors.hpp"
#include "divopt/montecarlo.hpp"
#include "divopt/policy.hpp"
#include "divopt/valuefn.hpp"
#include "divopt/verify.hpp"

namespace divopt::cli {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Options {
    std::string config;
    double delta = kNaN, sigma = kNaN, mu = kNaN, eta = kNaN;
    std::optional<double> gamma;
    std::optional<double> log2_gamma;
    std::optional<double> barrier;

    std::string out;
    std::string format;

    double x_min = 1e-3, x_max = 1.0;
    int x_steps = 100;
    bool x_log = false;
    std::vector<double> x_list;

    std::uint64_t paths = 1000;
    double dt = 1e-3;
    std::uint64_t seed = 20240601;
    double tmax = 0.0;
    double x0 = 1.0;
    bool no_antithetic = false;
    bool no_bridge = false;
    unsigned threads = 0;
    std::optional<double> retention;

    double n_min = -4.0, n_max = 50.0, n_step = 0.2;
    double b_min = 0.0, b_max = 0.5, b_step = 0.02;

    std::optional<double> perturb_barrier;
    double tolerance = 1e-6;
};

// Option registered on the command line that may also be read from the config file.
struct Binding {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> assign;
};

template <class T>
void from_json_value(T& target, const json& j) { target = j.get<T>(); }

template <class T>
void from_json_value(std::optional<T>& target, const json& j) { target = j.get<T>(); }

class Registry {
public:
    explicit Registry(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* option(const std::string& name, T& target, const std::string& desc) {
        CLI::Option* o = app_->add_option("--" + name, target, desc);
        bind(name, o, target);
        return o;
    }

    CLI::Option* flag(const std::string& name, bool& target, const std::string& desc) {
        CLI::Option* o = app_->add_flag("--" + name, target, desc);
        bind(name, o, target);
        return o;
    }

    // Fills every option not given on the command line from the command section, then the top level.
    void apply(const json& doc, const std::string& command) const {
        for (const Binding& b : bindings_) {
            if (b.opt->count() > 0) continue;
            const json* v = lookup(doc, command, b.key);
            if (v) b.assign(*v);
        }
    }

private:
    template <class T>
    void bind(const std::string& name, CLI::Option* o, T& target) {
        std::string key = name;
        for (char& c : key)
            if (c == '-') c = '_';
        bindings_.push_back({key, o, [&target](const json& j) { from_json_value(target, j); }});
    }

    static const json* find_key(const json& obj, const std::string& key) {
        if (!obj.is_object()) return nullptr;
        if (auto it = obj.find(key); it != obj.end()) return &*it;
        std::string dashed = key;
        for (char& c : dashed)
            if (c == '_') c = '-';
        if (auto it = obj.find(dashed); it != obj.end()) return &*it;
        return nullptr;
    }

    static const json* lookup(const json& doc, const std::string& command, const std::string& key) {
        if (const json* sec = find_key(doc, command))
            if (const json* v = find_key(*sec, key)) return v;
        return find_key(doc, key);
    }

    CLI::App* app_;
    std::vector<Binding> bindings_;
};

using Cell = std::variant<double, std::string, long long>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Result {
    json doc;
    Table table;
    int code = kOk;
};

json cell_json(const Cell& c) {
    return std::visit([](const auto& v) { return json(v); }, c);
}

json table_json(const Table& t) {
    json arr = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::string render_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) s += ',';
        s += t.columns[i];
    }
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) s += csv_number(v);
                    else if constexpr (std::is_same_v<V, std::string>) s += v;
                    else s += std::to_string(v);
                },
                row[i]);
        }
        s += '\n';
    }
    return s;
}

Cell opt_cell(const std::optional<double>& v) {
    if (v) return *v;
    return std::string();
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

ModelParams params_of(const Options& o) {
    const std::pair<const char*, double> req[] = {{"delta", o.delta}, {"sigma", o.sigma}, {"mu", o.mu}, {"eta", o.eta}};
    for (const auto& [name, v] : req)
        if (std::isnan(v)) throw DomainError(std::string("missing model parameter '") + name + "'");
    ModelParams p{o.delta, o.sigma, o.mu, o.eta};
    p.validate();
    return p;
}

std::optional<double> gamma_of(const Options& o) {
    if (o.gamma && o.log2_gamma) throw DomainError("give either gamma or log2-gamma, not both");
    std::optional<double> g = o.gamma;
    if (o.log2_gamma) g = std::exp2(*o.log2_gamma);
    if (g && !(*g > 0.0)) throw DomainError("gamma must be positive");
    return g;
}

double require_gamma(const Options& o) {
    auto g = gamma_of(o);
    if (!g) throw DomainError("this command needs gamma (--gamma, --log2-gamma or config key 'gamma')");
    return *g;
}

Solution solution_of(const Options& o, const ModelParams& p, double gamma) {
    return o.barrier ? build(p, gamma, *o.barrier) : solve(p, gamma);
}

std::vector<double> x_grid(const Options& o) {
    if (!o.x_list.empty()) {
        for (double x : o.x_list)
            if (!(x > 0.0)) throw DomainError("x values must be positive");
        return o.x_list;
    }
    if (!(o.x_min > 0.0) || !(o.x_max > o.x_min)) throw DomainError("x grid needs 0 < x-min < x-max");
    if (o.x_steps < 1) throw DomainError("x-steps must be at least 1");
    std::vector<double> g(static_cast<std::size_t>(o.x_steps) + 1);
    for (int i = 0; i <= o.x_steps; ++i) {
        const double t = static_cast<double>(i) / o.x_steps;
        g[i] = o.x_log ? o.x_min * std::pow(o.x_max / o.x_min, t) : o.x_min + (o.x_max - o.x_min) * t;
    }
    g.back() = o.x_max;
    return g;
}

std::vector<double> range_of(double lo, double hi, double step, const char* what) {
    if (!(step > 0.0) || !(hi >= lo)) throw DomainError(std::string(what) + ": need step > 0 and max >= min");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> r;
    for (long long i = 0; i <= n; ++i) r.push_back(lo + static_cast<double>(i) * step);
    return r;
}

json solution_json(const Solution& sol) {
    json j;
    j["regime"] = to_string(sol.regime.kind);
    j["builder"] = to_string(sol.builder);
    j["branch"] = to_string(sol.regime.branch);
    j["gamma"] = sol.gamma;
    j["b"] = sol.b;
    j["x_switch"] = sol.x_switch;
    j["v_at_b"] = sol.value(sol.b);
    j["v_at_x_switch"] = sol.value(sol.x_switch);
    j["breakpoints"] = sol.breakpoints();
    j["constants"] = sol.constants;
    return j;
}

Result cmd_classify(const Options& o) {
    const ModelParams p = params_of(o);
    const auto g = gamma_of(o);
    const Thresholds th = thresholds(p);
    Result r;
    r.doc["branch"] = to_string(branch_of(p));
    r.doc["regime"] = g ? json(to_string(classify(p, *g, th).kind)) : json(nullptr);
    r.doc["gamma"] = opt_json(g);
    r.doc["gamma0"] = opt_json(th.gamma0);
    r.doc["gamma1"] = opt_json(th.gamma1);
    r.doc["gamma2"] = opt_json(th.gamma2);
    r.doc["gamma_bar1"] = opt_json(th.gamma_bar1);
    r.table.columns = {"branch", "regime", "gamma", "gamma0", "gamma1", "gamma2", "gamma_bar1"};
    r.table.rows.push_back({to_string(branch_of(p)), g ? to_string(classify(p, *g, th).kind) : std::string(),
                            opt_cell(g), opt_cell(th.gamma0), opt_cell(th.gamma1), opt_cell(th.gamma2),
                            opt_cell(th.gamma_bar1)});
    return r;
}

Result cmd_solve(const Options& o) {
    const ModelParams p = params_of(o);
    const double g = require_gamma(o);
    const Solution sol = solution_of(o, p, g);
    Result r;
    r.doc = solution_json(sol);
    r.table.columns = {"regime", "builder", "gamma", "b", "x_switch", "v_at_b", "v_at_x_switch"};
    r.table.rows.push_back({to_string(sol.regime.kind), to_string(sol.builder), g, sol.b, sol.x_switch,
                            sol.value(sol.b), sol.value(sol.x_switch)});
    return r;
}

Result cmd_curve(const Options& o) {
    const ModelParams p = params_of(o);
    const Solution sol = solution_of(o, p, require_gamma(o));
    Result r;
    r.table.columns = {"x", "v", "v_prime", "v_double_prime", "u_star"};
    for (double x : x_grid(o)) {
        const Eval e = sol.at(x);
        r.table.rows.push_back({x, e.v, e.v1, e.v2, e.u});
    }
    r.doc = table_json(r.table);
    return r;
}

Result cmd_sweep_gamma(const Options& o) {
    const ModelParams p = params_of(o);
    Result r;
    r.table.columns = {"gamma", "b", "x_switch", "v_at_b", "v_at_x_switch"};
    for (double n : range_of(o.n_min, o.n_max, o.n_step, "sweep-gamma")) {
        const double g = std::exp2(n);
        const Solution sol = solve(p, g);
        r.table.rows.push_back({g, sol.b, sol.x_switch, sol.value(sol.b), sol.value(sol.x_switch)});
    }
    r.doc = table_json(r.table);
    return r;
}

Result cmd_sweep_barrier(const Options& o, std::ostream& err) {
    const ModelParams p = params_of(o);
    const double g = require_gamma(o);
    const auto xs = x_grid(o);
    const Solution best = solve(p, g);

    std::vector<std::pair<double, Solution>> sols;
    for (double b : range_of(o.b_min, o.b_max, o.b_step, "sweep-barrier")) {
        try {
            sols.emplace_back(b, build(p, g, b));
        } catch (const DomainError& e) {
            err << "sweep-barrier: skipping b=" << csv_number(b) << ": " << e.what() << '\n';
        }
    }
    Result r;
    r.table.columns = {"b", "x", "v", "optimal"};
    auto emit = [&](double b, const Solution& s, long long optimal) {
        for (double x : xs) r.table.rows.push_back({b, x, s.value(x), optimal});
    };
    emit(best.b, best, 1);
    for (const auto& [b, s] : sols) emit(b, s, 0);
    r.doc = table_json(r.table);
    return r;
}

Result cmd_simulate(const Options& o) {
    const ModelParams p = params_of(o);
    const double g = require_gamma(o);
    const Solution best = solve(p, g);

    SimConfig cfg;
    cfg.x0 = o.x0;
    cfg.dt = o.dt;
    cfg.t_max = o.tmax;
    cfg.n_paths = o.paths;
    cfg.master_seed = o.seed;
    cfg.antithetic = !o.no_antithetic;
    cfg.bridge_ruin = !o.no_bridge;
    cfg.threads = o.threads;
    cfg.validate(p);

    // Reference value of the simulated strategy, when it has a closed form.
    std::optional<double> strategy_value;
    std::string kind;
    std::optional<Strategy> strat;
    if (o.retention) {
        strat = Strategy::constant(*o.retention, o.barrier ? *o.barrier : best.b);
        kind = "constant";
    } else if (o.barrier) {
        Solution s = build(p, g, *o.barrier);
        strategy_value = s.value(cfg.x0);
        strat = Strategy::optimal(std::move(s));
        kind = "barrier";
    } else {
        strategy_value = best.value(cfg.x0);
        strat = Strategy::optimal(best);
        kind = "optimal";
    }

    const SimResult res = estimate_npv(*strat, p, g, cfg);
    const double v_opt = best.value(cfg.x0);
    const double band = 3.0 * res.npv_stderr;
    const bool dominated = res.npv_mean <= v_opt + band;
    const bool agrees = !strategy_value || std::fabs(res.npv_mean - *strategy_value) <= band;
    const bool truncation_ok = res.truncation_bound < res.npv_stderr / 10.0 || res.npv_stderr == 0.0;

    Result r;
    r.doc["strategy"] = kind;
    r.doc["barrier"] = strat->barrier();
    r.doc["gamma"] = g;
    r.doc["x0"] = cfg.x0;
    r.doc["dt"] = cfg.dt;
    r.doc["t_max"] = cfg.horizon(p);
    r.doc["master_seed"] = cfg.master_seed;
    r.doc["antithetic"] = cfg.antithetic;
    r.doc["bridge_ruin"] = cfg.bridge_ruin;
    r.doc["npv_mean"] = res.npv_mean;
    r.doc["npv_stderr"] = res.npv_stderr;
    r.doc["ruin_fraction"] = res.ruin_fraction;
    r.doc["mean_ruin_time"] = res.mean_ruin_time;
    r.doc["n_paths"] = res.n_paths;
    r.doc["n_simulated"] = res.n_simulated;
    r.doc["truncation_bound"] = res.truncation_bound;
    r.doc["v_optimal"] = v_opt;
    r.doc["v_strategy"] = opt_json(strategy_value);
    r.doc["dominated"] = dominated;
    r.doc["agrees"] = agrees;
    r.doc["truncation_ok"] = truncation_ok;
    const bool ok = dominated && agrees && truncation_ok;
    r.doc["passed"] = ok;
    r.code = ok ? kOk : kVerificationFailed;

    r.table.columns = {"strategy", "npv_mean", "npv_stderr", "ruin_fraction", "mean_ruin_time", "n_paths",
                       "v_optimal", "v_strategy", "passed"};
    r.table.rows.push_back({kind, res.npv_mean, res.npv_stderr, res.ruin_fraction, res.mean_ruin_time,
                            static_cast<long long>(res.n_paths), v_opt, opt_cell(strategy_value),
                            static_cast<long long>(ok)});
    return r;
}

// Barrier moved by a relative step eps. A zero barrier moves to eps; when no closed form admits
// the raised barrier, it is lowered instead.
Solution perturbed(const ModelParams& p, double gamma, const Solution& sol, double eps) {
    if (sol.b == 0.0) return build(p, gamma, eps);
    try {
        return build(p, gamma, sol.b * (1.0 + eps));
    } catch (const DomainError&) {
        return build(p, gamma, sol.b * (1.0 - eps));
    }
}

Result cmd_verify(const Options& o) {
    const ModelParams p = params_of(o);
    const double g = require_gamma(o);
    Solution sol = solution_of(o, p, g);
    if (o.perturb_barrier) {
        if (!(*o.perturb_barrier > 0.0)) throw DomainError("perturb-barrier must be positive");
        sol = perturbed(p, g, sol, *o.perturb_barrier);
    }
    const VerificationReport rep = verify_solution(sol, o.tolerance);
    const ShapeFlags& f = rep.shape_flags;

    Result r;
    r.doc = solution_json(sol);
    r.doc["max_hjb_residual"] = rep.max_hjb_residual;
    r.doc["worst_x"] = rep.worst_x;
    r.doc["tolerance"] = rep.tolerance;
    r.doc["grid_points"] = rep.grid_points;
    r.doc["shape_flags"] = {{"increasing", f.increasing},     {"concave", f.concave},
                            {"ratio_decreasing", f.ratio_decreasing}, {"smooth_fit", f.smooth_fit},
                            {"barrier_slope", f.barrier_slope}, {"retention", f.retention}};
    json jumps = json::array();
    for (const auto& j : rep.breakpoint_jumps) jumps.push_back({{"x", j.x}, {"dv", j.dv}, {"dv1", j.dv1}, {"dv2", j.dv2}});
    r.doc["breakpoint_jumps"] = jumps;
    r.doc["passed"] = rep.passed();
    r.code = rep.passed() ? kOk : kVerificationFailed;

    r.table.columns = {"regime", "b", "max_hjb_residual", "worst_x", "increasing", "concave",
                       "ratio_decreasing", "smooth_fit", "barrier_slope", "retention", "passed"};
    auto i = [](bool b) { return Cell(static_cast<long long>(b)); };
    r.table.rows.push_back({to_string(sol.regime.kind), sol.b, rep.max_hjb_residual, rep.worst_x, i(f.increasing),
                            i(f.concave), i(f.ratio_decreasing), i(f.smooth_fit), i(f.barrier_slope),
                            i(f.retention), i(rep.passed())});
    return r;
}

void add_model(Registry& reg, CLI::App* sc, Options& o) {
    sc->add_option("--config", o.config, "JSON config with delta, sigma, mu, eta, gamma");
    reg.option("delta", o.delta, "discount rate");
    reg.option("sigma", o.sigma, "volatility");
    reg.option("mu", o.mu, "reinsurance safety loading");
    reg.option("eta", o.eta, "insurer safety loading");
    reg.option("gamma", o.gamma, "dividend decision intensity");
    reg.option("log2-gamma", o.log2_gamma, "gamma given as 2^N");
    reg.option("format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    reg.option("out", o.out, "write output to this file");
}

void add_grid(Registry& reg, Options& o) {
    reg.option("x-min", o.x_min, "smallest surplus level");
    reg.option("x-max", o.x_max, "largest surplus level");
    reg.option("x-steps", o.x_steps, "number of grid intervals");
    reg.flag("x-log", o.x_log, "geometric grid");
    reg.option("x-list", o.x_list, "explicit comma-separated surplus levels")->delimiter(',');
}

}  // namespace

std::string csv_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal periodic dividends with proportional reinsurance"};
    app.require_subcommand(1);
    Options o;

    struct Command {
        CLI::App* app;
        std::unique_ptr<Registry> reg;
        std::string default_format;
    };
    std::vector<Command> cmds;
    auto add_cmd = [&](const std::string& name, const std::string& desc, const std::string& fmt) -> Registry& {
        CLI::App* sc = app.add_subcommand(name, desc);
        cmds.push_back({sc, std::make_unique<Registry>(sc), fmt});
        add_model(*cmds.back().reg, sc, o);
        return *cmds.back().reg;
    };

    add_cmd("classify", "regime and gamma thresholds", "json");

    Registry& solve_r = add_cmd("solve", "optimal barrier and switch level", "json");
    solve_r.option("barrier", o.barrier, "use this barrier instead of the optimal one");

    Registry& curve_r = add_cmd("curve", "value function table", "csv");
    curve_r.option("barrier", o.barrier, "use this barrier instead of the optimal one");
    add_grid(curve_r, o);

    Registry& sg = add_cmd("sweep-gamma", "optimal barrier over gamma = 2^N", "csv");
    sg.option("n-min", o.n_min, "smallest N");
    sg.option("n-max", o.n_max, "largest N");
    sg.option("n-step", o.n_step, "step in N");

    Registry& sb = add_cmd("sweep-barrier", "value functions over a range of barriers", "csv");
    sb.option("b-min", o.b_min, "smallest barrier");
    sb.option("b-max", o.b_max, "largest barrier");
    sb.option("b-step", o.b_step, "barrier step");
    add_grid(sb, o);

    Registry& sim = add_cmd("simulate", "Monte Carlo NPV of a strategy", "json");
    sim.option("barrier", o.barrier, "barrier of the simulated strategy");
    sim.option("retention", o.retention, "constant retention level instead of the optimal feedback");
    sim.option("paths", o.paths, "number of samples (antithetic pairs by default)");
    sim.option("dt", o.dt, "Euler step");
    sim.option("seed", o.seed, "master seed");
    sim.option("tmax", o.tmax, "horizon (0: 40/delta)");
    sim.option("x0", o.x0, "initial surplus");
    sim.flag("no-antithetic", o.no_antithetic, "plain sampling");
    sim.flag("no-bridge", o.no_bridge, "check ruin only at step ends");
    sim.option("threads", o.threads, "worker threads (0: SOLVER_THREADS or all cores)");

    Registry& ver = add_cmd("verify", "HJB residual and shape checks", "json");
    ver.option("barrier", o.barrier, "verify the function for this barrier");
    ver.option("perturb-barrier", o.perturb_barrier, "relative barrier perturbation");
    ver.option("tolerance", o.tolerance, "residual tolerance");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(std::move(rev));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const Command* cmd = nullptr;
        for (const auto& c : cmds)
            if (c.app->parsed()) cmd = &c;
        const std::string name = cmd->app->get_name();

        if (!o.config.empty()) {
            std::ifstream in(o.config);
            if (!in) throw DomainError("cannot read config file " + o.config);
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::exception& e) {
                throw DomainError("config " + o.config + ": " + e.what());
            }
            if (!doc.is_object()) throw DomainError("config must be a JSON object");
            try {
                cmd->reg->apply(doc, name);
            } catch (const json::exception& e) {
                throw DomainError("config " + o.config + ": " + e.what());
            }
            // Either spelling of gamma on the command line replaces the other one from the file.
            if (cmd->app->count("--log2-gamma") > 0 && cmd->app->count("--gamma") == 0) o.gamma.reset();
            if (cmd->app->count("--gamma") > 0 && cmd->app->count("--log2-gamma") == 0) o.log2_gamma.reset();
        }
        const std::string fmt = o.format.empty() ? cmd->default_format : o.format;

        Result r;
        if (name == "classify") r = cmd_classify(o);
        else if (name == "solve") r = cmd_solve(o);
        else if (name == "curve") r = cmd_curve(o);
        else if (name == "sweep-gamma") r = cmd_sweep_gamma(o);
        else if (name == "sweep-barrier") r = cmd_sweep_barrier(o, err);
        else if (name == "simulate") r = cmd_simulate(o);
        else r = cmd_verify(o);

        std::string text;
        if (fmt == "json") {
            text = r.doc.dump(2) + "\n";
        } else {
            text = render_csv(r.table);
        }
        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw DomainError("cannot write " + o.out);
            f << text;
        }
        if (r.code == kVerificationFailed) err << name << ": check failed\n";
        return r.code;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace divopt::cli
