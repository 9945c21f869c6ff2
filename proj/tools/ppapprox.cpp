// Command-line front end: simulate, distance, bound, sweep, density, lrd-test, validate.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ppapprox/ppapprox.hpp"

namespace {

using namespace ppapprox;

constexpr int kSchemaError = 2;
constexpr int kInfeasible = 3;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string theorem;
    unsigned jobs = 1;
    double T = 0.0;
    long m = -1;
    double h = 0.0;
    std::string a, b, pattern;
};

struct Loaded {
    ExperimentConfig cfg;
    std::string hash;
};

Loaded load(const Options& o) {
    const Json doc = parse_config_text(read_text_file(o.config));
    Loaded l{parse_config(doc), config_hash(doc)};
    if (o.seed) l.cfg.seed = *o.seed;
    return l;
}

double pick_T(const Options& o, const ExperimentConfig& cfg) {
    if (o.T > 0.0) return o.T;
    if (cfg.T_grid.empty()) throw ConfigError("--T", "no T given and the config has no T grid");
    return cfg.T_grid.front();
}

int run_pipeline(const Options& o, std::optional<ExperimentKind> expect) {
    Loaded l = load(o);
    if (expect && l.cfg.kind != *expect)
        throw ConfigError("/experiment", "this subcommand needs experiment '" + to_string(*expect) + "'");
    const auto start = std::chrono::steady_clock::now();
    const ExperimentResult res = run_experiment(l.cfg, o.jobs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string dir = !o.out.empty() ? o.out : !l.cfg.output_dir.empty() ? l.cfg.output_dir : "out";
    write_results(dir, l.cfg, res, l.hash, secs);
    for (const auto& c : res.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    std::cout << "rows=" << res.rows.size() << " audit_failures=" << res.audit_failures << " -> " << dir << "\n";
    return 0;
}

int cmd_simulate(const Options& o) {
    Loaded l = load(o);
    const double T = pick_T(o, l.cfg);
    const double w = l.cfg.schedule(T);
    PatternFile f{l.cfg.space.d1, l.cfg.space.d2, T, w,
                  sample(l.cfg.process(), window_JT(l.cfg.space, w, T), stream_seed(l.cfg.seed, stream_tag("simulate"), 0))};
    if (o.out.empty())
        write_pattern(std::cout, f);
    else
        save_pattern(o.out, f);
    return 0;
}

int cmd_distance(const Options& o) {
    const PatternFile a = load_pattern(o.a), b = load_pattern(o.b);
    if (a.d1 + a.d2 != b.d1 + b.d2) throw std::runtime_error("patterns have different dimensions");
    std::cout << format_real(d1(a.pattern, b.pattern)) << "\n";
    return 0;
}

int cmd_bound(const Options& o) {
    Loaded l = load(o);
    const double T = pick_T(o, l.cfg);
    Theorem th = Theorem::d2_rho_210;
    if (!o.theorem.empty()) {
        auto t = theorem_from_string(o.theorem);
        if (!t) throw ConfigError("--theorem", "unknown theorem '" + o.theorem + "'");
        th = *t;
    } else if (!l.cfg.theorems.empty()) {
        th = l.cfg.theorems.front();
    }
    if (l.cfg.kind == ExperimentKind::validate_model) throw ConfigError("/schedule", "bound needs a schedule");
    const ConditionCertificate cert = certificate_of(l.cfg);
    OptimizedBound ob;
    if (o.m >= 0 && o.h >= 1.0) {
        BoundInputs in = bound_inputs(l.cfg, cert, T, th);
        in.m = o.m;
        in.h = o.h;
        ob = {o.m, o.h, evaluate_bound(in)};
    } else {
        ob = bound_at(l.cfg, cert, T, th, o.jobs);
    }
    Json terms = Json::object();
    for (const auto& t : ob.report.terms) terms[t.label] = nan_to_null(t.value);
    Json out{{"theorem", to_string(th)}, {"T", T},       {"w", l.cfg.schedule(T)},          {"m", ob.m},
             {"h", ob.h},                {"terms", terms}, {"total", nan_to_null(ob.report.total)},
             {"total_clamped", ob.report.total_clamped}, {"epsilon", nan_to_null(ob.report.epsilon)},
             {"L", ob.report.L},         {"lambda_lower", ob.report.lambda_lower},
             {"infinite", ob.report.infinite}};
    std::cout << out.dump(2) << "\n";
    return ob.report.infinite ? kInfeasible : 0;
}

int cmd_lrd_test(const Options& o) {
    Loaded l = load(o);
    if (l.cfg.kind != ExperimentKind::lrd_size_power) throw ConfigError("/experiment", "lrd-test needs an lrd_size_power config");
    if (o.pattern.empty()) return run_pipeline(o, ExperimentKind::lrd_size_power);
    const PatternFile pf = load_pattern(o.pattern);
    if (pf.d1 != l.cfg.space.d1 || pf.d2 != l.cfg.space.d2) throw std::runtime_error("pattern dimensions differ from config");
    TestConfig tc = test_config(l.cfg, pf.T);
    tc.w = pf.w;
    const Calibration cal = calibrate_critical_value(tc, o.jobs);
    const TestResult r = run_test(tc, cal, pf.pattern);
    Json out{{"statistic", r.statistic}, {"t_alpha", r.t_alpha}, {"reject", r.reject},
             {"size_deficit_bound", r.size_deficit_bound}, {"lipschitz_LD", tc.LD()}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson process approximation: simulation, distances, explicit bounds and experiments"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub, bool with_config = true) {
        if (with_config) sub->add_option("--config", o.config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the master seed");
        sub->add_option("--out", o.out, "Output file or directory");
        sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto* simulate = app.add_subcommand("simulate", "Sample one pattern on J_T and write a pattern file");
    common(simulate);
    simulate->add_option("--T", o.T, "Window parameter T (default: first T of the grid)");
    auto* distance = app.add_subcommand("distance", "d1 distance between two pattern files");
    common(distance, false);
    distance->add_option("a", o.a, "First pattern file")->required()->check(CLI::ExistingFile);
    distance->add_option("b", o.b, "Second pattern file")->required()->check(CLI::ExistingFile);
    auto* bound = app.add_subcommand("bound", "Evaluate one bound; exit 3 when it is infinite");
    common(bound);
    bound->set_help_flag("--help", "Print this help message and exit");
    bound->add_option("--theorem", o.theorem, "Theorem label");
    bound->add_option("--T", o.T, "Window parameter T");
    bound->add_option("--m", o.m, "Neighbourhood size (with --h: skip optimization)");
    bound->add_option("--h", o.h, "Discretization parameter");
    auto* sweep = app.add_subcommand("sweep", "Run the experiment named in the config");
    common(sweep);
    auto* density = app.add_subcommand("density", "Run a density_experiment config");
    common(density);
    auto* lrd = app.add_subcommand("lrd-test", "Calibrate the nearest-neighbour test; test a pattern or run size/power");
    common(lrd);
    lrd->add_option("--pattern", o.pattern, "Observed pattern file")->check(CLI::ExistingFile);
    auto* validate = app.add_subcommand("validate", "Run a validate_model config");
    common(validate);

    CLI11_PARSE(app, argc, argv);
    try {
        if (simulate->parsed()) return cmd_simulate(o);
        if (distance->parsed()) return cmd_distance(o);
        if (bound->parsed()) return cmd_bound(o);
        if (sweep->parsed()) return run_pipeline(o, std::nullopt);
        if (density->parsed()) return run_pipeline(o, ExperimentKind::density_experiment);
        if (lrd->parsed()) return cmd_lrd_test(o);
        if (validate->parsed()) return run_pipeline(o, ExperimentKind::validate_model);
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.what() << "\n";
        return kSchemaError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
