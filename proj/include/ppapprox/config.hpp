#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "bounds.hpp"
#include "density.hpp"
#include "geometry.hpp"
#include "lrdtest.hpp"
#include "models.hpp"

namespace ppapprox {

using Json = nlohmann::json;

/// Schema or syntax problem in a config file; `where` is a JSON pointer or line:column.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

enum class ExperimentKind { bound_sweep, domination_counts, domination_d2_slope, density_experiment, lrd_size_power, validate_model };

inline constexpr std::array<std::pair<ExperimentKind, std::string_view>, 6> experiment_names{{
    {ExperimentKind::bound_sweep, "bound_sweep"},
    {ExperimentKind::domination_counts, "domination_counts"},
    {ExperimentKind::domination_d2_slope, "domination_d2_slope"},
    {ExperimentKind::density_experiment, "density_experiment"},
    {ExperimentKind::lrd_size_power, "lrd_size_power"},
    {ExperimentKind::validate_model, "validate_model"},
}};

inline std::string to_string(ExperimentKind k) {
    for (const auto& [e, s] : experiment_names)
        if (e == k) return std::string(s);
    return "?";
}

enum class GridMode { automatic, fine, rate_path, explicit_lists };

struct GridChoice {
    GridMode mode = GridMode::automatic;
    std::vector<long> m;
    std::vector<double> h;
};

struct McConfig {
    std::size_t replicates = 0;
    std::size_t samples = 0;
    std::size_t bootstrap = 0;
};

struct LrdConfig {
    double alpha = 0.05;
    double slope = 50.0;
    std::optional<double> lipschitz_LD;
    double epsilon = 0.0;
    double null_ell = 1.0;
    std::size_t calibration_replicates = 0;
    std::size_t evaluation_replicates = 0;
    ModelVariant alternative;
};

struct ValidateConfig {
    std::vector<double> rect_sizes;
    std::size_t mc_n = 0;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::bound_sweep;
    std::uint64_t seed = 0;
    std::string output_dir;
    SpaceConfig space;
    StretchSchedule schedule;
    std::optional<ModelVariant> model;
    std::optional<ConditionCertificate> certificate;
    std::optional<std::pair<double, double>> regularity;
    std::vector<double> T_grid;
    std::vector<Theorem> theorems;
    GridChoice grids;
    McConfig mc;
    std::string kernel;
    LrdConfig lrd;
    ValidateConfig validate;

    ProcessModel process() const {
        if (!model) throw std::invalid_argument("config has no model");
        return {space, *model};
    }
};

namespace config_detail {

inline std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

inline void allow_keys(const Json& j, const std::string& ptr, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError(child(ptr, k), "unknown key '" + k + "'");
}

inline const Json& need(const Json& j, const std::string& ptr, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(child(ptr, key), "missing required key '" + key + "'");
    return *it;
}

inline double num(const Json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    return j.get<double>();
}

inline double num(const Json& j, const std::string& ptr, const std::string& key) {
    return num(need(j, ptr, key), child(ptr, key));
}

inline double positive(const Json& j, const std::string& ptr, const std::string& key) {
    const double v = num(j, ptr, key);
    if (!(v > 0.0)) throw ConfigError(child(ptr, key), "must be > 0");
    return v;
}

inline double nonnegative(const Json& j, const std::string& ptr, const std::string& key) {
    const double v = num(j, ptr, key);
    if (!(v >= 0.0)) throw ConfigError(child(ptr, key), "must be >= 0");
    return v;
}

inline std::uint64_t uint(const Json& j, const std::string& ptr) {
    if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
        throw ConfigError(ptr, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
}

inline std::string str(const Json& j, const std::string& ptr) {
    if (!j.is_string()) throw ConfigError(ptr, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> numbers(const Json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], child(ptr, i)));
    return out;
}

inline SpaceConfig parse_space(const Json& j, const std::string& ptr) {
    allow_keys(j, ptr, {"d1", "d2", "mu2"});
    SpaceConfig s;
    s.d1 = static_cast<int>(uint(need(j, ptr, "d1"), child(ptr, "d1")));
    s.d2 = static_cast<int>(uint(need(j, ptr, "d2"), child(ptr, "d2")));
    if (s.d1 < 1 || s.d2 < 1) throw ConfigError(ptr, "d1 and d2 must be >= 1");
    const std::string mu = str(need(j, ptr, "mu2"), child(ptr, "mu2"));
    if (mu == "lebesgue") s.mu2 = Mu2Kind::lebesgue;
    else if (mu == "counting") s.mu2 = Mu2Kind::counting;
    else throw ConfigError(child(ptr, "mu2"), "expected 'lebesgue' or 'counting'");
    return s;
}

inline StretchSchedule parse_schedule(const Json& j, const std::string& ptr) {
    allow_keys(j, ptr, {"k", "delta"});
    StretchSchedule s{num(j, ptr, "k"), num(j, ptr, "delta")};
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
    return s;
}

inline DensitySpec parse_density(const Json& j, const std::string& ptr) {
    const std::string form = str(need(j, ptr, "form"), child(ptr, "form"));
    DensitySpec d;
    if (form == "constant") {
        allow_keys(j, ptr, {"form", "ell"});
        d = DensitySpec::constant(nonnegative(j, ptr, "ell"));
    } else if (form == "separable_quadratic") {
        allow_keys(j, ptr, {"form", "a", "b"});
        d = DensitySpec::quadratic(num(j, ptr, "a"), num(j, ptr, "b"));
    } else if (form == "custom_table") {
        allow_keys(j, ptr, {"form", "radii", "values"});
        d.form = DensitySpec::Form::custom_table;
        d.radii = numbers(need(j, ptr, "radii"), child(ptr, "radii"));
        d.values = numbers(need(j, ptr, "values"), child(ptr, "values"));
    } else {
        throw ConfigError(child(ptr, "form"), "unknown density form '" + form + "'");
    }
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
    return d;
}

inline ModelVariant parse_model(const Json& j, const std::string& ptr) {
    const std::string type = str(need(j, ptr, "type"), child(ptr, "type"));
    if (type == "homogeneous_poisson") {
        allow_keys(j, ptr, {"type", "ell"});
        return HomogeneousPoisson{nonnegative(j, ptr, "ell")};
    }
    if (type == "inhomogeneous_poisson") {
        allow_keys(j, ptr, {"type", "density"});
        return InhomogeneousPoisson{parse_density(need(j, ptr, "density"), child(ptr, "density"))};
    }
    if (type == "cluster") {
        allow_keys(j, ptr, {"type", "parent_rate", "size_pmf", "radius"});
        ClusterBounded c;
        c.parent_rate = nonnegative(j, ptr, "parent_rate");
        c.size_pmf = numbers(need(j, ptr, "size_pmf"), child(ptr, "size_pmf"));
        c.radius = positive(j, ptr, "radius");
        return c;
    }
    if (type == "markov") {
        allow_keys(j, ptr, {"type", "transition", "rates"});
        MarkovModulated m;
        const Json& P = need(j, ptr, "transition");
        const std::string pp = child(ptr, "transition");
        if (!P.is_array() || P.empty()) throw ConfigError(pp, "expected a nonempty matrix");
        for (std::size_t i = 0; i < P.size(); ++i) m.transition.push_back(numbers(P[i], child(pp, i)));
        m.rates = numbers(need(j, ptr, "rates"), child(ptr, "rates"));
        return m;
    }
    throw ConfigError(child(ptr, "type"), "unknown model type '" + type + "'");
}

inline BetaCheck parse_beta(const Json& j, const std::string& ptr, int d2) {
    const std::string fam = str(need(j, ptr, "family"), child(ptr, "family"));
    if (fam == "zero") {
        allow_keys(j, ptr, {"family"});
        return BetaCheck::zero();
    }
    if (fam == "power") {
        allow_keys(j, ptr, {"family", "c", "s"});
        return BetaCheck::power(nonnegative(j, ptr, "c"), num(j, ptr, "s"), d2);
    }
    if (fam == "finite_range") {
        allow_keys(j, ptr, {"family", "c", "u0"});
        return BetaCheck::finite_range(nonnegative(j, ptr, "c"), nonnegative(j, ptr, "u0"));
    }
    if (fam == "geometric") {
        allow_keys(j, ptr, {"family", "c", "gamma"});
        return BetaCheck::geometric(nonnegative(j, ptr, "c"), nonnegative(j, ptr, "gamma"));
    }
    throw ConfigError(child(ptr, "family"), "unknown beta family '" + fam + "'");
}

inline MixingKind parse_kind(const Json& j, const std::string& ptr) {
    const std::string k = str(j, ptr);
    if (k == "rho") return MixingKind::rho;
    if (k == "beta") return MixingKind::beta;
    if (k == "phi") return MixingKind::phi;
    throw ConfigError(ptr, "expected 'rho', 'beta' or 'phi'");
}

inline ConditionCertificate parse_certificate(const Json& j, const std::string& ptr, int d2) {
    allow_keys(j, ptr, {"kappa", "iota", "alpha", "beta", "kind", "all_kinds"});
    ConditionCertificate c;
    c.kappa = nonnegative(j, ptr, "kappa");
    c.iota = nonnegative(j, ptr, "iota");
    const Json& a = need(j, ptr, "alpha");
    const std::string ap = child(ptr, "alpha");
    allow_keys(a, ap, {"c", "r"});
    c.alpha = {nonnegative(a, ap, "c"), positive(a, ap, "r")};
    c.beta = parse_beta(need(j, ptr, "beta"), child(ptr, "beta"), d2);
    c.kind = parse_kind(need(j, ptr, "kind"), child(ptr, "kind"));
    const Json& ak = need(j, ptr, "all_kinds");
    if (!ak.is_boolean()) throw ConfigError(child(ptr, "all_kinds"), "expected a boolean");
    c.all_kinds = ak.get<bool>();
    c.derivation = "supplied in config";
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
    return c;
}

inline std::vector<double> parse_T_grid(const Json& j, const std::string& ptr) {
    std::vector<double> T;
    if (j.is_array()) {
        T = numbers(j, ptr);
    } else {
        allow_keys(j, ptr, {"start", "ratio", "count"});
        const double start = positive(j, ptr, "start");
        const double ratio = positive(j, ptr, "ratio");
        const std::uint64_t count = uint(need(j, ptr, "count"), child(ptr, "count"));
        if (count == 0) throw ConfigError(child(ptr, "count"), "T grid is empty");
        for (std::uint64_t i = 0; i < count; ++i) T.push_back(start * std::pow(ratio, static_cast<double>(i)));
    }
    if (T.empty()) throw ConfigError(ptr, "T grid is empty");
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!(T[i] >= 1.0)) throw ConfigError(child(ptr, i), "T must be >= 1");
        if (i > 0 && !(T[i] > T[i - 1])) throw ConfigError(child(ptr, i), "T grid must be strictly increasing");
    }
    return T;
}

inline GridChoice parse_grids(const Json& j, const std::string& ptr) {
    GridChoice g;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "auto") g.mode = GridMode::automatic;
        else if (s == "fine") g.mode = GridMode::fine;
        else if (s == "rate_path") g.mode = GridMode::rate_path;
        else throw ConfigError(ptr, "expected 'auto', 'fine', 'rate_path' or an object with m and h lists");
        return g;
    }
    allow_keys(j, ptr, {"m", "h"});
    g.mode = GridMode::explicit_lists;
    for (double m : numbers(need(j, ptr, "m"), child(ptr, "m"))) {
        if (!(m >= 0.0) || m != std::floor(m)) throw ConfigError(child(ptr, "m"), "m values must be nonnegative integers");
        g.m.push_back(static_cast<long>(m));
    }
    g.h = numbers(need(j, ptr, "h"), child(ptr, "h"));
    for (double h : g.h)
        if (!(h >= 1.0)) throw ConfigError(child(ptr, "h"), "h values must be >= 1");
    return g;
}

}  // namespace config_detail

/// Parses and validates a config document. Unknown keys and missing physics fields are errors.
inline ExperimentConfig parse_config(const Json& j) {
    using namespace config_detail;
    const std::string root;
    if (!j.is_object()) throw ConfigError("/", "config must be an object");
    ExperimentConfig c;
    const std::string kind = str(need(j, root, "experiment"), "/experiment");
    bool found = false;
    for (const auto& [e, s] : experiment_names)
        if (s == kind) c.kind = e, found = true;
    if (!found) throw ConfigError("/experiment", "unknown experiment kind '" + kind + "'");

    std::vector<std::string_view> keys{"experiment", "seed", "output_dir", "space", "model"};
    auto extend = [&](std::initializer_list<std::string_view> more) { keys.insert(keys.end(), more); };
    switch (c.kind) {
        case ExperimentKind::bound_sweep: extend({"schedule", "T_grid", "theorems", "grids", "certificate", "regularity"}); break;
        case ExperimentKind::domination_counts: extend({"schedule", "T_grid", "grids", "certificate", "mc"}); break;
        case ExperimentKind::domination_d2_slope: extend({"schedule", "T_grid", "grids", "certificate", "theorems", "mc"}); break;
        case ExperimentKind::density_experiment: extend({"schedule", "T_grid", "mc", "kernel"}); break;
        case ExperimentKind::lrd_size_power: extend({"schedule", "T_grid", "lrd"}); break;
        case ExperimentKind::validate_model: extend({"validate"}); break;
    }
    for (const auto& [k, v] : j.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("/" + k, "unknown key '" + k + "'");

    c.seed = uint(need(j, root, "seed"), "/seed");
    if (j.contains("output_dir")) c.output_dir = str(j["output_dir"], "/output_dir");
    c.space = parse_space(need(j, root, "space"), "/space");
    if (j.contains("model")) c.model = parse_model(j["model"], "/model");
    if (j.contains("certificate")) c.certificate = parse_certificate(j["certificate"], "/certificate", c.space.d2);
    if (j.contains("regularity")) {
        const Json& r = j["regularity"];
        allow_keys(r, "/regularity", {"L", "z"});
        c.regularity = std::make_pair(nonnegative(r, "/regularity", "L"), positive(r, "/regularity", "z"));
    }
    if (c.kind == ExperimentKind::bound_sweep) {
        if (!c.model && !c.certificate) throw ConfigError("/model", "bound_sweep needs a model or a certificate");
    } else if (!c.model && c.kind != ExperimentKind::lrd_size_power) {
        throw ConfigError("/model", "missing required key 'model'");
    }
    if (c.model) {
        try {
            validate(ProcessModel{c.space, *c.model});
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/model", e.what());
        }
    }

    if (c.kind != ExperimentKind::validate_model) {
        c.schedule = parse_schedule(need(j, root, "schedule"), "/schedule");
        c.T_grid = parse_T_grid(need(j, root, "T_grid"), "/T_grid");
        for (std::size_t i = 0; i < c.T_grid.size(); ++i)
            if (!c.space.admits(c.T_grid[i]))
                throw ConfigError("/T_grid/" + std::to_string(i), "T is not admissible for counting mu2 (need n^D2)");
    }
    if (j.contains("grids")) c.grids = parse_grids(j["grids"], "/grids");
    else if (c.kind == ExperimentKind::bound_sweep || c.kind == ExperimentKind::domination_counts ||
             c.kind == ExperimentKind::domination_d2_slope)
        throw ConfigError("/grids", "missing required key 'grids'");

    if (c.kind == ExperimentKind::bound_sweep || c.kind == ExperimentKind::domination_d2_slope) {
        const Json& th = need(j, root, "theorems");
        if (!th.is_array() || th.empty()) throw ConfigError("/theorems", "expected a nonempty array of theorem labels");
        for (std::size_t i = 0; i < th.size(); ++i) {
            const std::string s = str(th[i], "/theorems/" + std::to_string(i));
            auto t = theorem_from_string(s);
            if (!t) throw ConfigError("/theorems/" + std::to_string(i), "unknown theorem '" + s + "'");
            c.theorems.push_back(*t);
        }
        if (c.kind == ExperimentKind::domination_d2_slope &&
            (c.theorems.size() != 1 || c.theorems[0] == Theorem::dtv_counts))
            throw ConfigError("/theorems", "domination_d2_slope needs exactly one d2 theorem");
    }
    if (c.kind == ExperimentKind::domination_counts) c.theorems = {Theorem::dtv_counts};

    if (c.kind == ExperimentKind::domination_counts || c.kind == ExperimentKind::domination_d2_slope ||
        c.kind == ExperimentKind::density_experiment) {
        const Json& mc = need(j, root, "mc");
        switch (c.kind) {
            case ExperimentKind::domination_counts: allow_keys(mc, "/mc", {"replicates", "bootstrap"}); break;
            case ExperimentKind::domination_d2_slope: allow_keys(mc, "/mc", {"samples", "bootstrap"}); break;
            default: allow_keys(mc, "/mc", {"replicates"}); break;
        }
        if (c.kind != ExperimentKind::domination_d2_slope) {
            c.mc.replicates = uint(need(mc, "/mc", "replicates"), "/mc/replicates");
            if (c.mc.replicates < 1000) throw ConfigError("/mc/replicates", "must be >= 1000");
        } else {
            c.mc.samples = uint(need(mc, "/mc", "samples"), "/mc/samples");
            if (c.mc.samples < 2) throw ConfigError("/mc/samples", "must be >= 2");
        }
        if (c.kind != ExperimentKind::density_experiment) {
            c.mc.bootstrap = uint(need(mc, "/mc", "bootstrap"), "/mc/bootstrap");
            if (c.mc.bootstrap < 2) throw ConfigError("/mc/bootstrap", "must be >= 2");
        }
    }
    if (c.kind == ExperimentKind::density_experiment) {
        c.kernel = str(need(j, root, "kernel"), "/kernel");
        try {
            kernel_by_name(c.kernel, c.space.d1);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/kernel", e.what());
        }
    }
    if (c.kind == ExperimentKind::lrd_size_power) {
        const Json& l = need(j, root, "lrd");
        allow_keys(l, "/lrd", {"alpha", "slope", "lipschitz_LD", "epsilon", "null_ell", "calibration_replicates",
                               "evaluation_replicates", "alternative"});
        c.lrd.alpha = num(l, "/lrd", "alpha");
        if (!(c.lrd.alpha > 0.0 && c.lrd.alpha < 1.0)) throw ConfigError("/lrd/alpha", "must lie in (0, 1)");
        c.lrd.slope = positive(l, "/lrd", "slope");
        if (l.contains("lipschitz_LD")) c.lrd.lipschitz_LD = positive(l, "/lrd", "lipschitz_LD");
        c.lrd.epsilon = nonnegative(l, "/lrd", "epsilon");
        c.lrd.null_ell = positive(l, "/lrd", "null_ell");
        c.lrd.calibration_replicates = uint(need(l, "/lrd", "calibration_replicates"), "/lrd/calibration_replicates");
        c.lrd.evaluation_replicates = uint(need(l, "/lrd", "evaluation_replicates"), "/lrd/evaluation_replicates");
        if (c.lrd.calibration_replicates < 1 || c.lrd.evaluation_replicates < 1)
            throw ConfigError("/lrd", "replicate counts must be >= 1");
        c.lrd.alternative = parse_model(need(l, "/lrd", "alternative"), "/lrd/alternative");
        try {
            validate(ProcessModel{c.space, c.lrd.alternative});
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/lrd/alternative", e.what());
        }
        double LD = 0.0;
        try {
            LD = c.lrd.lipschitz_LD ? *c.lrd.lipschitz_LD : default_lipschitz_LD(c.space.dim());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/lrd/lipschitz_LD", e.what());
        }
        if (!(c.lrd.alpha - c.lrd.slope * LD * c.lrd.epsilon > 0.0))
            throw ConfigError("/lrd", "infeasible test: alpha - slope L_D epsilon <= 0");
    }
    if (c.kind == ExperimentKind::validate_model) {
        const Json& v = need(j, root, "validate");
        allow_keys(v, "/validate", {"rect_sizes", "mc_n"});
        c.validate.rect_sizes = numbers(need(v, "/validate", "rect_sizes"), "/validate/rect_sizes");
        for (double s : c.validate.rect_sizes)
            if (!(s > 0.0)) throw ConfigError("/validate/rect_sizes", "sizes must be > 0");
        c.validate.mc_n = uint(need(v, "/validate", "mc_n"), "/validate/mc_n");
        if (c.validate.mc_n < 1000) throw ConfigError("/validate/mc_n", "must be >= 1000");
    }
    return c;
}

// Serialization ---------------------------------------------------------------

namespace config_detail {

inline Json density_json(const DensitySpec& d) {
    switch (d.form) {
        case DensitySpec::Form::constant: return {{"form", "constant"}, {"ell", d.ell}};
        case DensitySpec::Form::separable_quadratic: return {{"form", "separable_quadratic"}, {"a", d.a}, {"b", d.b}};
        case DensitySpec::Form::custom_table: return {{"form", "custom_table"}, {"radii", d.radii}, {"values", d.values}};
    }
    return {};
}

inline Json model_json(const ModelVariant& m) {
    return std::visit(
        [](const auto& v) -> Json {
            using M = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<M, HomogeneousPoisson>) {
                return {{"type", "homogeneous_poisson"}, {"ell", v.ell}};
            } else if constexpr (std::is_same_v<M, InhomogeneousPoisson>) {
                return {{"type", "inhomogeneous_poisson"}, {"density", density_json(v.density)}};
            } else if constexpr (std::is_same_v<M, ClusterBounded>) {
                return {{"type", "cluster"}, {"parent_rate", v.parent_rate}, {"size_pmf", v.size_pmf}, {"radius", v.radius}};
            } else {
                return {{"type", "markov"}, {"transition", v.transition}, {"rates", v.rates}};
            }
        },
        m);
}

inline Json beta_json(const BetaCheck& b) {
    if (b.c == 0.0) return {{"family", "zero"}};
    switch (b.family) {
        case BetaCheck::Family::power: return {{"family", "power"}, {"c", b.c}, {"s", b.s}};
        case BetaCheck::Family::finite_range: return {{"family", "finite_range"}, {"c", b.c}, {"u0", b.u0}};
        case BetaCheck::Family::geometric: return {{"family", "geometric"}, {"c", b.c}, {"gamma", b.gamma}};
    }
    return {};
}

inline Json certificate_json(const ConditionCertificate& c) {
    return {{"kappa", c.kappa},
            {"iota", c.iota},
            {"alpha", {{"c", c.alpha.c}, {"r", c.alpha.r}}},
            {"beta", beta_json(c.beta)},
            {"kind", to_string(c.kind)},
            {"all_kinds", c.all_kinds}};
}

}  // namespace config_detail

/// Canonical document for a parsed config; parse_config(to_json(c)) reproduces c.
inline Json to_json(const ExperimentConfig& c) {
    using namespace config_detail;
    Json j;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
    j["space"] = {{"d1", c.space.d1}, {"d2", c.space.d2}, {"mu2", to_string(c.space.mu2)}};
    if (c.model) j["model"] = model_json(*c.model);
    if (c.certificate) j["certificate"] = certificate_json(*c.certificate);
    if (c.regularity) j["regularity"] = {{"L", c.regularity->first}, {"z", c.regularity->second}};
    if (c.kind != ExperimentKind::validate_model) {
        j["schedule"] = {{"k", c.schedule.k}, {"delta", c.schedule.delta}};
        j["T_grid"] = c.T_grid;
    }
    const bool bound_grids = c.kind == ExperimentKind::bound_sweep || c.kind == ExperimentKind::domination_counts ||
                             c.kind == ExperimentKind::domination_d2_slope;
    if (bound_grids) {
        switch (c.grids.mode) {
            case GridMode::automatic: j["grids"] = "auto"; break;
            case GridMode::fine: j["grids"] = "fine"; break;
            case GridMode::rate_path: j["grids"] = "rate_path"; break;
            case GridMode::explicit_lists: j["grids"] = {{"m", c.grids.m}, {"h", c.grids.h}}; break;
        }
    }
    if (c.kind == ExperimentKind::bound_sweep || c.kind == ExperimentKind::domination_d2_slope) {
        Json th = Json::array();
        for (Theorem t : c.theorems) th.push_back(to_string(t));
        j["theorems"] = th;
    }
    switch (c.kind) {
        case ExperimentKind::domination_counts:
            j["mc"] = {{"replicates", c.mc.replicates}, {"bootstrap", c.mc.bootstrap}};
            break;
        case ExperimentKind::domination_d2_slope: j["mc"] = {{"samples", c.mc.samples}, {"bootstrap", c.mc.bootstrap}}; break;
        case ExperimentKind::density_experiment:
            j["mc"] = {{"replicates", c.mc.replicates}};
            j["kernel"] = c.kernel;
            break;
        case ExperimentKind::lrd_size_power: {
            Json l{{"alpha", c.lrd.alpha},
                   {"slope", c.lrd.slope},
                   {"epsilon", c.lrd.epsilon},
                   {"null_ell", c.lrd.null_ell},
                   {"calibration_replicates", c.lrd.calibration_replicates},
                   {"evaluation_replicates", c.lrd.evaluation_replicates},
                   {"alternative", model_json(c.lrd.alternative)}};
            if (c.lrd.lipschitz_LD) l["lipschitz_LD"] = *c.lrd.lipschitz_LD;
            j["lrd"] = l;
            break;
        }
        case ExperimentKind::validate_model:
            j["validate"] = {{"rect_sizes", c.validate.rect_sizes}, {"mc_n", c.validate.mc_n}};
            break;
        default: break;
    }
    return j;
}

/// Parses config text; syntax errors carry line:column.
inline Json parse_config_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(parse_config_text(read_text_file(path))); }

/// Canonical bytes: compact dump of the parsed document, keys sorted.
inline std::string canonical_bytes(const Json& j) { return j.dump(); }

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string config_hash(const Json& j) { return sha256_hex(canonical_bytes(j)); }

}  // namespace ppapprox
