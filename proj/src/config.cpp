#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "rslope/errors.hpp"
#include "rslope/harness.hpp"

namespace rslope {

namespace {

std::string where(const YAML::Node& node)
{
    const YAML::Mark m = node.Mark();
    if (m.line < 0)
        return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

void allow_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed)
{
    if (!map.IsMap())
        throw ConfigError(section + " must be a mapping" + where(map));
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + (section.empty() ? key : section + "." + key) + "'" +
                              where(kv.first));
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& name)
{
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("bad value for '" + name + "'" + where(node));
    }
}

double real(const YAML::Node& node, const std::string& name)
{
    if (node.IsScalar()) {
        const std::string text = node.Scalar();
        if (text == "inf" || text == "infinity" || text == ".inf")
            return kSubGaussian;
    }
    return scalar<double>(node, name);
}

template <typename T, typename F>
std::vector<T> list(const YAML::Node& node, const std::string& name, F one)
{
    std::vector<T> out;
    if (node.IsSequence()) {
        for (const auto& item : node)
            out.push_back(one(item, name));
        if (out.empty())
            throw ConfigError("'" + name + "' is empty" + where(node));
    } else {
        out.push_back(one(node, name));
    }
    return out;
}

std::size_t count(const YAML::Node& node, const std::string& name)
{
    const double v = real(node, name);
    if (!(v >= 0) || v != std::floor(v) || std::isinf(v))
        throw ConfigError("'" + name + "' must be a non-negative integer" + where(node));
    return static_cast<std::size_t>(v);
}

NoiseSpec noise_spec(const YAML::Node& node, const std::string& name)
{
    NoiseSpec spec;
    try {
        if (node.IsScalar()) {
            spec.family = noise_family_from_string(node.Scalar());
        } else {
            allow_keys(node, name, {"family", "tau", "shape"});
            if (!node["family"])
                throw ConfigError("missing required key '" + name + ".family'" + where(node));
            spec.family = noise_family_from_string(node["family"].as<std::string>());
            if (node["tau"])
                spec.tau = real(node["tau"], name + ".tau");
            if (node["shape"])
                spec.shape = real(node["shape"], name + ".shape");
        }
        if (spec.family == NoiseFamily::gaussian || spec.family == NoiseFamily::rademacher)
            spec.tau = kSubGaussian;
        spec.check();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("bad noise law: " + std::string(e.what()) + where(node));
    }
    return spec;
}

template <typename F>
auto named(const YAML::Node& node, const std::string& name, F parse)
{
    try {
        return parse(node.as<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError("bad value for '" + name + "': " + e.what() + where(node));
    }
}

void emit_real(YAML::Emitter& out, double x)
{
    if (std::isinf(x))
        out << "inf";
    else
        out << x;
}

template <typename T>
void emit_seq(YAML::Emitter& out, const std::vector<T>& v)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (const T& x : v) {
        if constexpr (std::is_floating_point_v<T>)
            emit_real(out, x);
        else
            out << x;
    }
    out << YAML::EndSeq;
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!root.IsMap())
        throw ConfigError("config must be a mapping");
    allow_keys(root, "",
               {"schema_version", "seed", "replications", "output", "threads", "max_failure_fraction", "grid",
                "penalty", "solver", "record_wall_time"});

    std::vector<std::string> missing;
    if (!root["schema_version"])
        missing.push_back("schema_version");
    const YAML::Node grid = root["grid"];
    if (!grid) {
        missing.push_back("grid");
    } else {
        allow_keys(grid, "grid",
                   {"n", "p", "p_ratio", "s", "o", "o_fraction", "noise", "sigma", "adversary", "magnitude",
                    "variant", "covariance", "rows", "beta"});
        if (!grid["n"])
            missing.push_back("grid.n");
        if (!grid["p"] && !grid["p_ratio"])
            missing.push_back("grid.p (or grid.p_ratio)");
        if (!grid["s"])
            missing.push_back("grid.s");
    }
    if (!missing.empty()) {
        std::string msg = "missing required keys:";
        for (const auto& m : missing)
            msg += " " + m;
        throw ConfigError(msg);
    }

    ExperimentConfig cfg;
    cfg.schema_version = scalar<int>(root["schema_version"], "schema_version");
    if (cfg.schema_version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version) +
                          where(root["schema_version"]));
    if (root["seed"])
        cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
    if (root["replications"])
        cfg.replications = count(root["replications"], "replications");
    if (root["output"])
        cfg.output = scalar<std::string>(root["output"], "output");
    if (root["threads"])
        cfg.threads = count(root["threads"], "threads");
    if (root["max_failure_fraction"])
        cfg.max_failure_fraction = real(root["max_failure_fraction"], "max_failure_fraction");
    if (root["record_wall_time"])
        cfg.settings.record_wall_time = scalar<bool>(root["record_wall_time"], "record_wall_time");

    cfg.n = list<std::size_t>(grid["n"], "grid.n", count);
    if (grid["p"] && grid["p_ratio"])
        throw ConfigError("give only one of grid.p and grid.p_ratio" + where(grid["p_ratio"]));
    cfg.p_is_ratio = static_cast<bool>(grid["p_ratio"]);
    cfg.p = list<double>(cfg.p_is_ratio ? grid["p_ratio"] : grid["p"], cfg.p_is_ratio ? "grid.p_ratio" : "grid.p",
                         real);
    cfg.s = list<std::size_t>(grid["s"], "grid.s", count);
    if (grid["o"] && grid["o_fraction"])
        throw ConfigError("give only one of grid.o and grid.o_fraction" + where(grid["o_fraction"]));
    cfg.o_is_fraction = static_cast<bool>(grid["o_fraction"]);
    if (grid["o"] || grid["o_fraction"])
        cfg.o = list<double>(cfg.o_is_fraction ? grid["o_fraction"] : grid["o"],
                             cfg.o_is_fraction ? "grid.o_fraction" : "grid.o", real);
    else
        cfg.o = {0.0};
    if (grid["noise"])
        cfg.noise = list<NoiseSpec>(grid["noise"], "grid.noise", noise_spec);
    if (grid["sigma"])
        cfg.sigma = list<double>(grid["sigma"], "grid.sigma", real);
    if (grid["adversary"])
        cfg.adversary = named(grid["adversary"], "grid.adversary", adversary_from_string);
    if (grid["magnitude"])
        cfg.magnitude = list<double>(grid["magnitude"], "grid.magnitude", real);
    if (grid["variant"])
        cfg.variants = list<Variant>(grid["variant"], "grid.variant", [](const YAML::Node& n, const std::string& k) {
            return named(n, k, variant_from_string);
        });
    if (const YAML::Node cov = grid["covariance"]) {
        allow_keys(cov, "grid.covariance", {"kind", "rho"});
        if (cov["kind"]) {
            const std::string kind = scalar<std::string>(cov["kind"], "grid.covariance.kind");
            if (kind == "identity")
                cfg.covariance.kind = CovarianceKind::identity;
            else if (kind == "ar1")
                cfg.covariance.kind = CovarianceKind::ar1;
            else
                throw ConfigError("unknown covariance kind '" + kind + "'" + where(cov["kind"]));
        }
        if (cov["rho"])
            cfg.covariance.rho = real(cov["rho"], "grid.covariance.rho");
    }
    if (grid["rows"])
        cfg.rows = named(grid["rows"], "grid.rows", row_family_from_string);
    if (const YAML::Node beta = grid["beta"]) {
        allow_keys(beta, "grid.beta", {"pattern", "magnitude"});
        if (beta["pattern"]) {
            const std::string pat = scalar<std::string>(beta["pattern"], "grid.beta.pattern");
            if (pat == "flat")
                cfg.pattern = BetaPattern::flat;
            else if (pat == "decaying")
                cfg.pattern = BetaPattern::decaying;
            else
                throw ConfigError("unknown beta pattern '" + pat + "'" + where(beta["pattern"]));
        }
        if (beta["magnitude"])
            cfg.beta_magnitude = real(beta["magnitude"], "grid.beta.magnitude");
    }

    if (const YAML::Node pen = root["penalty"]) {
        allow_keys(pen, "penalty", {"c_lambda", "c_mu", "delta", "delta_policy", "tau", "mu_regime"});
        PenaltyConfig& pc = cfg.settings.penalty;
        if (pen["c_lambda"])
            pc.c_lambda = real(pen["c_lambda"], "penalty.c_lambda");
        if (pen["c_mu"])
            pc.c_mu = real(pen["c_mu"], "penalty.c_mu");
        if (pen["delta"])
            pc.delta = real(pen["delta"], "penalty.delta");
        if (pen["tau"])
            cfg.settings.tau = real(pen["tau"], "penalty.tau");
        if (pen["mu_regime"])
            cfg.settings.regime = named(pen["mu_regime"], "penalty.mu_regime", mu_regime_from_string);
        if (pen["delta_policy"]) {
            const std::string pol = scalar<std::string>(pen["delta_policy"], "penalty.delta_policy");
            if (pol == "constant")
                cfg.settings.delta_policy = DeltaPolicy::constant;
            else if (pol == "at_least_o")
                cfg.settings.delta_policy = DeltaPolicy::at_least_o;
            else
                throw ConfigError("unknown delta_policy '" + pol + "'" + where(pen["delta_policy"]));
        }
        try {
            PenaltyConfig probe = pc;
            if (cfg.settings.tau)
                probe.tau = *cfg.settings.tau;
            probe.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("penalty: ") + e.what() + where(pen));
        }
    }

    if (const YAML::Node sol = root["solver"]) {
        allow_keys(sol, "solver",
                   {"rel_tol", "max_outer", "max_inner", "sigma_floor", "step_safety", "kkt_tol", "inner_tol",
                    "working_set"});
        FitConfig& f = cfg.settings.fit;
        if (sol["rel_tol"])
            f.rel_tol = real(sol["rel_tol"], "solver.rel_tol");
        if (sol["max_outer"])
            f.max_outer = static_cast<int>(count(sol["max_outer"], "solver.max_outer"));
        if (sol["max_inner"])
            f.max_inner = static_cast<int>(count(sol["max_inner"], "solver.max_inner"));
        if (sol["sigma_floor"])
            f.sigma_floor = real(sol["sigma_floor"], "solver.sigma_floor");
        if (sol["step_safety"])
            f.step_safety = real(sol["step_safety"], "solver.step_safety");
        if (sol["kkt_tol"])
            f.kkt_tol = real(sol["kkt_tol"], "solver.kkt_tol");
        if (sol["inner_tol"])
            f.inner_tol = real(sol["inner_tol"], "solver.inner_tol");
        if (sol["working_set"])
            f.working_set = count(sol["working_set"], "solver.working_set");
        try {
            f.check();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("solver: ") + e.what() + where(sol));
        }
    }

    if (!(cfg.max_failure_fraction >= 0.0 && cfg.max_failure_fraction <= 1.0))
        throw ConfigError("max_failure_fraction must lie in [0, 1]" + where(root["max_failure_fraction"]));
    cfg.cells();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_yaml(const ExperimentConfig& cfg)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "schema_version" << YAML::Value << cfg.schema_version;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;
    out << YAML::Key << "replications" << YAML::Value << cfg.replications;
    out << YAML::Key << "output" << YAML::Value << cfg.output;
    out << YAML::Key << "threads" << YAML::Value << cfg.threads;
    out << YAML::Key << "max_failure_fraction" << YAML::Value << cfg.max_failure_fraction;
    out << YAML::Key << "record_wall_time" << YAML::Value << cfg.settings.record_wall_time;

    out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value;
    emit_seq(out, cfg.n);
    out << YAML::Key << (cfg.p_is_ratio ? "p_ratio" : "p") << YAML::Value;
    emit_seq(out, cfg.p);
    out << YAML::Key << "s" << YAML::Value;
    emit_seq(out, cfg.s);
    out << YAML::Key << (cfg.o_is_fraction ? "o_fraction" : "o") << YAML::Value;
    emit_seq(out, cfg.o);
    out << YAML::Key << "noise" << YAML::Value << YAML::BeginSeq;
    for (const NoiseSpec& nz : cfg.noise) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "family" << YAML::Value << to_string(nz.family);
        out << YAML::Key << "tau" << YAML::Value;
        emit_real(out, nz.tau);
        out << YAML::Key << "shape" << YAML::Value << nz.shape << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "sigma" << YAML::Value;
    emit_seq(out, cfg.sigma);
    out << YAML::Key << "adversary" << YAML::Value << to_string(cfg.adversary);
    out << YAML::Key << "magnitude" << YAML::Value;
    emit_seq(out, cfg.magnitude);
    std::vector<std::string> variants;
    for (Variant v : cfg.variants)
        variants.push_back(to_string(v));
    out << YAML::Key << "variant" << YAML::Value;
    emit_seq(out, variants);
    out << YAML::Key << "covariance" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "kind"
        << YAML::Value << (cfg.covariance.kind == CovarianceKind::identity ? "identity" : "ar1") << YAML::Key
        << "rho" << YAML::Value << cfg.covariance.rho << YAML::EndMap;
    out << YAML::Key << "rows" << YAML::Value << to_string(cfg.rows);
    out << YAML::Key << "beta" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "pattern"
        << YAML::Value << (cfg.pattern == BetaPattern::flat ? "flat" : "decaying") << YAML::Key << "magnitude"
        << YAML::Value << cfg.beta_magnitude << YAML::EndMap;
    out << YAML::EndMap;

    const PenaltyConfig& pc = cfg.settings.penalty;
    out << YAML::Key << "penalty" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "c_lambda" << YAML::Value << pc.c_lambda;
    out << YAML::Key << "c_mu" << YAML::Value << pc.c_mu;
    out << YAML::Key << "delta" << YAML::Value << pc.delta;
    out << YAML::Key << "delta_policy" << YAML::Value
        << (cfg.settings.delta_policy == DeltaPolicy::constant ? "constant" : "at_least_o");
    if (cfg.settings.tau) {
        out << YAML::Key << "tau" << YAML::Value;
        emit_real(out, *cfg.settings.tau);
    }
    if (cfg.settings.regime)
        out << YAML::Key << "mu_regime" << YAML::Value << to_string(*cfg.settings.regime);
    out << YAML::EndMap;

    const FitConfig& f = cfg.settings.fit;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rel_tol" << YAML::Value << f.rel_tol;
    out << YAML::Key << "max_outer" << YAML::Value << f.max_outer;
    out << YAML::Key << "max_inner" << YAML::Value << f.max_inner;
    out << YAML::Key << "sigma_floor" << YAML::Value << f.sigma_floor;
    out << YAML::Key << "step_safety" << YAML::Value << f.step_safety;
    out << YAML::Key << "kkt_tol" << YAML::Value << f.kkt_tol;
    out << YAML::Key << "inner_tol" << YAML::Value << f.inner_tol;
    out << YAML::Key << "working_set" << YAML::Value << f.working_set;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace rslope
