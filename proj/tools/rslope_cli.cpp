#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rslope/datagen.hpp"
#include "rslope/diagnostics.hpp"
#include "rslope/errors.hpp"
#include "rslope/harness.hpp"
#include "rslope/stats.hpp"

using namespace rslope;
using nlohmann::json;

namespace {

struct Global {
    std::uint64_t seed = 1;
    std::string config;
    std::string out;
    std::string format = "json";
};

struct PenaltyArgs {
    double c_lambda = PenaltyConfig{}.c_lambda;
    double c_mu = PenaltyConfig{}.c_mu;
    std::string tau = "inf";
    double delta = PenaltyConfig{}.delta;
    std::string regime;

    PenaltyConfig build() const
    {
        PenaltyConfig pc;
        pc.c_lambda = c_lambda;
        pc.c_mu = c_mu;
        pc.tau = tau == "inf" ? kSubGaussian : std::stod(tau);
        pc.delta = delta;
        pc.regime = regime.empty() ? (std::isinf(pc.tau) ? MuRegime::sorted_subgauss : MuRegime::sorted_heavy)
                                   : mu_regime_from_string(regime);
        pc.check();
        return pc;
    }
};

void add_penalty_flags(CLI::App* app, PenaltyArgs& p)
{
    app->add_option("--c-lambda", p.c_lambda, "lambda constant")->capture_default_str();
    app->add_option("--c-mu", p.c_mu, "mu constant")->capture_default_str();
    app->add_option("--tau", p.tau, "noise moment exponent, or inf")->capture_default_str();
    app->add_option("--delta", p.delta, "confidence level of the fixed mu")->capture_default_str();
    app->add_option("--mu-regime", p.regime, "sorted_heavy, sorted_subgauss or fixed (default from tau)");
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string vector_csv(const std::string& name, const Vector& v)
{
    std::string s = "index," + name + "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0)
            s += std::to_string(i) + "," + json(v[i]).dump() + "\n";
    return s;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

RegressionInstance load_any(const std::string& path)
{
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
        RegressionInstance inst{load_dataset_csv(path), {}, 0, {}};
        return inst;
    }
    return load_instance(path);
}

int cmd_fit(const Global& g, const std::string& input, const PenaltyArgs& pa, const std::string& variant,
            const FitConfig& fc)
{
    const RegressionInstance inst = load_any(input);
    const auto n = static_cast<std::size_t>(inst.ds.X().rows());
    const auto p = static_cast<std::size_t>(inst.ds.X().cols());
    const PenaltyConfig pc = pa.build();
    const WeightSequence lam = build_lambda(n, p, pc);
    FitResult fr;
    std::optional<double> objective;
    if (variant == "baseline") {
        fr = fit_nonrobust_baseline(inst.ds, lam, fc);
    } else {
        const WeightSequence mu = build_mu(n, pc);
        fr = fit_pivotal(inst.ds, lam, mu, fc);
        objective = objective_eval(inst.ds, fr.beta_hat, fr.theta_hat, lam, mu);
    }
    if (g.format == "csv") {
        write_output(g.out, vector_csv("beta_hat", fr.beta_hat));
        return 0;
    }
    json j{{"n", n},
           {"p", p},
           {"status", to_string(fr.status)},
           {"sigma_hat", fr.sigma_hat},
           {"outer_iterations", fr.outer_iterations},
           {"inner_iterations", fr.inner_iterations},
           {"kkt",
            {{"beta_dual_gap", fr.kkt.beta_dual_gap},
             {"theta_dual_gap", fr.kkt.theta_dual_gap},
             {"alignment_residual", fr.kkt.alignment_residual}}},
           {"beta_hat", to_std(fr.beta_hat)},
           {"theta_hat", to_std(fr.theta_hat)}};
    if (objective)
        j["objective"] = *objective;
    if (inst.truth.beta_star.size() == fr.beta_hat.size()) {
        const Vector d = fr.beta_hat - inst.truth.beta_star;
        j["sigma_norm_error_sq"] = d.dot(inst.truth.Sigma * d);
        j["pred_error_sq"] = (inst.ds.X() * d).squaredNorm() / static_cast<double>(n);
    }
    write_output(g.out, j.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const Global& g, std::optional<std::size_t> threads)
{
    if (g.config.empty())
        throw ConfigError("simulate needs --config");
    ExperimentConfig cfg = load_config(g.config);
    if (!g.out.empty())
        cfg.output = g.out;
    if (threads)
        cfg.threads = *threads;
    const GridResult result = run_grid(cfg);
    emit(result, cfg.output, g.format == "json" ? "json" : "csv");
    std::cerr << result.records.size() << " replications in " << result.table.cells.size() << " cells, "
              << "failure fraction " << result.failure_fraction << ", written to " << cfg.output << "\n";
    for (const auto& s : result.table.slopes)
        std::cerr << "slope along " << s.axis << ": " << s.fit.slope << " +- " << s.fit.std_error << "  ["
                  << s.group << "]\n";
    return result.failure_fraction > cfg.max_failure_fraction ? 2 : 0;
}

struct DiagnoseArgs {
    std::string input;
    std::size_t n = 200;
    std::size_t p = 50;
    std::size_t s = 5;
    std::size_t o = 0;
    std::string rows = "gaussian";
    std::size_t probes = 2000;
    double c_prime = 4.0;
    double event_c_prime = 100.0;
    double check_delta = 0.01;
};

int cmd_diagnose(const Global& g, const DiagnoseArgs& a, const PenaltyArgs& pa)
{
    Matrix X, Sigma;
    Vector xi;
    if (!a.input.empty()) {
        const RegressionInstance inst = load_any(a.input);
        X = inst.ds.X();
        Sigma = inst.truth.Sigma.size() ? inst.truth.Sigma : Matrix::Identity(X.cols(), X.cols());
        xi = inst.xi;
    } else {
        Sigma = gen_covariance(a.p, {});
        X = gen_design(a.n, a.p, Sigma, row_family_from_string(a.rows), g.seed);
        xi = gen_noise(a.n, NoiseSpec::gaussian(), g.seed + 1);
    }
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = static_cast<std::size_t>(X.cols());
    PenaltyConfig pc = pa.build();
    const WeightSequence lam = build_lambda(n, p, pc);
    const WeightSequence mu = build_mu(n, pc);
    IncoherenceConstants k{a.c_prime, a.check_delta};
    const DesignCheckReport d = check_design(X, Sigma, lam, mu, std::min(a.s, p), a.probes, g.seed, k);
    json j{{"n", n},
           {"p", p},
           {"design",
            {{"property1_margin", d.property1_margin},
             {"property2_margin", d.property2_margin},
             {"property3_margin", d.property3_margin},
             {"kappa_hat", d.kappa_hat},
             {"probes", d.probes},
             {"violated", d.violated}}}};
    if (xi.size() == X.rows()) {
        const std::size_t o_prime = default_o_prime(a.o, a.check_delta);
        const NoiseEventReport e = check_event_E(xi, o_prime, mu, a.event_c_prime);
        j["noise"] = {{"o_prime", e.o_prime},
                      {"lower_ok", e.lower_ok},
                      {"upper_ok", e.upper_ok},
                      {"quantile_ok", e.quantile_ok},
                      {"event_holds", e.holds()},
                      {"order_stat_bound", check_order_stat_bound(xi, std::max<std::size_t>(a.o, 1), mu)},
                      {"variance_window", check_variance_window(xi, std::max<std::size_t>(a.o, 1))},
                      {"max_ratio_statistic", max_ratio_statistic(xi)}};
    }
    write_output(g.out, j.dump(2) + "\n");
    return d.violated ? 3 : 0;
}

struct LowerBoundArgs {
    std::size_t n = 10000;
    std::size_t o = 100;
    double sigma = 1.0;
    std::string tau = "2";
    std::string dump;
};

int cmd_lower_bound(const Global& g, const LowerBoundArgs& a)
{
    const double tau = a.tau == "inf" ? kSubGaussian : std::stod(a.tau);
    const auto [first, second] = lower_bound_pair(a.n, a.o, a.sigma, tau, g.seed);
    const double ks = ks_statistic(to_std(first.ds.Y()), to_std(second.ds.Y()));
    const double crit = ks_critical_value(a.n, a.n, 0.01);
    if (!a.dump.empty()) {
        save_instance(first, a.dump + "_a.bin");
        save_instance(second, a.dump + "_b.bin");
    }
    const double b = first.truth.beta_star[0];
    json j{{"n", a.n},
           {"o", a.o},
           {"tau", a.tau},
           {"signal", b},
           {"sigma", a.sigma},
           {"sigma_tilde", second.truth.sigma},
           {"separation_sq", b * b},
           {"ks_statistic", ks},
           {"ks_critical_1pct", crit},
           {"indistinguishable", ks < crit}};
    write_output(g.out, j.dump(2) + "\n");
    return 0;
}

struct GenerateArgs {
    std::size_t n = 200;
    std::size_t p = 400;
    std::size_t s = 10;
    std::size_t o = 0;
    std::string noise = "gaussian";
    std::string tau = "inf";
    double sigma = 1.0;
    std::string adversary = "random_large";
    double magnitude = 10.0;
    std::string rows = "gaussian";
    double rho = 0.0;
};

int cmd_generate(const Global& g, const GenerateArgs& a)
{
    if (g.out.empty())
        throw std::invalid_argument("generate needs --out");
    InstanceSpec spec;
    spec.n = a.n;
    spec.p = a.p;
    spec.s = a.s;
    spec.o = a.o;
    spec.noise.family = noise_family_from_string(a.noise);
    spec.noise.tau = a.tau == "inf" ? kSubGaussian : std::stod(a.tau);
    spec.sigma = a.sigma;
    spec.adversary = a.o > 0 ? adversary_from_string(a.adversary) : AdversaryStrategy::none;
    spec.adversary_magnitude = a.magnitude;
    spec.rows = row_family_from_string(a.rows);
    if (a.rho != 0.0)
        spec.covariance = {CovarianceKind::ar1, a.rho};
    save_instance(make_instance(spec, g.seed), g.out);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Robust pivotal sorted-L1 regression"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--config", g.config, "experiment config (YAML)");
    app.add_option("--out", g.out, "output file or directory");
    app.add_option("--format", g.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    PenaltyArgs pa;
    FitConfig fc;

    auto* fit = app.add_subcommand("fit", "fit one instance file (binary or CSV with y first)");
    std::string input;
    std::string variant = "pivotal";
    fit->add_option("input", input, "instance file")->required();
    fit->add_option("--variant", variant, "pivotal or baseline")
        ->check(CLI::IsMember({"pivotal", "baseline"}))
        ->capture_default_str();
    fit->add_option("--kkt-tol", fc.kkt_tol)->capture_default_str();
    fit->add_option("--max-outer", fc.max_outer)->capture_default_str();
    fit->add_option("--max-inner", fc.max_inner)->capture_default_str();
    add_penalty_flags(fit, pa);

    auto* sim = app.add_subcommand("simulate", "run an experiment grid from --config");
    std::optional<std::size_t> threads;
    sim->add_option("--threads", threads, "worker threads (0: all cores)");

    auto* diag = app.add_subcommand("diagnose", "design incoherence, kappa and noise event checks");
    DiagnoseArgs da;
    diag->add_option("--input", da.input, "instance file (otherwise a design is generated)");
    diag->add_option("--n", da.n)->capture_default_str();
    diag->add_option("--p", da.p)->capture_default_str();
    diag->add_option("--s", da.s)->capture_default_str();
    diag->add_option("--o", da.o)->capture_default_str();
    diag->add_option("--rows", da.rows, "gaussian or rademacher")->capture_default_str();
    diag->add_option("--probes", da.probes)->capture_default_str();
    diag->add_option("--c-prime", da.c_prime, "constant of the incoherence bounds")->capture_default_str();
    diag->add_option("--event-c-prime", da.event_c_prime, "constant of the noise event")->capture_default_str();
    diag->add_option("--check-delta", da.check_delta)->capture_default_str();
    add_penalty_flags(diag, pa);

    auto* lb = app.add_subcommand("lower-bound", "two models with identical response laws");
    LowerBoundArgs la;
    lb->add_option("--n", la.n)->capture_default_str();
    lb->add_option("--o", la.o)->capture_default_str();
    lb->add_option("--sigma", la.sigma)->capture_default_str();
    lb->add_option("--tau", la.tau, "number or inf")->capture_default_str();
    lb->add_option("--dump-instance", la.dump, "write PREFIX_a.bin and PREFIX_b.bin");

    auto* gen = app.add_subcommand("generate", "write a synthetic instance to --out");
    GenerateArgs ga;
    gen->add_option("--n", ga.n)->capture_default_str();
    gen->add_option("--p", ga.p)->capture_default_str();
    gen->add_option("--s", ga.s)->capture_default_str();
    gen->add_option("--o", ga.o)->capture_default_str();
    gen->add_option("--noise", ga.noise)->capture_default_str();
    gen->add_option("--tau", ga.tau)->capture_default_str();
    gen->add_option("--sigma", ga.sigma)->capture_default_str();
    gen->add_option("--adversary", ga.adversary)->capture_default_str();
    gen->add_option("--magnitude", ga.magnitude)->capture_default_str();
    gen->add_option("--rows", ga.rows)->capture_default_str();
    gen->add_option("--rho", ga.rho, "AR(1) correlation of the design")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit)
            return cmd_fit(g, input, pa, variant, fc);
        if (*sim)
            return cmd_simulate(g, threads);
        if (*diag)
            return cmd_diagnose(g, da, pa);
        if (*lb)
            return cmd_lower_bound(g, la);
        if (*gen)
            return cmd_generate(g, ga);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
