#include "rslope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "rslope/errors.hpp"
#include "rslope/rng.hpp"

namespace rslope {

namespace {

std::string num(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (std::isnan(x))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_num(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::string noise_label(const NoiseSpec& spec)
{
    std::string out = to_string(spec.family);
    if (spec.family == NoiseFamily::student_t || spec.family == NoiseFamily::symmetric_pareto)
        out += "(" + short_num(spec.tau) + (spec.shape > 0 ? "," + short_num(spec.shape) : "") + ")";
    return out;
}

std::string covariance_label(const CovarianceSpec& c)
{
    return c.kind == CovarianceKind::identity ? "identity" : "ar1(" + short_num(c.rho) + ")";
}

enum class Axis { none, n, o };

// Cell key in a fixed field order. Grouping keys drop one axis and use the
// configured labels of p and o so that cells along the axis line up.
std::string cell_key(const Cell& c, Axis drop)
{
    std::string k;
    if (drop != Axis::n)
        k += "n=" + std::to_string(c.n) + ",";
    k += drop == Axis::none ? "p=" + std::to_string(c.p) : "p~" + short_num(c.p_label);
    k += ",s=" + std::to_string(c.s);
    if (drop == Axis::none)
        k += ",o=" + std::to_string(c.o);
    else if (drop == Axis::n)
        k += ",o~" + short_num(c.o_label);
    k += ",noise=" + noise_label(c.noise);
    k += ",sigma=" + short_num(c.sigma);
    k += ",adversary=" + to_string(c.adversary);
    k += ",magnitude=" + short_num(c.magnitude);
    k += ",variant=" + to_string(c.variant);
    k += ",cov=" + covariance_label(c.covariance);
    k += ",rows=" + to_string(c.rows);
    k += ",beta=" + std::string(c.pattern == BetaPattern::flat ? "flat" : "decaying") + ":" +
         short_num(c.beta_magnitude);
    return k;
}

bool failed(const ReplicationRecord& r)
{
    return r.status == "error" || r.status == to_string(FitStatus::max_iter);
}

MetricSummary summarize(std::vector<double> v)
{
    MetricSummary m;
    if (v.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan};
    }
    std::sort(v.begin(), v.end());
    m.median = quantile(v, 0.5);
    m.q90 = quantile(v, 0.9);
    m.q99 = quantile(v, 0.99);
    return m;
}

nlohmann::json metric_json(const MetricSummary& m)
{
    return {{"median", m.median}, {"q90", m.q90}, {"q99", m.q99}};
}

nlohmann::json cell_json(const Cell& c)
{
    return {{"key", c.key()},
            {"n", c.n},
            {"p", c.p},
            {"s", c.s},
            {"o", c.o},
            {"noise", to_string(c.noise.family)},
            {"tau", num(c.noise.tau)},
            {"sigma", c.sigma},
            {"adversary", to_string(c.adversary)},
            {"magnitude", c.magnitude},
            {"variant", to_string(c.variant)}};
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::pivotal_sorted: return "pivotal_sorted";
    case Variant::pivotal_fixed: return "pivotal_fixed";
    case Variant::nonrobust_baseline: return "nonrobust_baseline";
    }
    return "?";
}

Variant variant_from_string(const std::string& name)
{
    if (name == "pivotal_sorted")
        return Variant::pivotal_sorted;
    if (name == "pivotal_fixed")
        return Variant::pivotal_fixed;
    if (name == "nonrobust_baseline")
        return Variant::nonrobust_baseline;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

std::string Cell::key() const { return cell_key(*this, Axis::none); }

void Cell::check() const
{
    auto fail = [&](const std::string& why) { throw ConfigError("cell " + key() + ": " + why); };
    if (n == 0 || p == 0)
        fail("n and p must be positive");
    if (s > p)
        fail("s exceeds p");
    if (o > n)
        fail("o exceeds n");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        fail("sigma must be finite and non-negative");
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude))
        fail("magnitude must be finite and non-negative");
    try {
        noise.check();
    } catch (const std::exception& e) {
        fail(e.what());
    }
}

std::vector<Cell> ExperimentConfig::cells() const
{
    if (replications < 1)
        throw ConfigError("replications must be at least 1");
    if (n.empty() || p.empty() || s.empty())
        throw ConfigError("grid needs at least one value of n, p and s");
    std::vector<Cell> out;
    const std::vector<double> o_values = o.empty() ? std::vector<double>{0.0} : o;
    for (std::size_t nv : n)
        for (double pv : p)
            for (std::size_t sv : s)
                for (double ov : o_values)
                    for (const NoiseSpec& nz : noise)
                        for (double sg : sigma)
                            for (double mg : magnitude)
                                for (Variant var : variants) {
                                    Cell c;
                                    c.n = nv;
                                    c.p_label = pv;
                                    c.p = static_cast<std::size_t>(
                                        std::llround(p_is_ratio ? pv * static_cast<double>(nv) : pv));
                                    c.s = sv;
                                    c.o_label = ov;
                                    c.o = static_cast<std::size_t>(
                                        std::llround(o_is_fraction ? ov * static_cast<double>(nv) : ov));
                                    c.noise = nz;
                                    c.sigma = sg;
                                    c.adversary = ov > 0 ? adversary : AdversaryStrategy::none;
                                    c.magnitude = mg;
                                    c.variant = var;
                                    c.covariance = covariance;
                                    c.rows = rows;
                                    c.pattern = pattern;
                                    c.beta_magnitude = beta_magnitude;
                                    if (pv < 0 || ov < 0)
                                        throw ConfigError("cell " + c.key() + ": negative grid value");
                                    c.check();
                                    out.push_back(c);
                                }
    return out;
}

std::uint64_t replication_seed(std::uint64_t master, const Cell& cell, std::size_t r)
{
    std::uint64_t h = mix64(r + 1);
    h = mix64(h ^ (cell.s + 0x51ULL));
    h = mix64(h ^ (cell.p + 0x3f1ULL));
    h = mix64(h ^ (cell.n + 0x7e3ULL));
    return derive_seed(master, h);
}

PenaltyConfig penalty_for(const Cell& cell, const RunSettings& settings)
{
    PenaltyConfig pc = settings.penalty;
    pc.tau = settings.tau.value_or(cell.noise.tau);
    switch (cell.variant) {
    case Variant::pivotal_sorted:
    case Variant::nonrobust_baseline:
        pc.regime = std::isinf(pc.tau) ? MuRegime::sorted_subgauss : MuRegime::sorted_heavy;
        break;
    case Variant::pivotal_fixed:
        pc.regime = MuRegime::fixed;
        break;
    }
    if (settings.regime && cell.variant == Variant::pivotal_sorted)
        pc.regime = *settings.regime;
    if (settings.delta_policy == DeltaPolicy::at_least_o && cell.o > 0)
        pc.delta = std::min(pc.delta, std::exp(-static_cast<double>(cell.o)));
    return pc;
}

ReplicationRecord run_replication(const Cell& cell, std::uint64_t seed, const RunSettings& settings,
                                  std::size_t replication)
{
    cell.check();
    ReplicationRecord rec;
    rec.cell = cell;
    rec.seed = seed;
    rec.replication = replication;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.sigma_norm_error_sq = rec.pred_error_sq = rec.theta_error_sq = rec.sigma_hat = nan;

    const auto start = std::chrono::steady_clock::now();
    try {
        InstanceSpec spec;
        spec.n = cell.n;
        spec.p = cell.p;
        spec.s = cell.s;
        spec.beta_magnitude = cell.beta_magnitude;
        spec.pattern = cell.pattern;
        spec.covariance = cell.covariance;
        spec.rows = cell.rows;
        spec.noise = cell.noise;
        spec.sigma = cell.sigma;
        spec.o = cell.o;
        spec.adversary = cell.o > 0 ? cell.adversary : AdversaryStrategy::none;
        spec.adversary_magnitude = cell.magnitude;
        const RegressionInstance inst = make_instance(spec, seed);

        const PenaltyConfig pc = penalty_for(cell, settings);
        const WeightSequence lam = build_lambda(cell.n, cell.p, pc);
        FitResult fr;
        if (cell.variant == Variant::nonrobust_baseline) {
            fr = fit_nonrobust_baseline(inst.ds, lam, settings.fit);
        } else {
            const WeightSequence mu = build_mu(cell.n, pc);
            fr = fit_pivotal(inst.ds, lam, mu, settings.fit);
        }

        const Vector d_beta = fr.beta_hat - inst.truth.beta_star;
        rec.sigma_norm_error_sq = cell.covariance.kind == CovarianceKind::identity
                                      ? d_beta.squaredNorm()
                                      : d_beta.dot(inst.truth.Sigma * d_beta);
        rec.pred_error_sq = (inst.ds.X() * d_beta).squaredNorm() / static_cast<double>(cell.n);
        rec.theta_error_sq = (fr.theta_hat - inst.truth.theta_star).squaredNorm();
        rec.sigma_hat = fr.sigma_hat;
        rec.status = to_string(fr.status);
    } catch (const std::exception&) {
        rec.status = "error";
    }
    if (settings.record_wall_time)
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

GridResult run_grid(const ExperimentConfig& cfg)
{
    const std::vector<Cell> cells = cfg.cells();
    const std::size_t reps = cfg.replications;
    const std::size_t total = cells.size() * reps;
    std::vector<ReplicationRecord> records(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const Cell& c = cells[i / reps];
            const std::size_t r = i % reps;
            records[i] = run_replication(c, replication_seed(cfg.seed, c, r), cfg.settings, r);
        }
    };
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(total, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    std::sort(records.begin(), records.end(), [](const ReplicationRecord& a, const ReplicationRecord& b) {
        const std::string ka = a.cell.key(), kb = b.cell.key();
        if (ka != kb)
            return ka < kb;
        return a.replication < b.replication;
    });

    GridResult out;
    out.table = aggregate(records);
    const auto bad = std::count_if(records.begin(), records.end(), failed);
    out.failure_fraction = total ? static_cast<double>(bad) / static_cast<double>(total) : 0.0;
    out.records = std::move(records);
    return out;
}

RateTable aggregate(const std::vector<ReplicationRecord>& records)
{
    std::map<std::string, std::vector<const ReplicationRecord*>> by_cell;
    for (const auto& r : records)
        by_cell[r.cell.key()].push_back(&r);

    RateTable table;
    for (const auto& [key, group] : by_cell) {
        CellSummary cs;
        cs.cell = group.front()->cell;
        cs.count = group.size();
        std::vector<double> a, b, c, d;
        for (const ReplicationRecord* r : group) {
            if (failed(*r)) {
                ++cs.failures;
                continue;
            }
            auto push = [](std::vector<double>& v, double x) {
                if (std::isfinite(x))
                    v.push_back(x);
            };
            push(a, r->sigma_norm_error_sq);
            push(b, r->pred_error_sq);
            push(c, r->theta_error_sq);
            push(d, r->sigma_hat);
        }
        cs.sigma_norm_error_sq = summarize(std::move(a));
        cs.pred_error_sq = summarize(std::move(b));
        cs.theta_error_sq = summarize(std::move(c));
        cs.sigma_hat = summarize(std::move(d));
        table.cells.push_back(std::move(cs));
    }

    for (Axis axis : {Axis::n, Axis::o}) {
        std::map<std::string, std::vector<std::pair<double, double>>> groups;
        for (const CellSummary& cs : table.cells) {
            if (axis == Axis::o && cs.cell.o == 0)
                continue;
            const double x = axis == Axis::n ? static_cast<double>(cs.cell.n) : static_cast<double>(cs.cell.o);
            groups[cell_key(cs.cell, axis)].emplace_back(x, cs.sigma_norm_error_sq.median);
        }
        for (auto& [group, pts] : groups) {
            std::sort(pts.begin(), pts.end());
            std::vector<double> xs, ys;
            for (const auto& [x, y] : pts)
                if (y > 0 && std::isfinite(y)) {
                    xs.push_back(x);
                    ys.push_back(y);
                }
            if (xs.size() < 3)
                continue;
            table.slopes.push_back({axis == Axis::n ? "n" : "o", group, fit_loglog_slope(xs, ys)});
        }
    }
    return table;
}

double summarize_deviation(const std::vector<ReplicationRecord>& records, double delta)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");
    std::vector<double> v;
    for (const auto& r : records)
        if (!failed(r) && std::isfinite(r.sigma_norm_error_sq))
            v.push_back(r.sigma_norm_error_sq);
    if (v.empty())
        throw std::invalid_argument("summarize_deviation: no usable records");
    return quantile(std::move(v), 1.0 - delta);
}

std::string records_csv(const std::vector<ReplicationRecord>& records)
{
    std::ostringstream out;
    out << "n,p,s,o,tau,noise,variant,adversary,magnitude,sigma,replication,seed,"
           "sigma_norm_error_sq,pred_error_sq,theta_error_sq,sigma_hat,status,wall_ms\n";
    for (const auto& r : records) {
        const Cell& c = r.cell;
        out << c.n << ',' << c.p << ',' << c.s << ',' << c.o << ',' << num(c.noise.tau) << ','
            << to_string(c.noise.family) << ',' << to_string(c.variant) << ',' << to_string(c.adversary) << ','
            << num(c.magnitude) << ',' << num(c.sigma) << ',' << r.replication << ',' << r.seed << ','
            << num(r.sigma_norm_error_sq) << ',' << num(r.pred_error_sq) << ',' << num(r.theta_error_sq) << ','
            << num(r.sigma_hat) << ',' << r.status << ',' << num(r.wall_ms) << '\n';
    }
    return out.str();
}

std::string table_json(const RateTable& table)
{
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cs : table.cells) {
        nlohmann::json j = cell_json(cs.cell);
        j["count"] = cs.count;
        j["failures"] = cs.failures;
        j["sigma_norm_error_sq"] = metric_json(cs.sigma_norm_error_sq);
        j["pred_error_sq"] = metric_json(cs.pred_error_sq);
        j["theta_error_sq"] = metric_json(cs.theta_error_sq);
        j["sigma_hat"] = metric_json(cs.sigma_hat);
        cells.push_back(std::move(j));
    }
    nlohmann::json slopes = nlohmann::json::array();
    for (const auto& s : table.slopes)
        slopes.push_back({{"axis", s.axis},
                          {"group", s.group},
                          {"slope", s.fit.slope},
                          {"std_error", s.fit.std_error},
                          {"intercept", s.fit.intercept},
                          {"points", s.fit.points}});
    return nlohmann::json{{"cells", cells}, {"slopes", slopes}}.dump(2) + "\n";
}

std::string slopes_csv(const RateTable& table)
{
    std::ostringstream out;
    out << "axis,group,slope,std_error,intercept,points\n";
    for (const auto& s : table.slopes)
        out << s.axis << ",\"" << s.group << "\"," << num(s.fit.slope) << ',' << num(s.fit.std_error) << ','
            << num(s.fit.intercept) << ',' << s.fit.points << '\n';
    return out.str();
}

void emit(const GridResult& result, const std::string& dir, const std::string& format)
{
    if (format != "csv" && format != "json")
        throw std::invalid_argument("format must be csv or json");
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    write_file(root / "records.csv", records_csv(result.records));
    write_file(root / "table.json", table_json(result.table));
    write_file(root / "slopes.csv", slopes_csv(result.table));
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : result.records) {
            nlohmann::json j = cell_json(r.cell);
            j["replication"] = r.replication;
            j["seed"] = r.seed;
            j["sigma_norm_error_sq"] = r.sigma_norm_error_sq;
            j["pred_error_sq"] = r.pred_error_sq;
            j["theta_error_sq"] = r.theta_error_sq;
            j["sigma_hat"] = r.sigma_hat;
            j["status"] = r.status;
            j["wall_ms"] = r.wall_ms;
            arr.push_back(std::move(j));
        }
        write_file(root / "records.json", arr.dump(2) + "\n");
    }
}

} // namespace rslope
