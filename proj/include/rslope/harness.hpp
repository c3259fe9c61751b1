#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rslope/datagen.hpp"
#include "rslope/penalties.hpp"
#include "rslope/solver.hpp"
#include "rslope/stats.hpp"

namespace rslope {

enum class Variant { pivotal_sorted, pivotal_fixed, nonrobust_baseline };
std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// How the confidence level of the fixed mu sequence is chosen per cell:
/// the configured value, or the smaller exp(-o) so that log(1/delta) >= o.
enum class DeltaPolicy { constant, at_least_o };

/// One grid point. `p_label` and `o_label` hold the configured grid value
/// (absolute, or a ratio to n) and are what slope groups are keyed on.
struct Cell {
    std::size_t n = 100;
    std::size_t p = 200;
    std::size_t s = 5;
    std::size_t o = 0;
    double p_label = 200;
    double o_label = 0;
    NoiseSpec noise;
    double sigma = 1.0;
    AdversaryStrategy adversary = AdversaryStrategy::none;
    double magnitude = 1.0;
    Variant variant = Variant::pivotal_sorted;
    CovarianceSpec covariance;
    RowFamily rows = RowFamily::gaussian;
    BetaPattern pattern = BetaPattern::flat;
    double beta_magnitude = 1.0;

    /// Stable text key, also the sort key of records.
    std::string key() const;
    void check() const;
};

struct RunSettings {
    /// c_lambda, c_mu and delta; tau and the mu regime come from the cell
    /// unless overridden below.
    PenaltyConfig penalty;
    std::optional<double> tau;
    std::optional<MuRegime> regime;
    DeltaPolicy delta_policy = DeltaPolicy::constant;
    FitConfig fit;
    bool record_wall_time = true;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    std::string output = "out";
    std::size_t threads = 0;  // 0: hardware concurrency
    double max_failure_fraction = 0.1;

    std::vector<std::size_t> n;
    std::vector<double> p;  // absolute, or ratios to n when p_is_ratio
    bool p_is_ratio = false;
    std::vector<std::size_t> s;
    std::vector<double> o;  // absolute, or fractions of n when o_is_fraction
    bool o_is_fraction = false;
    std::vector<NoiseSpec> noise{NoiseSpec::gaussian()};
    std::vector<double> sigma{1.0};
    AdversaryStrategy adversary = AdversaryStrategy::random_large;
    std::vector<double> magnitude{1.0};
    std::vector<Variant> variants{Variant::pivotal_sorted};
    CovarianceSpec covariance;
    RowFamily rows = RowFamily::gaussian;
    BetaPattern pattern = BetaPattern::flat;
    double beta_magnitude = 1.0;

    RunSettings settings;

    /// Cartesian product of the grid in a fixed order; throws ConfigError
    /// naming the first invalid cell.
    std::vector<Cell> cells() const;
};

struct ReplicationRecord {
    Cell cell;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    double sigma_norm_error_sq = 0.0;
    double pred_error_sq = 0.0;
    double theta_error_sq = 0.0;
    double sigma_hat = 0.0;
    std::string status;
    double wall_ms = 0.0;
};

struct MetricSummary {
    double median = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
};

struct CellSummary {
    Cell cell;
    std::size_t count = 0;
    std::size_t failures = 0;
    MetricSummary sigma_norm_error_sq;
    MetricSummary pred_error_sq;
    MetricSummary theta_error_sq;
    MetricSummary sigma_hat;
};

struct SlopeRow {
    std::string axis;   // "n" or "o"
    std::string group;  // cell key with the axis removed
    SlopeFit fit;
};

struct RateTable {
    std::vector<CellSummary> cells;
    std::vector<SlopeRow> slopes;
};

struct GridResult {
    std::vector<ReplicationRecord> records;
    RateTable table;
    double failure_fraction = 0.0;
};

/// Instance seed of replication `r`: depends on (master, n, p, s, r) only, so
/// cells that differ in contamination, noise law or estimator share designs.
std::uint64_t replication_seed(std::uint64_t master, const Cell& cell, std::size_t r);

/// Generates the instance, fits the cell's estimator and scores it against
/// the truth with the true Sigma. Solver trouble ends up in `status`.
ReplicationRecord run_replication(const Cell& cell, std::uint64_t seed, const RunSettings& settings = {},
                                  std::size_t replication = 0);

/// Penalty sequences the cell's estimator uses.
PenaltyConfig penalty_for(const Cell& cell, const RunSettings& settings);

GridResult run_grid(const ExperimentConfig& cfg);

/// Quantiles per cell (records with non-finite metrics are skipped) and
/// log-log slopes of the median sigma-norm error along n and along o.
RateTable aggregate(const std::vector<ReplicationRecord>& records);

/// Empirical (1 - delta)-quantile of sigma_norm_error_sq.
double summarize_deviation(const std::vector<ReplicationRecord>& records, double delta);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_yaml(const ExperimentConfig& cfg);

std::string records_csv(const std::vector<ReplicationRecord>& records);
std::string table_json(const RateTable& table);
std::string slopes_csv(const RateTable& table);

/// Writes records.csv, table.json and slopes.csv under `dir` (created if
/// missing). `format` "json" also writes records.json.
void emit(const GridResult& result, const std::string& dir, const std::string& format = "csv");

} // namespace rslope
