#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "grlol/design.hpp"
#include "grlol/estimator.hpp"
#include "grlol/grouping.hpp"
#include "grlol/partition.hpp"

namespace grlol::sim {

/// Where the S nonzero coefficients go.
enum class SupportPlacement { random, first };

/// A strategy column of the experiment: a named grouping rule, or a fixed
/// partition read from disk.
struct StrategySpec
{
    std::string label;
    std::optional<Strategy> named;
    std::optional<Partition> given;

    static StrategySpec of(Strategy s);
};

struct SimConfig
{
    Index n = 200;
    Index k = 1000;
    std::vector<Index> sparsity{10};
    std::vector<double> pi{0.0};
    std::vector<double> rho{0.0};
    double snr = 5.0;
    int replications = 100;
    Seed master_seed = 0;
    SupportPlacement support = SupportPlacement::random;
    std::vector<StrategySpec> strategies; // empty means all seven named strategies
    std::string reference = "BGa";        // denominator of the ratio table
    ThresholdConfig threshold;
    double train_fraction = 0.75;
};

/// Throws Errc::invalid_config on S > k, floor(pi k) < 2 with rho > 0,
/// values outside [0, 1), snr <= 0, K < 1 and similar.
void validate(const SimConfig& cfg);
/// The configured strategies, or all seven named ones.
std::vector<StrategySpec> effective_strategies(const SimConfig& cfg);

/// Standard Gaussian n×k design whose random subset of floor(pi k)
/// columns is replaced by rows drawn with equicorrelation rho, then every
/// column centered and scaled to unit norm.
DesignMatrix gen_design(Index n, Index k, double pi, double rho, std::mt19937_64& rng);

/// S coefficients (-1)^b |z|, b Rademacher, z ~ N(5, 1); zero elsewhere.
Vector gen_beta(Index k, Index S, SupportPlacement placement, std::mt19937_64& rng);

struct Response
{
    ResponseVector y;
    double sigma = 0.0;
};
/// sigma² = Var(Xβ) / snr (sample variance); sigma = 1 when β = 0; snr = inf
/// gives sigma = 0. Throws Errc::zero_signal when β != 0 but Var(Xβ) = 0.
Response gen_response(const DesignMatrix& x, const Vector& beta, double snr, std::mt19937_64& rng);

/// Row indices of the training split (ascending) and of the test split.
struct Split
{
    IndexSet train;
    IndexSet test;
};
Split train_test_split(Index n, double train_fraction, std::mt19937_64& rng);

/// One cell of the experiment grid.
struct Cell
{
    Index S = 0;
    double pi = 0.0;
    double rho = 0.0;
};
std::vector<Cell> cells_of(const SimConfig& cfg);

/// Per-strategy test-split relative errors of one replication; NaN marks a
/// strategy that failed. `messages` holds the failure text per strategy.
struct ReplicationRecord
{
    std::vector<double> errors;
    std::vector<std::string> messages;
    double sigma = 0.0;
    Index p_star = 0;
};

ReplicationRecord run_replication(const SimConfig& cfg, const Cell& cell, std::size_t cell_index, int rep);

struct ExperimentResult
{
    std::vector<std::string> strategies;
    std::vector<Cell> cells;
    // raw[cell][strategy][rep]; NaN = missing.
    std::vector<std::vector<std::vector<double>>> raw;
};

/// Replications run in parallel over kernels::worker_count() threads; each
/// result lands in its own slot so the output does not depend on the
/// schedule.
ExperimentResult run_experiment(const SimConfig& cfg);

struct SummaryRow
{
    std::string strategy;
    Index S = 0;
    double pi = 0.0;
    double rho = 0.0;
    double median = 0.0;
    double std_dev = 0.0; // sample standard deviation, 0 when fewer than 2 values
    int valid = 0;        // replications that produced a value
};

double median_of(std::vector<double> values);
double sample_std(const std::vector<double>& values);

std::vector<SummaryRow> summarize(const ExperimentResult& res);

/// Header `strategy,S,pi,rho,median_EY,std_EY,K`.
std::string format_results(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_results(const std::string& text);
/// Header `strategy,S,pi,rho,rep,EY`; missing values print as NA.
std::string format_raw(const ExperimentResult& res);

struct RatioRow
{
    std::string strategy;
    std::string reference;
    Index S = 0;
    double pi = 0.0;
    double rho = 0.0;
    double ratio = 0.0; // median(strategy) / median(reference)
};

/// Cellwise ratio of medians between rows with the same strategy and cell.
std::vector<RatioRow> error_ratio(const std::vector<SummaryRow>& numer, const std::vector<SummaryRow>& denom);
/// Every row divided by the `reference` row of its cell. Cells without a
/// reference row are skipped.
std::vector<RatioRow> ratio_to_reference(const std::vector<SummaryRow>& rows, const std::string& reference);
/// Header `strategy,reference,S,pi,rho,ratio`.
std::string format_ratios(const std::vector<RatioRow>& rows);

/// INI file:
///
///     [experiment]
///     n = 200
///     k = 1000
///     sparsity = 10,30,50
///     pi = 0.4
///     rho = 0.8
///     snr = 5
///     replications = 20
///     seed = 1
///     support = random        ; or first
///     strategies = GGa,BGa,LOL ; or given:<partition file>
///     reference = BGa
///     train_fraction = 0.75
///
///     [threshold]
///     mode = empirical        ; or theoretical
///     nu = 0.5
///     cv_folds = 5
///     lambda1 = ...           ; theoretical mode
///     lambda2 = ...
///
/// Unknown keys are rejected.
SimConfig load_config(const std::string& path);
/// Canonical key=value echo of a configuration (used in manifests).
std::vector<std::pair<std::string, std::string>> describe(const SimConfig& cfg);

/// Grouped versus ungrouped estimation on an orthonormal design: the first
/// floor((gamma t*)^-q) groups of size t* carry the coefficient gamma =
/// sqrt(log k / n), everything else is zero. Both fits use explicit
/// thresholds lambda1 = lambda2 = factor * lambda*, with lambda* computed for
/// each method's own t* and p.
struct SeparationConfig
{
    Index n = 4096;
    Index k = 256;
    Index group_size = 16;
    double q = 0.5;
    double sigma = 1.0;
    double nu = 0.5;
    double lambda_factor = 1.5;
    int replications = 20;
    Seed seed = 0;
};

struct SeparationResult
{
    double amplitude = 0.0;
    Index active_groups = 0;
    double grlol_mse = 0.0; // mean ||beta_hat - beta||^2
    double lol_mse = 0.0;
    double ratio = 0.0;     // lol_mse / grlol_mse
};

SeparationResult separation_experiment(const SeparationConfig& cfg);

} // namespace grlol::sim
