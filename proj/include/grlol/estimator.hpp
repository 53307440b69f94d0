#pragma once

#include <optional>
#include <span>
#include <vector>

#include "grlol/coherence.hpp"
#include "grlol/design.hpp"
#include "grlol/partition.hpp"

namespace grlol {

/// Constants of the theoretical threshold rule.
struct TheoryParams
{
    double sigma = 1.0; // noise standard deviation
    double M = 1.0;     // structured-sparsity radius (alpha scale)
    double q = 1.0;     // between-group exponent, in (0, 1]
    double c1 = 0.0;
    double c2 = 0.0;
};

struct ExplicitLambdas
{
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

enum class ThresholdMode { theoretical, empirical };

struct ThresholdConfig
{
    ThresholdMode mode = ThresholdMode::empirical;
    double nu = 0.5;

    // theoretical mode: exactly one of these.
    std::optional<ExplicitLambdas> lambdas;
    std::optional<TheoryParams> theory;

    // empirical mode. Each fold holds out n/cv_folds observations, so the
    // training fraction is 1 - 1/cv_folds; when cv_train_fraction is given
    // it must agree.
    int cv_folds = 5;
    std::optional<double> cv_train_fraction;
    Seed seed = 0;
};

struct LambdaSet
{
    double lambda_star = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double kappa = 0.0;
};

/// max((1-nu)^-1, 4(1-nu)^-2, 2(2nu^2-nu+3)(1-nu)^-3).
double kappa_theorem(double nu);

/// Throws Errc::invalid_constants unless c2 >= 5 sqrt(kappa),
/// c1 >= 4 + nu^(-1/q) and c1 > c2 (and sigma, M > 0, q in (0, 1]).
void validate_theory_params(const TheoryParams& tp, double nu);

/// sigma * sqrt(max(M^2 v_n r*, max(t*, log p) (1 + nu))).
double lambda_star(double sigma, double M, const CoherenceReport& report, double v_n, Index p);

/// lambda* = sigma * sqrt(max(M^2 v_n r*, max(t*, log p) (1 + nu))),
/// lambda2 = c2 lambda*, lambda1 = max(c1 lambda*, 2 M sqrt(v_n) tau* / nu).
/// nu, r*, t*, tau* come from the report.
LambdaSet theoretical_lambdas(const TheoryParams& tp, const CoherenceReport& report, double v_n, Index p);

/// Per-group energy rho_j^2 = sum_{l in G_j} R_l^2.
Vector rho_stats(const Vector& r, const Partition& part);

/// Groups ordered by rho^2 descending, ties by ascending group index.
std::vector<Index> rank_groups(const Vector& rho_sq);

/// Leader groups {j : rho_j^2 >= max(rho_(n_star)^2, lambda1^2)}, in rank
/// order. Empty when lambda1^2 exceeds every rho^2.
std::vector<Index> select_leaders_theoretical(const Vector& rho_sq, Index n_star, double lambda1);

struct EmpiricalLeaders
{
    Index p0 = 0;
    std::vector<Index> leaders; // rank order
};

/// Longest rank-order prefix of groups whose total size stays below n.
/// Throws Errc::no_feasible_leader when the top group alone has >= n members.
EmpiricalLeaders select_leaders_empirical(const Vector& rho_sq, const Partition& part, Index n);

struct OlsOnLeaders
{
    Vector beta;                     // length k, zero off the used groups
    std::vector<Index> used_groups;  // rank order
    std::vector<Index> dropped_groups;
};

/// Least squares of y on the raw columns of the leader groups (given in rank
/// order). While the leader columns are numerically rank deficient (pivot
/// ratio below 1e-12) the lowest-ranked group is dropped. Empty leaders give
/// the zero vector; more than n - 1 leader columns throw
/// Errc::no_feasible_leader.
OlsOnLeaders ols_on_leaders(const DesignMatrix& x, const ResponseVector& y, const Partition& part,
                            std::span<const Index> leaders);

/// beta*_l = beta_l * 1{ ||beta||_{G_j,2} >= lambda2 / sqrt(n_l) } for l in G_j.
Vector block_threshold(const Vector& beta_prelim, const Partition& part, double lambda2,
                       const Vector& col_norm_sq);

struct CvThreshold
{
    Index p1 = 0;
    Vector beta_final;
    std::vector<Index> ranked_groups; // leaders by ||beta_prelim||_{G_j,2} descending
    std::vector<double> mean_error;   // per prefix size j = 1..p0 (+inf if every fold skipped)
    std::vector<int> skipped_folds;   // per prefix, folds whose training split was rank deficient
};

/// Fold labels 0..folds-1: observations shuffled once with `seed`, then cut
/// into `folds` contiguous blocks.
std::vector<int> make_folds(Index n, int folds, Seed seed);

/// Chooses how many of the leaders (ranked by their preliminary group norm)
/// to keep by cross-validated prediction error of OLS refits on the nested
/// unions U_j. p1 is the smallest j whose error is within
/// 1e-10 ||y||^2 / folds of the minimum. beta_final keeps beta_prelim on the
/// first p1 ranked groups.
CvThreshold block_threshold_cv(const DesignMatrix& x, const ResponseVector& y, const Vector& beta_prelim,
                               const Partition& part, std::span<const Index> leaders, std::span<const int> fold_of,
                               int folds);
CvThreshold block_threshold_cv(const DesignMatrix& x, const ResponseVector& y, const Vector& beta_prelim,
                               const Partition& part, std::span<const Index> leaders, int folds, Seed seed);

struct GrLolFit
{
    Partition partition;
    CoherenceReport diagnostics;
    Vector R;
    Vector rho_sq;
    std::vector<Index> leaders;       // ascending group index
    std::vector<Index> leader_order;  // rank order
    std::vector<Index> dropped_groups;
    Vector beta_prelim;
    Vector beta_final;
    Index p0 = 0;
    Index p1 = 0;
    std::vector<Index> retained_groups; // ascending group index

    // Cut-offs actually applied. In empirical mode these are the rho^2 of
    // the last leader and the group norm of the last retained group.
    double rho_sq_cutoff = 0.0;
    double group_norm_cutoff = 0.0;
    std::optional<LambdaSet> lambdas;
    std::vector<double> cv_error;
    std::vector<int> cv_skipped;
};

GrLolFit fit_grlol(const NormalizedDesign& nd, const ResponseVector& y, const Partition& part,
                   const ThresholdConfig& cfg);
GrLolFit fit_grlol(const DesignMatrix& x, const ResponseVector& y, const Partition& part,
                   const ThresholdConfig& cfg);

/// GR-LOL with every predictor in its own group.
GrLolFit fit_lol(const NormalizedDesign& nd, const ResponseVector& y, const ThresholdConfig& cfg);
GrLolFit fit_lol(const DesignMatrix& x, const ResponseVector& y, const ThresholdConfig& cfg);

/// Residual variance estimate from OLS on the top group by rho^2; a rough
/// plug-in for sigma when it is unknown.
double plugin_sigma(const DesignMatrix& x, const ResponseVector& y, const Partition& part, const Vector& rho_sq);

} // namespace grlol
