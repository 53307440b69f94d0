#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grlol/design.hpp"
#include "grlol/partition.hpp"

namespace grlol {

/// How predictors are ordered before being sliced into groups.
enum class FillMode {
    absolute, // |R| descending
    signed_,  // R descending
    random,   // seeded shuffle
};

/// Named grouping strategies. LOL is the singleton partition.
enum class Strategy { GGr, GGc, GGa, BGr, BGc, BGa, LOL };

std::string_view strategy_name(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;
FillMode fill_mode_of(Strategy s) noexcept;
bool is_boosting(Strategy s) noexcept;

/// R_l = <y, normalized column l>.
Vector correlations_with_target(const NormalizedDesign& nd, const ResponseVector& y);

/// Sorts the predictors per `mode` (ties by ascending index) and cuts the
/// order into p contiguous slices; the first k mod p slices get one extra
/// member. Rank inside a group is the position in its slice.
Partition gathered_grouping(const Vector& r, Index p, FillMode mode, Seed seed);

/// Which pairs make a predictor "correlated" in the count p(u).
enum class PairCount {
    symmetric,      // some l' != l with |Gamma_{ll'}| > gamma/u
    upper_triangle, // some l' > l only
};

/// Step-function description of the correlated-predictor count
///
///     p(u) = #{ l : max_{l'} |Gamma_{ll'}| > gamma / u },   u >= 1,
///
/// and the group count derived from it. Predictor l enters the count for
/// every u strictly above its breakpoint gamma / m_l, where m_l is its
/// largest off-diagonal |Gamma|, so p(u) = #{ breakpoints < u }.
///
/// u1 is the infimum of {u >= 1 : p(u) >= k/u} and u2 the infimum of
/// {u >= 1 : p(u) log p(u) >= k} (the product is 0 when p(u) <= 1; u2 is
/// +inf when the product never reaches k). Both live on the group-size axis:
/// the plan uses u_star = max(u1, u2) as the target group size, so
/// p_star = floor(k / u_star) groups and the delegate threshold is
/// gamma / u_star.
struct BrgPlan
{
    Index k = 0;
    double gamma = 0.0;
    PairCount pair_count = PairCount::symmetric;
    std::vector<double> breakpoints; // sorted ascending, one per counted predictor
    Vector row_max;                  // max_{l' != l} |Gamma_{ll'}|
    double u1 = 0.0;
    double u2 = std::numeric_limits<double>::infinity();
    double u_star = 0.0;
    Index p_star = 1;
    double threshold = 0.0;          // gamma / u_star
    IndexSet delegates;              // exactly p_star entries

    /// p(u).
    Index count_at(double u) const;
    /// g(u) = k / u.
    double g(double u) const { return static_cast<double>(k) / u; }
};

/// Throws Errc::orthogonal_design when gamma == 0.
BrgPlan brg_plan(const NormalizedDesign& nd, PairCount pairs = PairCount::symmetric);

/// Builds the boosting partition from an existing plan: delegate j heads
/// group j at rank 0 (delegates ordered by R, |R|, or index), the remaining
/// predictors are ordered by R, |R|, or a seeded shuffle and dealt in
/// contiguous balanced slices, slice j going to group j.
Partition brg_partition(const BrgPlan& plan, const Vector& r, FillMode mode, Seed seed);

struct BrgGrouping
{
    Partition partition;
    BrgPlan plan;
};

BrgGrouping brg_grouping(const NormalizedDesign& nd, const Vector& r, FillMode mode, Seed seed,
                         PairCount pairs = PairCount::symmetric);

struct PlanSample
{
    double u, g, p, p_log_p;
};

/// Samples (u, g(u), p(u), p(u) log p(u)) on `points` evenly spaced u in
/// [1, u_max] for plotting.
std::vector<PlanSample> sample_plan(const BrgPlan& plan, double u_max, int points);

} // namespace grlol
