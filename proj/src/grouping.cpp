#include "grlol/grouping.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "grlol/errors.hpp"
#include "grlol/kernels.hpp"

namespace grlol {

namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 7> kStrategyNames{{
    {Strategy::GGr, "GGr"},
    {Strategy::GGc, "GGc"},
    {Strategy::GGa, "GGa"},
    {Strategy::BGr, "BGr"},
    {Strategy::BGc, "BGc"},
    {Strategy::BGa, "BGa"},
    {Strategy::LOL, "LOL"},
}};

// Stable descending order of `key`, ties by ascending index.
IndexSet order_descending(const IndexSet& items, const Vector& key)
{
    IndexSet out = items;
    std::stable_sort(out.begin(), out.end(), [&](Index a, Index b) { return key(a) > key(b); });
    return out;
}

IndexSet ordered_by_mode(IndexSet items, const Vector& r, FillMode mode, std::mt19937_64& rng)
{
    std::sort(items.begin(), items.end());
    switch (mode) {
    case FillMode::absolute: return order_descending(items, r.cwiseAbs());
    case FillMode::signed_: return order_descending(items, r);
    case FillMode::random: std::shuffle(items.begin(), items.end(), rng); return items;
    }
    return items;
}

// Sizes of p balanced slices of `total` items; the first total % p get one more.
std::vector<Index> balanced_sizes(Index total, Index p)
{
    std::vector<Index> sizes(static_cast<std::size_t>(p), total / p);
    for (Index j = 0; j < total % p; ++j) ++sizes[static_cast<std::size_t>(j)];
    return sizes;
}

} // namespace

std::string_view strategy_name(Strategy s) noexcept
{
    for (const auto& [value, name] : kStrategyNames)
        if (value == s) return name;
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept
{
    for (const auto& [value, n] : kStrategyNames)
        if (n == name) return value;
    return std::nullopt;
}

FillMode fill_mode_of(Strategy s) noexcept
{
    switch (s) {
    case Strategy::GGa:
    case Strategy::BGa: return FillMode::absolute;
    case Strategy::GGc:
    case Strategy::BGc: return FillMode::signed_;
    default: return FillMode::random;
    }
}

bool is_boosting(Strategy s) noexcept
{
    return s == Strategy::BGr || s == Strategy::BGc || s == Strategy::BGa;
}

Vector correlations_with_target(const NormalizedDesign& nd, const ResponseVector& y)
{
    if (y.size() != nd.n())
        throw Error(Errc::length_mismatch, "response has " + std::to_string(y.size()) +
                                               " observations, design has " + std::to_string(nd.n()));
    return kernels::xty(nd.normalized, y.values());
}

Partition gathered_grouping(const Vector& r, Index p, FillMode mode, Seed seed)
{
    const Index k = r.size();
    if (p < 1 || p > k)
        throw Error(Errc::bad_group_count, "group count " + std::to_string(p) + " outside [1, " +
                                               std::to_string(k) + "]");
    std::mt19937_64 rng(seed);
    IndexSet all(static_cast<std::size_t>(k));
    std::iota(all.begin(), all.end(), Index{0});
    const IndexSet order = ordered_by_mode(std::move(all), r, mode, rng);

    std::vector<IndexSet> groups;
    groups.reserve(static_cast<std::size_t>(p));
    auto it = order.begin();
    for (Index size : balanced_sizes(k, p)) {
        groups.emplace_back(it, it + size);
        it += size;
    }
    return Partition::from_groups(std::move(groups), k);
}

Index BrgPlan::count_at(double u) const
{
    return static_cast<Index>(std::lower_bound(breakpoints.begin(), breakpoints.end(), u) - breakpoints.begin());
}

BrgPlan brg_plan(const NormalizedDesign& nd, PairCount pairs)
{
    const Index k = nd.k();
    if (k < 2) throw Error(Errc::invalid_input, "BRG needs at least two predictors");

    BrgPlan plan;
    plan.k = k;
    plan.pair_count = pairs;
    plan.row_max = kernels::offdiag_row_absmax(nd.gram);
    plan.gamma = plan.row_max.maxCoeff();
    if (!(plan.gamma > 0.0))
        throw Error(Errc::orthogonal_design,
                    "all predictors are orthogonal (gamma = 0); BRG is undefined, use a gathered grouping instead");

    const Vector counted = pairs == PairCount::symmetric ? plan.row_max : kernels::upper_row_absmax(nd.gram);
    for (Index l = 0; l < k; ++l)
        if (counted(l) > 0.0) plan.breakpoints.push_back(plan.gamma / counted(l));
    std::sort(plan.breakpoints.begin(), plan.breakpoints.end());

    const auto& b = plan.breakpoints;
    const double kd = static_cast<double>(k);
    bool found_u1 = false;
    bool found_u2 = false;
    for (std::size_t i = 0; i < b.size();) {
        std::size_t j = i;
        while (j < b.size() && b[j] == b[i]) ++j;
        // p(u) == j on (b[i], next]
        const double v = b[i];
        const double next = j < b.size() ? b[j] : std::numeric_limits<double>::infinity();
        const double c = static_cast<double>(j);
        if (!found_u1) {
            const double candidate = std::max(v, kd / c);
            if (candidate <= next) {
                plan.u1 = candidate;
                found_u1 = true;
            }
        }
        if (!found_u2 && j > 1 && c * std::log(c) >= kd) {
            plan.u2 = v;
            found_u2 = true;
        }
        if (found_u1 && found_u2) break;
        i = j;
    }

    plan.u_star = std::max(plan.u1, found_u2 ? plan.u2 : plan.u1);
    const double groups = std::floor(kd / plan.u_star * (1.0 + 1e-12));
    plan.p_star = std::clamp<Index>(static_cast<Index>(groups), 1, k);
    plan.threshold = plan.gamma / plan.u_star;

    // Delegates: predictors whose largest correlation exceeds the threshold,
    // trimmed or topped up to exactly p_star by that same correlation.
    IndexSet all(static_cast<std::size_t>(k));
    std::iota(all.begin(), all.end(), Index{0});
    IndexSet by_corr = order_descending(all, plan.row_max);
    plan.delegates.assign(by_corr.begin(), by_corr.begin() + plan.p_star);
    std::sort(plan.delegates.begin(), plan.delegates.end());
    return plan;
}

Partition brg_partition(const BrgPlan& plan, const Vector& r, FillMode mode, Seed seed)
{
    const Index k = plan.k;
    if (r.size() != k)
        throw Error(Errc::length_mismatch, "correlation vector length does not match the plan");
    const Index p = plan.p_star;
    std::mt19937_64 rng(seed);

    IndexSet delegates = plan.delegates;
    if (mode != FillMode::random) {
        std::mt19937_64 unused(0);
        delegates = ordered_by_mode(std::move(delegates), r, mode, unused);
    }

    std::vector<char> is_delegate(static_cast<std::size_t>(k), 0);
    for (Index d : plan.delegates) is_delegate[static_cast<std::size_t>(d)] = 1;
    IndexSet rest;
    rest.reserve(static_cast<std::size_t>(k - p));
    for (Index l = 0; l < k; ++l)
        if (!is_delegate[static_cast<std::size_t>(l)]) rest.push_back(l);
    rest = ordered_by_mode(std::move(rest), r, mode, rng);

    std::vector<IndexSet> groups(static_cast<std::size_t>(p));
    auto it = rest.begin();
    const auto sizes = balanced_sizes(k, p);
    for (Index j = 0; j < p; ++j) {
        auto& g = groups[static_cast<std::size_t>(j)];
        g.push_back(delegates[static_cast<std::size_t>(j)]);
        const Index fill = sizes[static_cast<std::size_t>(j)] - 1;
        g.insert(g.end(), it, it + fill);
        it += fill;
    }
    return Partition::from_groups(std::move(groups), k);
}

BrgGrouping brg_grouping(const NormalizedDesign& nd, const Vector& r, FillMode mode, Seed seed, PairCount pairs)
{
    BrgPlan plan = brg_plan(nd, pairs);
    Partition part = brg_partition(plan, r, mode, seed);
    return {std::move(part), std::move(plan)};
}

std::vector<PlanSample> sample_plan(const BrgPlan& plan, double u_max, int points)
{
    std::vector<PlanSample> out;
    if (points < 2 || !(u_max > 1.0)) return out;
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double u = 1.0 + (u_max - 1.0) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double p = static_cast<double>(plan.count_at(u));
        out.push_back({u, plan.g(u), p, p > 1.0 ? p * std::log(p) : 0.0});
    }
    return out;
}

} // namespace grlol
