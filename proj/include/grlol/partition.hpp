#pragma once

#include <vector>

#include "grlol/types.hpp"

namespace grlol {

/// Non-overlapping assignment of k predictors to p groups.
///
/// Predictor l sits in group group_of(l) at rank rank_of(l); both are
/// 0-based here (the text file format is 1-based). Ranks inside a group are
/// the positions 0..t_j-1 of the group's member list.
class Partition
{
public:
    /// Groups must be non-empty, disjoint, and cover 0..k-1.
    static Partition from_groups(std::vector<IndexSet> groups, Index k);
    static Partition singletons(Index k);

    Index k() const noexcept { return static_cast<Index>(group_of_.size()); }
    Index p() const noexcept { return static_cast<Index>(groups_.size()); }

    const std::vector<Index>& group_of() const noexcept { return group_of_; }
    const std::vector<Index>& rank_of() const noexcept { return rank_of_; }
    const std::vector<IndexSet>& groups() const noexcept { return groups_; }
    const IndexSet& group(Index j) const { return groups_[static_cast<std::size_t>(j)]; }
    Index size_of(Index j) const { return static_cast<Index>(group(j).size()); }

    /// Largest group size t*.
    Index t_star() const noexcept { return t_star_; }
    /// k / p.
    double mean_group_size() const noexcept { return static_cast<double>(k()) / static_cast<double>(p()); }

    /// Union of the member lists of the given groups, in the given order.
    IndexSet members(const std::vector<Index>& which_groups) const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    Partition() = default;

    std::vector<Index> group_of_;
    std::vector<Index> rank_of_;
    std::vector<IndexSet> groups_;
    Index t_star_ = 0;
};

} // namespace grlol
