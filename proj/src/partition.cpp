#include "grlol/partition.hpp"

#include <algorithm>
#include <string>

#include "grlol/errors.hpp"

namespace grlol {

Partition Partition::from_groups(std::vector<IndexSet> groups, Index k)
{
    if (k < 1) throw Error(Errc::invalid_input, "partition needs k >= 1");
    if (groups.empty()) throw Error(Errc::bad_group_count, "partition has no groups");

    Partition part;
    part.group_of_.assign(static_cast<std::size_t>(k), -1);
    part.rank_of_.assign(static_cast<std::size_t>(k), -1);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (groups[j].empty())
            throw Error(Errc::invalid_input, "group " + std::to_string(j) + " is empty");
        for (std::size_t t = 0; t < groups[j].size(); ++t) {
            const Index l = groups[j][t];
            if (l < 0 || l >= k)
                throw Error(Errc::invalid_input, "predictor index " + std::to_string(l) + " out of range");
            auto& slot = part.group_of_[static_cast<std::size_t>(l)];
            if (slot != -1)
                throw Error(Errc::invalid_input, "predictor " + std::to_string(l) + " appears in two groups");
            slot = static_cast<Index>(j);
            part.rank_of_[static_cast<std::size_t>(l)] = static_cast<Index>(t);
        }
        part.t_star_ = std::max(part.t_star_, static_cast<Index>(groups[j].size()));
    }
    for (Index l = 0; l < k; ++l) {
        if (part.group_of_[static_cast<std::size_t>(l)] == -1)
            throw Error(Errc::invalid_input, "predictor " + std::to_string(l) + " is not in any group");
    }
    part.groups_ = std::move(groups);
    return part;
}

Partition Partition::singletons(Index k)
{
    std::vector<IndexSet> groups(static_cast<std::size_t>(k));
    for (Index l = 0; l < k; ++l) groups[static_cast<std::size_t>(l)] = {l};
    return from_groups(std::move(groups), k);
}

IndexSet Partition::members(const std::vector<Index>& which_groups) const
{
    IndexSet out;
    for (Index j : which_groups) {
        const auto& g = group(j);
        out.insert(out.end(), g.begin(), g.end());
    }
    return out;
}

} // namespace grlol
