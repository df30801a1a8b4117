#pragma once

#include <cstdint>
#include <map>

#include "defi/core.hpp"

namespace defi {

struct CombinatorialBudgetExceeded : Error { using Error::Error; };

struct HeuristicReport {
    std::vector<std::string> path;
    bool accepted = false;
    int rejected_by = 0;  // 1..7, 0 when accepted
    std::string reason;
};

struct PruneStats {
    // per length: candidate count before pruning (n!/(n-k)!, analytic) and
    // accepted count after
    std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> per_length;
    std::uint64_t expansions = 0;
};

struct EnumerateResult {
    std::vector<std::vector<std::string>> paths;  // accepted, as action ids
    PruneStats stats;
};

// True iff the storage-key sets of the two actions are disjoint.
bool actions_independent(const ActionSpec& a, const ActionSpec& b);

// Applies the pruning heuristics in fixed order 1..7 and reports the first
// failure:
//   1 path has at least two actions
//   2 entering actions (input == base) form a non-empty prefix
//   3 exiting actions (output == base) form a non-empty suffix
//   4 every non-entering action shares a storage key with some earlier
//     action, the trader's base-asset key not counting as a dependency
//   5 no action immediately reversed on the same venue
//   6 no branching: in the path's asset-flow multigraph every asset has
//     out-degree and in-degree at most 1 (non-returning actions exempt)
//   7 no cycle that avoids the base asset
HeuristicReport check_heuristics(const std::vector<std::string>& path,
                                 const AssetId& base, const Catalog& catalog);

// Depth-first enumeration with prefix pruning; a prefix that can no longer
// lead to an accepted path is never extended. Throws when the number of
// node expansions exceeds the budget.
EnumerateResult enumerate_pruned(const Catalog& catalog, const AssetId& base,
                                 std::size_t max_len,
                                 std::uint64_t budget = 100000000ULL);

}  // namespace defi
