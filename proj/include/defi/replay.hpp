#pragma once

#include "defi/core.hpp"

namespace defi {

struct MissingBlock : Error { using Error::Error; };

struct BlockSeries {
    std::vector<WorldState> blocks;  // strictly increasing heights

    void push(WorldState state);
    const WorldState& at_height(long long h) const;
    bool has_height(long long h) const;
};

struct CostModel {
    double gas_price_gwei = 32.0;
    long long gas_per_action = 150000;
    double flash_loan_fee = 0.0;  // base units per strategy

    // all-in execution cost in base units for an n-action strategy
    double cost(std::size_t n_actions) const;
};

enum class DiscoveryMode { Arb, Search };

struct ReplayEntry {
    long long block = 0;
    std::vector<std::string> path;
    double revenue = 0.0;   // gross, re-simulated
    double cost = 0.0;
    double net = 0.0;
    // wall-clock columns are emitted for inspection only; they are excluded
    // from the deterministic report payload
    double ms_prune = 0.0;
    double ms_search = 0.0;
    double ms_validate = 0.0;
};

struct ReplayReport {
    DiscoveryMode mode = DiscoveryMode::Arb;
    std::vector<ReplayEntry> committed;
    std::vector<std::pair<long long, double>> cumulative;  // per block, gross
    double total_gross = 0.0;
    double total_net = 0.0;
    long long discovery_invocations = 0;
    std::vector<std::string> errors;  // per-block, run continues
};

// True iff any storage key of any action in the path differs between the
// snapshots at heights h-1 and h. The series' first block always counts as
// changed.
bool state_changed(const std::vector<std::string>& path, const Catalog& catalog,
                   const BlockSeries& series, long long h);

// Iterates blocks, re-running discovery only when the watched state changed;
// every candidate is validated by fresh re-simulation before commit and the
// cost model is netted out.
ReplayReport replay(const BlockSeries& series, const Catalog& catalog, const AssetId& base,
                    DiscoveryMode mode, const CostModel& cost, double min_revenue = 0.1,
                    std::size_t max_path_len = 3);

}  // namespace defi
