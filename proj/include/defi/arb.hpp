#pragma once

#include <optional>

#include "defi/core.hpp"

namespace defi {

struct NoRoute : Error { using Error::Error; };
struct NoProfit : Error { using Error::Error; };

struct GraphEdge {
    AssetId from;
    AssetId to;
    std::string best_venue;
    double weight = 0.0;  // -log(best spot price)
};

struct MarketGraph {
    std::vector<AssetId> nodes;   // sorted, fixed relaxation order
    std::vector<GraphEdge> edges; // sorted by (from, to)
    long long built_at = 0;
};

struct NegCycle {
    std::vector<AssetId> assets;      // first == last
    std::vector<std::string> venues;  // one per hop
    double weight_sum = 0.0;
};

struct ParamSearch {
    double revenue = 0.0;
    std::vector<double> params;
};

struct ArbResult {
    std::vector<Strategy> strategies;
    double total_revenue = 0.0;
    int cycles_found = 0;
    bool cap_hit = false;
    WorldState final_state;
};

// One edge per directed asset pair: the venue with the maximum spot price.
// Venues with a zero reserve and pairs without a catalog action are skipped.
MarketGraph build_graph(const WorldState& state, const Catalog& catalog);

// Bellman-Ford-Moore; a relaxation in round |N| walks parent links to the
// root to extract the cycle. Deterministic under the graph's fixed ordering.
std::optional<NegCycle> find_negative_cycle(const MarketGraph& g);

// Rotates the cycle to start at base, or routes base->entry ... exit->base
// through the entry asset maximizing the round-trip spot product. Returns
// the executable action-id path.
std::vector<std::string> connect_to_base(const NegCycle& cycle, const MarketGraph& g,
                                         const AssetId& base, const Catalog& catalog);

// Maximizes revenue over the scalar entry amount with full-amount chaining:
// geometric doubling ramp from x_min, then golden-section refinement.
ParamSearch greedy_param_search(const WorldState& state, const Catalog& catalog,
                                const AssetId& base, const std::vector<std::string>& path,
                                double x_min = 1e-6);

// Greedy loop: build graph, extract cycle, connect, search, commit while the
// revenue clears min_revenue; full graph rebuild after every commit.
ArbResult run_arb(const WorldState& state, const Catalog& catalog, const AssetId& base,
                  double min_revenue = 0.1, int max_cycles = 50);

}  // namespace defi
