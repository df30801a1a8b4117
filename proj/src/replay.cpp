#include "defi/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "defi/arb.hpp"
#include "defi/optimize.hpp"
#include "defi/paths.hpp"

namespace defi {

void BlockSeries::push(WorldState state) {
    if (!blocks.empty() && state.block_height <= blocks.back().block_height)
        throw InvalidSpec("block heights must be strictly increasing");
    blocks.push_back(std::move(state));
}

const WorldState& BlockSeries::at_height(long long h) const {
    for (const WorldState& b : blocks)
        if (b.block_height == h) return b;
    throw MissingBlock("no snapshot at height " + std::to_string(h));
}

bool BlockSeries::has_height(long long h) const {
    for (const WorldState& b : blocks)
        if (b.block_height == h) return true;
    return false;
}

double CostModel::cost(std::size_t n_actions) const {
    return gas_price_gwei * 1e-9 * static_cast<double>(gas_per_action) *
               static_cast<double>(n_actions) +
           flash_loan_fee;
}

namespace {

double key_value(const WorldState& state, const StorageKey& key) {
    if (key.venue == "trader") {
        auto it = state.trader_balances.find(key.field);
        return it == state.trader_balances.end() ? 0.0 : it->second;
    }
    auto it = state.venues.find(key.venue);
    if (it == state.venues.end()) return 0.0;
    auto jt = it->second.reserves.find(key.field);
    return jt == it->second.reserves.end() ? 0.0 : jt->second;
}

bool key_differs(const WorldState& a, const WorldState& b, const StorageKey& key) {
    if (key.field == "*") {
        // wildcard: any field of the venue
        auto it = a.venues.find(key.venue);
        if (it == a.venues.end()) return false;
        for (const auto& [asset, r] : it->second.reserves)
            if (key_differs(a, b, {key.venue, asset})) return true;
        return false;
    }
    double x = key_value(a, key), y = key_value(b, key);
    double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
    return std::fabs(x - y) > 1e-15 * scale;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

namespace {

bool path_changed(const std::vector<std::string>& path, const Catalog& catalog,
                  const WorldState& prev, const WorldState& cur) {
    for (const std::string& id : path) {
        const ActionSpec& a = catalog.by_id(id);
        for (const StorageKey& key : a.storage_keys)
            if (key_differs(prev, cur, key)) return true;
    }
    return false;
}

}  // namespace

bool state_changed(const std::vector<std::string>& path, const Catalog& catalog,
                   const BlockSeries& series, long long h) {
    return path_changed(path, catalog, series.at_height(h - 1), series.at_height(h));
}

ReplayReport replay(const BlockSeries& series, const Catalog& catalog, const AssetId& base,
                    DiscoveryMode mode, const CostModel& cost, double min_revenue,
                    std::size_t max_path_len) {
    if (series.blocks.empty()) throw InvalidSpec("empty block series");
    ReplayReport report;
    report.mode = mode;

    std::vector<std::vector<std::string>> candidate_paths;
    if (mode == DiscoveryMode::Search)
        candidate_paths = enumerate_pruned(catalog, base, max_path_len).paths;

    double cumulative = 0.0;
    for (std::size_t bi = 0; bi < series.blocks.size(); ++bi) {
        const WorldState& block = series.blocks[bi];
        const bool first = bi == 0;
        try {
            if (mode == DiscoveryMode::Arb) {
                // the graph watches every catalog key; rebuild when anything
                // a known action touches has moved
                bool changed = first;
                if (!changed)
                    for (const ActionSpec& a : catalog.actions) {
                        if (path_changed({a.action_id}, catalog, series.blocks[bi - 1],
                                         block)) {
                            changed = true;
                            break;
                        }
                    }
                if (changed) {
                    ++report.discovery_invocations;
                    double t0 = now_ms();
                    ArbResult arb = run_arb(block, catalog, base, min_revenue);
                    double t1 = now_ms();
                    WorldState s = block;
                    for (const Strategy& st : arb.strategies) {
                        double t2 = now_ms();
                        double revenue = strategy_revenue(s, catalog, base, st.path, st.params);
                        double t3 = now_ms();
                        s = simulate_path(s, catalog, st.path, st.params);
                        double c = cost.cost(st.path.size());
                        if (revenue - c <= 0.0) continue;  // below execution cost
                        ReplayEntry e;
                        e.block = block.block_height;
                        e.path = st.path;
                        e.revenue = revenue;
                        e.cost = c;
                        e.net = revenue - c;
                        e.ms_search = t1 - t0;
                        e.ms_validate = t3 - t2;
                        cumulative += revenue;
                        report.total_gross += revenue;
                        report.total_net += e.net;
                        report.committed.push_back(std::move(e));
                    }
                }
            } else {
                // per-path dependency check, re-optimize changed paths only
                double t0 = now_ms();
                std::vector<const std::vector<std::string>*> live;
                for (const auto& path : candidate_paths) {
                    if (first || path_changed(path, catalog, series.blocks[bi - 1], block))
                        live.push_back(&path);
                }
                double t1 = now_ms();
                report.discovery_invocations += static_cast<long long>(live.size());
                bool found = false;
                Strategy best;
                double t2 = now_ms();
                for (const auto* path : live) {
                    OptimizeOptions opts;
                    opts.min_target = min_revenue;
                    auto r = optimize_revenue(block, catalog, base, *path, opts);
                    if (!r) continue;
                    double revenue = strategy_revenue(block, catalog, base, *path, r->params);
                    if (!found || revenue > best.revenue) {
                        found = true;
                        best.path = *path;
                        best.params = r->params;
                        best.revenue = revenue;
                    }
                }
                double t3 = now_ms();
                if (found) {
                    double t4 = now_ms();
                    double revenue =
                        strategy_revenue(block, catalog, base, best.path, best.params);
                    double t5 = now_ms();
                    double c = cost.cost(best.path.size());
                    if (revenue - c > 0.0) {
                        ReplayEntry e;
                        e.block = block.block_height;
                        e.path = best.path;
                        e.revenue = revenue;
                        e.cost = c;
                        e.net = revenue - c;
                        e.ms_prune = t1 - t0;
                        e.ms_search = t3 - t2;
                        e.ms_validate = t5 - t4;
                        cumulative += revenue;
                        report.total_gross += revenue;
                        report.total_net += e.net;
                        report.committed.push_back(std::move(e));
                    }
                }
            }
        } catch (const Error& e) {
            report.errors.push_back("block " + std::to_string(block.block_height) + ": " +
                                    e.what());
        }
        report.cumulative.emplace_back(block.block_height, cumulative);
    }
    return report;
}

}  // namespace defi
