#include "defi/paths.hpp"

#include <algorithm>
#include <cstring>
#include <functional>

namespace defi {

bool actions_independent(const ActionSpec& a, const ActionSpec& b) {
    for (const StorageKey& k : a.storage_keys)
        if (b.storage_keys.count(k)) return false;
    return true;
}

namespace {

bool is_entering(const ActionSpec& a, const AssetId& base) { return a.input_asset == base; }
bool is_exiting(const ActionSpec& a, const AssetId& base) {
    return a.output_asset && *a.output_asset == base;
}

bool reverses(const ActionSpec& prev, const ActionSpec& cur) {
    return prev.venue == cur.venue && cur.output_asset && prev.output_asset &&
           prev.input_asset == *cur.output_asset && *prev.output_asset == cur.input_asset;
}

// asset-flow multigraph over the path's returning actions
struct Flow {
    std::map<AssetId, int> out_deg, in_deg;
    std::vector<std::pair<AssetId, AssetId>> edges;
};

Flow build_flow(const std::vector<const ActionSpec*>& path) {
    Flow f;
    for (const ActionSpec* a : path) {
        if (!a->output_asset) continue;  // non-returning actions don't participate
        ++f.out_deg[a->input_asset];
        ++f.in_deg[*a->output_asset];
        f.edges.emplace_back(a->input_asset, *a->output_asset);
    }
    return f;
}

bool has_branch(const Flow& f) {
    for (const auto& [asset, d] : f.out_deg)
        if (d >= 2) return true;
    for (const auto& [asset, d] : f.in_deg)
        if (d >= 2) return true;
    return false;
}

bool has_non_base_cycle(const Flow& f, const AssetId& base) {
    std::map<AssetId, std::vector<AssetId>> adj;
    std::set<AssetId> nodes;
    for (const auto& [from, to] : f.edges) {
        if (from == base || to == base) continue;
        adj[from].push_back(to);
        nodes.insert(from);
        nodes.insert(to);
    }
    std::map<AssetId, int> color;  // 0 new, 1 on stack, 2 done
    std::function<bool(const AssetId&)> dfs = [&](const AssetId& u) -> bool {
        color[u] = 1;
        for (const AssetId& w : adj[u]) {
            if (color[w] == 1) return true;
            if (color[w] == 0 && dfs(w)) return true;
        }
        color[u] = 2;
        return false;
    };
    for (const AssetId& u : nodes)
        if (color[u] == 0 && dfs(u)) return true;
    return false;
}

std::set<StorageKey> keys_without_base(const ActionSpec& a, const AssetId& base) {
    std::set<StorageKey> keys = a.storage_keys;
    keys.erase(trader_key(base));
    return keys;
}

}  // namespace

HeuristicReport check_heuristics(const std::vector<std::string>& path,
                                 const AssetId& base, const Catalog& catalog) {
    HeuristicReport report;
    report.path = path;
    std::vector<const ActionSpec*> acts;
    for (const std::string& id : path) acts.push_back(&catalog.by_id(id));

    auto reject = [&](int h, std::string why) {
        report.rejected_by = h;
        report.reason = std::move(why);
        return report;
    };

    // H1: more than one action
    if (acts.size() < 2) return reject(1, "fewer than two actions");

    // H2: entering actions form a non-empty prefix
    if (!is_entering(*acts.front(), base))
        return reject(2, "path does not start with an entering action");
    for (std::size_t i = 1; i < acts.size(); ++i)
        if (is_entering(*acts[i], base) && !is_entering(*acts[i - 1], base))
            return reject(2, "entering action after a non-entering one: " + path[i]);

    // H3: exiting actions form a non-empty suffix
    if (!is_exiting(*acts.back(), base))
        return reject(3, "path does not end with an exiting action");
    for (std::size_t i = 1; i < acts.size(); ++i)
        if (is_exiting(*acts[i - 1], base) && !is_exiting(*acts[i], base))
            return reject(3, "non-exiting action after an exiting one: " + path[i]);

    // H4: every non-entering action depends on an earlier one; holding the
    // base asset is free, so the trader's base key is not a dependency
    std::set<StorageKey> prior;
    for (std::size_t i = 0; i < acts.size(); ++i) {
        if (!is_entering(*acts[i], base)) {
            std::set<StorageKey> mine = keys_without_base(*acts[i], base);
            bool depends = false;
            for (const StorageKey& k : mine)
                if (prior.count(k)) { depends = true; break; }
            if (!depends) return reject(4, "independent of all prior actions: " + path[i]);
        }
        for (const StorageKey& k : keys_without_base(*acts[i], base)) prior.insert(k);
    }

    // H5: no immediate same-venue reversal
    for (std::size_t i = 1; i < acts.size(); ++i)
        if (reverses(*acts[i - 1], *acts[i]))
            return reject(5, "same-venue reversal at " + path[i]);

    // H6: no branching in the asset-flow multigraph
    Flow flow = build_flow(acts);
    if (has_branch(flow)) return reject(6, "asset-flow branch");

    // H7: no cycle avoiding the base asset
    if (has_non_base_cycle(flow, base)) return reject(7, "non-base asset-flow cycle");

    report.accepted = true;
    return report;
}

namespace {

// bit-mask representation for the hot enumeration loop
struct FastAct {
    const ActionSpec* spec = nullptr;
    bool entering = false, exiting = false, returning = false;
    int in_asset = -1, out_asset = -1;
    int venue = -1;
    std::vector<std::uint64_t> keys;  // excluding the trader's base key
};

struct Enumerator {
    const Catalog& catalog;
    const AssetId& base;
    std::size_t max_len;
    std::uint64_t budget;
    std::vector<FastAct> acts;
    std::size_t words = 0;

    std::vector<std::uint64_t> prior;     // running key union
    std::vector<int> out_deg, in_deg;     // per asset id
    std::vector<std::pair<int, int>> edges;
    std::vector<std::size_t> stack;       // action indices
    std::vector<bool> used;
    int base_id = -1;

    EnumerateResult result;

    Enumerator(const Catalog& c, const AssetId& b, std::size_t ml, std::uint64_t bud)
        : catalog(c), base(b), max_len(ml), budget(bud) {
        std::map<AssetId, int> asset_ids;
        std::map<std::string, int> venue_ids;
        std::map<StorageKey, int> key_ids;
        auto asset_id = [&](const AssetId& a) {
            auto [it, fresh] = asset_ids.emplace(a, (int)asset_ids.size());
            return it->second;
        };
        base_id = asset_id(base);
        for (const ActionSpec& a : c.actions) {
            for (const StorageKey& k : a.storage_keys)
                if (k != trader_key(base)) key_ids.emplace(k, (int)key_ids.size());
            asset_id(a.input_asset);
            if (a.output_asset) asset_id(*a.output_asset);
            venue_ids.emplace(a.venue, (int)venue_ids.size());
        }
        words = (key_ids.size() + 63) / 64;
        for (const ActionSpec& a : c.actions) {
            FastAct f;
            f.spec = &a;
            f.entering = is_entering(a, base);
            f.exiting = is_exiting(a, base);
            f.returning = a.returning();
            f.in_asset = asset_ids.at(a.input_asset);
            if (a.output_asset) f.out_asset = asset_ids.at(*a.output_asset);
            f.venue = venue_ids.at(a.venue);
            f.keys.assign(words, 0);
            for (const StorageKey& k : a.storage_keys) {
                auto it = key_ids.find(k);
                if (it != key_ids.end())
                    f.keys[it->second / 64] |= 1ULL << (it->second % 64);
            }
            acts.push_back(std::move(f));
        }
        prior.assign(words, 0);
        out_deg.assign(asset_ids.size(), 0);
        in_deg.assign(asset_ids.size(), 0);
        used.assign(acts.size(), false);
    }

    bool intersects_prior(const FastAct& f) const {
        for (std::size_t w = 0; w < words; ++w)
            if (f.keys[w] & prior[w]) return true;
        return false;
    }

    bool edge_cycle_avoiding_base() const {
        // at most max_len edges: tiny iterative closure
        for (std::size_t s = 0; s < edges.size(); ++s) {
            if (edges[s].first == base_id || edges[s].second == base_id) continue;
            int cur = edges[s].second;
            for (std::size_t hops = 0; hops < edges.size(); ++hops) {
                bool advanced = false;
                for (const auto& [from, to] : edges) {
                    if (from != cur || from == base_id || to == base_id) continue;
                    if (to == edges[s].first) return true;
                    cur = to;
                    advanced = true;
                    break;
                }
                if (!advanced) break;
            }
        }
        return false;
    }

    bool can_append(const FastAct& f) const {
        const FastAct* prev = stack.empty() ? nullptr : &acts[stack.back()];
        if (f.entering) {
            if (prev && !prev->entering) return false;  // H2
        } else {
            if (!intersects_prior(f)) return false;  // H4 (and first-action H2)
        }
        if (prev && prev->exiting && !f.exiting) return false;  // H3 shape
        if (prev && prev->returning && f.returning && prev->venue == f.venue &&
            prev->in_asset == f.out_asset && prev->out_asset == f.in_asset)
            return false;  // H5
        if (f.returning) {
            if (out_deg[f.in_asset] + 1 >= 2) return false;  // H6
            if (in_deg[f.out_asset] + 1 >= 2) return false;
        }
        return true;
    }

    void dfs() {
        if (!stack.empty()) {
            const FastAct& last = acts[stack.back()];
            if (stack.size() >= 2 && last.exiting) {
                std::vector<std::string> path;
                for (std::size_t i : stack) path.push_back(acts[i].spec->action_id);
                result.stats.per_length[stack.size()].second += 1;
                result.paths.push_back(std::move(path));
            }
            if (stack.size() == max_len) return;
        }
        for (std::size_t i = 0; i < acts.size(); ++i) {
            if (used[i]) continue;
            const FastAct& f = acts[i];
            if (++result.stats.expansions > budget)
                throw CombinatorialBudgetExceeded("expansion budget exceeded");
            if (!can_append(f)) continue;
            // tentatively add, then run the cycle check
            std::vector<std::uint64_t> saved_prior = prior;
            for (std::size_t w = 0; w < words; ++w) prior[w] |= f.keys[w];
            if (f.returning) {
                ++out_deg[f.in_asset];
                ++in_deg[f.out_asset];
                edges.emplace_back(f.in_asset, f.out_asset);
            }
            bool ok = !f.returning || !edge_cycle_avoiding_base();  // H7
            if (ok) {
                used[i] = true;
                stack.push_back(i);
                dfs();
                stack.pop_back();
                used[i] = false;
            }
            if (f.returning) {
                edges.pop_back();
                --out_deg[f.in_asset];
                --in_deg[f.out_asset];
            }
            prior = std::move(saved_prior);
        }
    }
};

std::uint64_t perm_count(std::uint64_t n, std::uint64_t k) {
    std::uint64_t p = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        std::uint64_t factor = n - i;
        if (factor != 0 && p > UINT64_MAX / factor) return UINT64_MAX;  // saturate
        p *= factor;
    }
    return p;
}

}  // namespace

EnumerateResult enumerate_pruned(const Catalog& catalog, const AssetId& base,
                                 std::size_t max_len, std::uint64_t budget) {
    if (max_len < 1) throw InvalidSpec("max_len must be >= 1");
    Enumerator e(catalog, base, max_len, budget);
    e.dfs();
    EnumerateResult result = std::move(e.result);
    for (std::size_t k = 1; k <= max_len; ++k) {
        auto& row = result.stats.per_length[k];  // creates missing rows with after=0
        row.first = perm_count(catalog.actions.size(), k);
    }
    std::sort(result.paths.begin(), result.paths.end(),
              [](const auto& a, const auto& b) {
                  return a.size() != b.size() ? a.size() < b.size() : a < b;
              });
    return result;
}

}  // namespace defi
