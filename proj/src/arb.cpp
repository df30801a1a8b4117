#include "defi/arb.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace defi {

MarketGraph build_graph(const WorldState& state, const Catalog& catalog) {
    MarketGraph g;
    g.built_at = state.block_height;
    std::map<std::pair<AssetId, AssetId>, std::pair<std::string, double>> best;
    for (const ActionSpec& a : catalog.actions) {
        if (!a.output_asset) continue;  // non-returning actions have no edge
        auto it = state.venues.find(a.venue);
        if (it == state.venues.end()) continue;
        const MarketVenue& v = it->second;
        if (v.kind != VenueKind::OneToOne &&
            (!v.has_asset(a.input_asset) || v.has_zero_reserve()))
            continue;
        double price = spot_price(state, a.venue, a.input_asset);
        if (!(price > 0.0) || !std::isfinite(price)) continue;
        auto key = std::make_pair(a.input_asset, *a.output_asset);
        auto jt = best.find(key);
        if (jt == best.end() || price > jt->second.second)
            best[key] = {a.venue, price};
    }
    std::set<AssetId> nodes;
    for (const auto& [pair, venue_price] : best) {
        nodes.insert(pair.first);
        nodes.insert(pair.second);
        g.edges.push_back({pair.first, pair.second, venue_price.first,
                           -std::log(venue_price.second)});
    }
    g.nodes.assign(nodes.begin(), nodes.end());
    return g;
}

std::optional<NegCycle> find_negative_cycle(const MarketGraph& g) {
    const size_t n = g.nodes.size();
    if (n == 0 || g.edges.empty()) return std::nullopt;
    std::map<AssetId, size_t> index;
    for (size_t i = 0; i < n; ++i) index[g.nodes[i]] = i;

    // dist starts at 0 everywhere: equivalent to a virtual root connected to
    // every node, so any negative cycle is reachable.
    std::vector<double> dist(n, 0.0);
    std::vector<int> parent_edge(n, -1);
    int touched = -1;
    for (size_t round = 0; round < n; ++round) {
        touched = -1;
        for (size_t e = 0; e < g.edges.size(); ++e) {
            const GraphEdge& edge = g.edges[e];
            size_t u = index.at(edge.from), v = index.at(edge.to);
            if (dist[u] + edge.weight < dist[v] - 1e-15) {
                dist[v] = dist[u] + edge.weight;
                parent_edge[v] = static_cast<int>(e);
                touched = static_cast<int>(v);
            }
        }
        if (touched < 0) return std::nullopt;
    }

    // walk parent links n times to land inside the cycle, then trace it
    size_t cur = static_cast<size_t>(touched);
    for (size_t i = 0; i < n; ++i)
        cur = index.at(g.edges[static_cast<size_t>(parent_edge[cur])].from);
    NegCycle cycle;
    size_t start = cur;
    std::vector<size_t> edge_ids;
    do {
        size_t e = static_cast<size_t>(parent_edge[cur]);
        edge_ids.push_back(e);
        cur = index.at(g.edges[e].from);
    } while (cur != start);
    std::reverse(edge_ids.begin(), edge_ids.end());
    cycle.assets.push_back(g.edges[edge_ids.front()].from);
    for (size_t e : edge_ids) {
        cycle.assets.push_back(g.edges[e].to);
        cycle.venues.push_back(g.edges[e].best_venue);
        cycle.weight_sum += g.edges[e].weight;
    }
    return cycle;
}

namespace {

const GraphEdge* find_edge(const MarketGraph& g, const AssetId& from, const AssetId& to) {
    for (const GraphEdge& e : g.edges)
        if (e.from == from && e.to == to) return &e;
    return nullptr;
}

std::string action_for(const Catalog& catalog, const std::string& venue,
                       const AssetId& in, const AssetId& out) {
    const ActionSpec* a = catalog.find(venue, in, out);
    if (!a) throw UnknownAction("no action " + venue + " " + in + "->" + out);
    return a->action_id;
}

}  // namespace

std::vector<std::string> connect_to_base(const NegCycle& cycle, const MarketGraph& g,
                                         const AssetId& base, const Catalog& catalog) {
    const size_t hops = cycle.venues.size();
    auto rotate_actions = [&](size_t start) {
        std::vector<std::string> path;
        for (size_t i = 0; i < hops; ++i) {
            size_t j = (start + i) % hops;
            path.push_back(action_for(catalog, cycle.venues[j], cycle.assets[j],
                                      cycle.assets[j + 1]));
        }
        return path;
    };

    for (size_t i = 0; i < hops; ++i)
        if (cycle.assets[i] == base) return rotate_actions(i);

    // base outside the cycle: pick the entry (= exit) asset maximizing the
    // round-trip spot product base -> c -> base
    size_t best_i = hops;
    double best_product = -1.0;
    for (size_t i = 0; i < hops; ++i) {
        const GraphEdge* in = find_edge(g, base, cycle.assets[i]);
        const GraphEdge* out = find_edge(g, cycle.assets[i], base);
        if (!in || !out) continue;
        double product = std::exp(-in->weight) * std::exp(-out->weight);
        if (product > best_product) {
            best_product = product;
            best_i = i;
        }
    }
    if (best_i == hops) throw NoRoute("base " + base + " cannot reach the cycle");

    const GraphEdge* in = find_edge(g, base, cycle.assets[best_i]);
    const GraphEdge* out = find_edge(g, cycle.assets[best_i], base);
    std::vector<std::string> path;
    path.push_back(action_for(catalog, in->best_venue, base, cycle.assets[best_i]));
    for (const std::string& id : rotate_actions(best_i)) path.push_back(id);
    path.push_back(action_for(catalog, out->best_venue, cycle.assets[best_i], base));
    return path;
}

ParamSearch greedy_param_search(const WorldState& state, const Catalog& catalog,
                                const AssetId& base, const std::vector<std::string>& path,
                                double x_min) {
    if (path.empty()) throw NoProfit("empty path");
    auto revenue_at = [&](double x) {
        return run_chained(state, catalog, base, path, x).first;
    };

    const double capital = state.balance(catalog.by_id(path.front()).input_asset);
    double best_x = 0.0, best_r = 0.0;
    double prev_x = 0.0;
    for (double x = x_min; x <= capital * 2 && x < 1e30; x *= 2) {
        double r = revenue_at(x);
        if (r > best_r) {
            best_r = r;
            best_x = x;
        } else if (best_r > 0.0) {
            break;  // revenue ceased to increase
        }
        prev_x = x;
    }
    (void)prev_x;
    if (best_r <= 0.0) throw NoProfit("no profitable input amount");

    // golden-section refinement on the doubling bracket around the best probe
    double a = best_x / 2.0, b = std::min(best_x * 2.0, capital);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = revenue_at(c), fd = revenue_at(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = revenue_at(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = revenue_at(d);
        }
    }
    double x_opt = (a + b) / 2.0;
    auto [r_opt, params] = run_chained(state, catalog, base, path, x_opt);
    if (r_opt < best_r) {
        std::tie(r_opt, params) = run_chained(state, catalog, base, path, best_x);
    }
    if (r_opt <= 0.0) throw NoProfit("no profitable input amount");
    return {r_opt, std::move(params)};
}

ArbResult run_arb(const WorldState& state, const Catalog& catalog, const AssetId& base,
                  double min_revenue, int max_cycles) {
    ArbResult result;
    result.final_state = state;
    for (int round = 0; round < max_cycles; ++round) {
        MarketGraph g = build_graph(result.final_state, catalog);
        std::optional<NegCycle> cycle = find_negative_cycle(g);
        if (!cycle) return result;
        ++result.cycles_found;
        std::vector<std::string> path;
        ParamSearch search;
        try {
            path = connect_to_base(*cycle, g, base, catalog);
            search = greedy_param_search(result.final_state, catalog, base, path);
        } catch (const NoRoute&) {
            return result;
        } catch (const NoProfit&) {
            return result;
        }
        if (search.revenue <= min_revenue) return result;
        Strategy s;
        s.path = path;
        s.params = search.params;
        s.revenue = search.revenue;
        result.final_state = simulate_path(result.final_state, catalog, s.path, s.params);
        result.total_revenue += s.revenue;
        result.strategies.push_back(std::move(s));
    }
    // cap reached with a cycle possibly remaining
    result.cap_hit = find_negative_cycle(build_graph(result.final_state, catalog)).has_value();
    return result;
}

}  // namespace defi
