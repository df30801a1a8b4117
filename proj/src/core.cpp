#include "defi/core.hpp"

#include <algorithm>
#include <cmath>

namespace defi {

std::string to_string(VenueKind k) {
    switch (k) {
        case VenueKind::ConstantProduct: return "constant_product";
        case VenueKind::BancorConverter: return "bancor_converter";
        case VenueKind::OneToOne: return "one_to_one";
        case VenueKind::OracleShort: return "oracle_short";
    }
    throw InvalidSpec("unknown venue kind");
}

VenueKind venue_kind_from_string(const std::string& s) {
    if (s == "constant_product") return VenueKind::ConstantProduct;
    if (s == "bancor_converter") return VenueKind::BancorConverter;
    if (s == "one_to_one") return VenueKind::OneToOne;
    if (s == "oracle_short") return VenueKind::OracleShort;
    throw InvalidSpec("unknown venue kind: " + s);
}

bool MarketVenue::has_zero_reserve() const {
    for (const auto& [asset, amount] : reserves)
        if (amount <= 0.0) return true;
    return false;
}

void MarketVenue::validate() const {
    for (const auto& [asset, amount] : reserves) {
        if (amount < 0.0 || !std::isfinite(amount))
            throw InvalidSpec(venue_id + ": negative or non-finite reserve for " + asset);
    }
    switch (kind) {
        case VenueKind::ConstantProduct:
            if (reserves.size() != 2)
                throw InvalidSpec(venue_id + ": constant product needs exactly 2 reserves");
            if (fee_den <= 0 || fee_num < 0 || fee_num > fee_den)
                throw InvalidSpec(venue_id + ": fee fraction outside [0,1)");
            break;
        case VenueKind::BancorConverter:
            if (fee_ppm < 0 || fee_ppm >= 1e6)
                throw InvalidSpec(venue_id + ": bancor fee outside [0,1)");
            for (const auto& [asset, r] : ratio_ppm)
                if (r <= 0 || r > 1e6)
                    throw InvalidSpec(venue_id + ": connector ratio outside (0,1e6]");
            break;
        case VenueKind::OneToOne:
            break;
        case VenueKind::OracleShort:
            if (collateral_ratio <= 0)
                throw InvalidSpec(venue_id + ": collateral ratio must be positive");
            if (oracle_venue.empty())
                throw InvalidSpec(venue_id + ": oracle venue required");
            break;
    }
}

std::vector<std::pair<AssetId, AssetId>> MarketVenue::trade_pairs() const {
    std::vector<std::pair<AssetId, AssetId>> pairs;
    if (kind == VenueKind::OracleShort) return pairs;
    for (const auto& [a, ra] : reserves)
        for (const auto& [b, rb] : reserves)
            if (a != b) pairs.emplace_back(a, b);
    return pairs;
}

std::set<StorageKey> derive_storage_keys(const ActionSpec& action, const MarketVenue& venue) {
    std::set<StorageKey> keys;
    keys.insert(trader_key(action.input_asset));
    if (action.output_asset) keys.insert(trader_key(*action.output_asset));
    for (const auto& [asset, amount] : venue.reserves)
        keys.insert({venue.venue_id, asset});
    if (venue.kind == VenueKind::OracleShort) {
        // the short reads and pushes its oracle's pool
        keys.insert({venue.oracle_venue, "*"});
    }
    return keys;
}

std::set<StorageKey> derive_storage_keys(const ActionSpec& action, const WorldState& state) {
    const MarketVenue& venue = state.venue(action.venue);
    std::set<StorageKey> keys = derive_storage_keys(action, venue);
    if (venue.kind == VenueKind::OracleShort) {
        keys.erase({venue.oracle_venue, "*"});
        for (const auto& [asset, amount] : state.venue(venue.oracle_venue).reserves)
            keys.insert({venue.oracle_venue, asset});
    }
    return keys;
}

const ActionSpec& Catalog::by_id(const std::string& action_id) const {
    for (const auto& a : actions)
        if (a.action_id == action_id) return a;
    throw UnknownAction("no such action: " + action_id);
}

const ActionSpec* Catalog::find(const std::string& venue, const AssetId& in,
                                const AssetId& out) const {
    for (const auto& a : actions)
        if (a.venue == venue && a.input_asset == in && a.output_asset &&
            *a.output_asset == out)
            return &a;
    return nullptr;
}

double WorldState::balance(const AssetId& a) const {
    auto it = trader_balances.find(a);
    return it == trader_balances.end() ? 0.0 : it->second;
}

const MarketVenue& WorldState::venue(const std::string& id) const {
    auto it = venues.find(id);
    if (it == venues.end()) throw UnknownVenue("no such venue: " + id);
    return it->second;
}

void WorldState::validate() const {
    if (block_height < 0) throw InvalidSpec("negative block height");
    for (const auto& [asset, amount] : trader_balances)
        if (amount < 0 || !std::isfinite(amount))
            throw InvalidSpec("bad trader balance for " + asset);
    for (const auto& [id, v] : venues) v.validate();
}

// ---------------------------------------------------------------------------
// quotes and spot prices
// ---------------------------------------------------------------------------

namespace {

const AssetId& other_reserve(const MarketVenue& v, const AssetId& input) {
    for (const auto& [asset, amount] : v.reserves)
        if (asset != input) return asset;
    throw UnknownAsset(v.venue_id + ": no counterpart reserve for " + input);
}

double cp_quote(const MarketVenue& v, const AssetId& in, double x) {
    auto it = v.reserves.find(in);
    if (it == v.reserves.end()) throw UnknownAsset(v.venue_id + ": " + in);
    double rin = it->second;
    double rout = v.reserves.at(other_reserve(v, in));
    // out = num*x*rout / (rin*den + num*x), the fee hits the input leg
    double out = (v.fee_num * x * rout) / (rin * v.fee_den + v.fee_num * x);
    if (!std::isfinite(out)) throw NonFiniteResult(v.venue_id + ": quote overflow");
    return out;
}

double bancor_quote(const MarketVenue& v, const AssetId& in, double x) {
    auto it = v.reserves.find(in);
    if (it == v.reserves.end()) throw UnknownAsset(v.venue_id + ": " + in);
    const AssetId& outa = other_reserve(v, in);
    double r = it->second;
    double t = v.reserves.at(outa);
    double w = v.ratio_ppm.at(in) / v.ratio_ppm.at(outa);
    double g = (1e6 - v.fee_ppm) * (1e6 - v.fee_ppm) / 1e12;
    double out = t * (1.0 - std::pow(r / (r + x), w)) * g;
    if (!std::isfinite(out)) throw NonFiniteResult(v.venue_id + ": power term overflow");
    return out;
}

}  // namespace

double quote(const MarketVenue& venue, const AssetId& input_asset, double amount_in) {
    if (amount_in < 0) throw InvalidSpec("negative input amount");
    switch (venue.kind) {
        case VenueKind::ConstantProduct:
            return cp_quote(venue, input_asset, amount_in);
        case VenueKind::BancorConverter:
            return bancor_quote(venue, input_asset, amount_in);
        case VenueKind::OneToOne:
            return amount_in;
        case VenueKind::OracleShort:
            throw UnknownVenue(venue.venue_id + ": oracle short quote needs world state");
    }
    throw InvalidSpec("unreachable");
}

double quote(const WorldState& state, const std::string& venue_id,
             const AssetId& input_asset, double amount_in) {
    const MarketVenue& v = state.venue(venue_id);
    if (v.kind != VenueKind::OracleShort) return quote(v, input_asset, amount_in);
    // shorted amount at the oracle's current marginal price, collateral-scaled
    const MarketVenue& oracle = state.venue(v.oracle_venue);
    double out = amount_in * v.collateral_ratio * spot_price(oracle, input_asset);
    if (!std::isfinite(out)) throw NonFiniteResult(venue_id + ": short quote overflow");
    return out;
}

double spot_price(const MarketVenue& venue, const AssetId& input_asset) {
    switch (venue.kind) {
        case VenueKind::ConstantProduct: {
            auto it = venue.reserves.find(input_asset);
            if (it == venue.reserves.end())
                throw UnknownAsset(venue.venue_id + ": " + input_asset);
            double rin = it->second;
            double rout = venue.reserves.at(other_reserve(venue, input_asset));
            if (rin <= 0 || rout <= 0) throw EmptyReserve(venue.venue_id);
            return venue.fee_frac() * rout / rin;
        }
        case VenueKind::BancorConverter: {
            auto it = venue.reserves.find(input_asset);
            if (it == venue.reserves.end())
                throw UnknownAsset(venue.venue_id + ": " + input_asset);
            const AssetId& outa = other_reserve(venue, input_asset);
            double r = it->second;
            double t = venue.reserves.at(outa);
            if (r <= 0 || t <= 0) throw EmptyReserve(venue.venue_id);
            double w = venue.ratio_ppm.at(input_asset) / venue.ratio_ppm.at(outa);
            double g = (1e6 - venue.fee_ppm) * (1e6 - venue.fee_ppm) / 1e12;
            // d/dx of t*(1-(r/(r+x))^w)*g at x = 0
            return t * w * g / r;
        }
        case VenueKind::OneToOne:
            return 1.0;
        case VenueKind::OracleShort:
            throw UnknownVenue(venue.venue_id + ": oracle short price needs world state");
    }
    throw InvalidSpec("unreachable");
}

double spot_price(const WorldState& state, const std::string& venue_id,
                  const AssetId& input_asset) {
    const MarketVenue& v = state.venue(venue_id);
    if (v.kind != VenueKind::OracleShort) return spot_price(v, input_asset);
    const MarketVenue& oracle = state.venue(v.oracle_venue);
    return v.collateral_ratio * spot_price(oracle, input_asset);
}

// ---------------------------------------------------------------------------
// transitions
// ---------------------------------------------------------------------------

WorldState apply_action(const WorldState& state, const Catalog& catalog,
                        const ActionSpec& action, double x) {
    (void)catalog;
    if (x < 0) throw InvalidSpec("negative action parameter");
    double have = state.balance(action.input_asset);
    if (x > have * (1.0 + kStateRelTol))
        throw InsufficientBalance(action.action_id + ": need " + std::to_string(x) +
                                  " " + action.input_asset + ", have " +
                                  std::to_string(have));
    WorldState next = state;
    if (x == 0.0) return next;

    MarketVenue& v = next.venues.at(action.venue);
    next.trader_balances[action.input_asset] = have - x;

    switch (v.kind) {
        case VenueKind::ConstantProduct: {
            double out = cp_quote(v, action.input_asset, x);
            const AssetId outa = other_reserve(v, action.input_asset);
            v.reserves[action.input_asset] += x;
            v.reserves[outa] -= out;
            if (action.output_asset)
                next.trader_balances[*action.output_asset] =
                    next.balance(*action.output_asset) + out;
            break;
        }
        case VenueKind::BancorConverter: {
            double out = bancor_quote(v, action.input_asset, x);
            const AssetId outa = other_reserve(v, action.input_asset);
            v.reserves[action.input_asset] += x;
            v.reserves[outa] -= out;
            if (action.output_asset)
                next.trader_balances[*action.output_asset] =
                    next.balance(*action.output_asset) + out;
            break;
        }
        case VenueKind::OneToOne: {
            if (!action.output_asset)
                throw InvalidSpec(action.action_id + ": one-to-one needs an output asset");
            next.trader_balances[*action.output_asset] =
                next.balance(*action.output_asset) + x;
            break;
        }
        case VenueKind::OracleShort: {
            // Stylized short: the input is consumed with no return leg; the
            // collateral-scaled amount is routed through the oracle pool,
            // pushing its price.
            MarketVenue& oracle = next.venues.at(v.oracle_venue);
            double routed = x * v.collateral_ratio;
            double out = quote(oracle, action.input_asset, routed);
            const AssetId outa = other_reserve(oracle, action.input_asset);
            oracle.reserves[action.input_asset] += routed;
            oracle.reserves[outa] -= out;
            break;
        }
    }
    return next;
}

std::set<StorageKey> storage_diff(const WorldState& a, const WorldState& b) {
    std::set<StorageKey> diff;
    auto differs = [](double x, double y) {
        double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
        return std::fabs(x - y) > 0.0 && std::fabs(x - y) > 1e-15 * scale;
    };
    std::set<AssetId> assets;
    for (const auto& [k, v] : a.trader_balances) assets.insert(k);
    for (const auto& [k, v] : b.trader_balances) assets.insert(k);
    for (const auto& asset : assets)
        if (differs(a.balance(asset), b.balance(asset))) diff.insert(trader_key(asset));
    for (const auto& [id, va] : a.venues) {
        auto it = b.venues.find(id);
        if (it == b.venues.end()) continue;
        for (const auto& [asset, amount] : va.reserves) {
            auto jt = it->second.reserves.find(asset);
            double other = jt == it->second.reserves.end() ? 0.0 : jt->second;
            if (differs(amount, other)) diff.insert({id, asset});
        }
    }
    return diff;
}

WorldState simulate_path(const WorldState& state, const Catalog& catalog,
                         const std::vector<std::string>& path,
                         const std::vector<double>& params) {
    if (path.size() != params.size())
        throw InvalidSpec("path/params length mismatch");
    WorldState s = state;
    for (size_t i = 0; i < path.size(); ++i)
        s = apply_action(s, catalog, catalog.by_id(path[i]), params[i]);
    return s;
}

double strategy_revenue(const WorldState& state, const Catalog& catalog,
                        const AssetId& base, const std::vector<std::string>& path,
                        const std::vector<double>& params) {
    WorldState final_state = simulate_path(state, catalog, path, params);
    for (const auto& [asset, before] : state.trader_balances) {
        if (asset == base) continue;
        double after = final_state.balance(asset);
        double scale = std::max({1.0, std::fabs(before), std::fabs(after)});
        if (std::fabs(after - before) > kStateRelTol * scale)
            throw ConstraintViolated("non-base balance not restored: " + asset);
    }
    for (const auto& [asset, after] : final_state.trader_balances) {
        if (asset == base || state.trader_balances.count(asset)) continue;
        if (std::fabs(after) > kStateRelTol)
            throw ConstraintViolated("non-base balance not restored: " + asset);
    }
    return final_state.balance(base) - state.balance(base);
}

std::pair<double, std::vector<double>> run_chained(const WorldState& state,
                                                   const Catalog& catalog,
                                                   const AssetId& base,
                                                   const std::vector<std::string>& path,
                                                   double x1) {
    WorldState s = state;
    std::vector<double> params;
    params.reserve(path.size());
    double carry = std::min(x1, s.balance(catalog.by_id(path.front()).input_asset));
    for (size_t i = 0; i < path.size(); ++i) {
        const ActionSpec& a = catalog.by_id(path[i]);
        double before_out = a.output_asset ? s.balance(*a.output_asset) : 0.0;
        double x = std::min(carry, s.balance(a.input_asset));
        s = apply_action(s, catalog, a, x);
        params.push_back(x);
        // a non-returning hop contributes nothing; the next hop reuses x1
        carry = a.output_asset ? s.balance(*a.output_asset) - before_out : x1;
    }
    return {s.balance(base) - state.balance(base), params};
}

}  // namespace defi
