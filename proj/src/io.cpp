#include "defi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace defi {

using nlohmann::json;

namespace {

std::string amount_to_string(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double amount_from_json(const json& j, const char* what) {
    double v = 0.0;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            size_t pos = 0;
            v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw InvalidSpec(std::string("bad amount for ") + what + ": '" + s + "'");
        }
    } else if (j.is_number()) {
        v = j.get<double>();
    } else {
        throw InvalidSpec(std::string("amount for ") + what + " must be a string or number");
    }
    return v;
}

json amounts_to_json(const std::map<AssetId, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = amount_to_string(v);
    return out;
}

std::map<AssetId, double> amounts_from_json(const json& j, const char* what) {
    std::map<AssetId, double> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = amount_from_json(it.value(), what);
    return out;
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InvalidSpec("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InvalidSpec("cannot write " + file.string());
    out << text;
}

MarketVenue cp_venue(std::string id, const AssetId& a, double ra, const AssetId& b, double rb) {
    MarketVenue v;
    v.venue_id = std::move(id);
    v.kind = VenueKind::ConstantProduct;
    v.reserves[a] = ra;
    v.reserves[b] = rb;
    return v;
}

}  // namespace

std::string snapshot_to_json(const WorldState& state) {
    json j;
    j["block_height"] = state.block_height;
    j["balances"] = amounts_to_json(state.trader_balances);
    json venues = json::array();
    for (const auto& [id, v] : state.venues) {
        json jv;
        jv["venue_id"] = id;
        jv["kind"] = to_string(v.kind);
        jv["reserves"] = amounts_to_json(v.reserves);
        switch (v.kind) {
            case VenueKind::ConstantProduct:
                jv["fee_num"] = v.fee_num;
                jv["fee_den"] = v.fee_den;
                break;
            case VenueKind::BancorConverter: {
                jv["fee_ppm"] = v.fee_ppm;
                json ratios = json::object();
                for (const auto& [a, r] : v.ratio_ppm) ratios[a] = r;
                jv["ratio_ppm"] = ratios;
                break;
            }
            case VenueKind::OneToOne:
                break;
            case VenueKind::OracleShort:
                jv["collateral_ratio"] = v.collateral_ratio;
                jv["oracle_venue"] = v.oracle_venue;
                break;
        }
        venues.push_back(std::move(jv));
    }
    j["venues"] = std::move(venues);
    return j.dump(2) + "\n";
}

WorldState snapshot_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidSpec(std::string("snapshot parse error: ") + e.what());
    }
    WorldState state;
    state.block_height = j.value("block_height", 0LL);
    if (j.contains("balances"))
        state.trader_balances = amounts_from_json(j.at("balances"), "balance");
    for (const json& jv : j.value("venues", json::array())) {
        MarketVenue v;
        v.venue_id = jv.at("venue_id").get<std::string>();
        v.kind = venue_kind_from_string(jv.at("kind").get<std::string>());
        if (jv.contains("reserves"))
            v.reserves = amounts_from_json(jv.at("reserves"), "reserve");
        v.fee_num = jv.value("fee_num", 997.0);
        v.fee_den = jv.value("fee_den", 1000.0);
        v.fee_ppm = jv.value("fee_ppm", 1000.0);
        if (jv.contains("ratio_ppm"))
            for (auto it = jv.at("ratio_ppm").begin(); it != jv.at("ratio_ppm").end(); ++it)
                v.ratio_ppm[it.key()] = it.value().get<double>();
        v.collateral_ratio = jv.value("collateral_ratio", 1.0);
        v.oracle_venue = jv.value("oracle_venue", std::string());
        if (state.venues.count(v.venue_id))
            throw InvalidSpec("duplicate venue_id " + v.venue_id);
        state.venues[v.venue_id] = std::move(v);
    }
    state.validate();
    return state;
}

WorldState load_snapshot(const std::filesystem::path& file) {
    return snapshot_from_json(read_file(file));
}

void save_snapshot(const WorldState& state, const std::filesystem::path& file) {
    write_file(file, snapshot_to_json(state));
}

std::string catalog_to_json(const Catalog& catalog) {
    json arr = json::array();
    for (const ActionSpec& a : catalog.actions) {
        json ja;
        ja["action_id"] = a.action_id;
        ja["venue"] = a.venue;
        ja["input_asset"] = a.input_asset;
        if (a.output_asset) ja["output_asset"] = *a.output_asset;
        if (!a.storage_keys.empty()) {
            json keys = json::array();
            for (const StorageKey& k : a.storage_keys)
                keys.push_back(json::array({k.venue, k.field}));
            ja["storage_keys"] = std::move(keys);
        }
        arr.push_back(std::move(ja));
    }
    return arr.dump(2) + "\n";
}

Catalog catalog_from_json(const std::string& text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidSpec(std::string("catalog parse error: ") + e.what());
    }
    if (!arr.is_array()) throw InvalidSpec("catalog must be a JSON array");
    Catalog catalog;
    std::set<std::string> seen;
    for (const json& ja : arr) {
        ActionSpec a;
        a.action_id = ja.at("action_id").get<std::string>();
        a.venue = ja.at("venue").get<std::string>();
        a.input_asset = ja.at("input_asset").get<std::string>();
        if (ja.contains("output_asset") && !ja.at("output_asset").is_null())
            a.output_asset = ja.at("output_asset").get<std::string>();
        for (const json& jk : ja.value("storage_keys", json::array()))
            a.storage_keys.insert({jk.at(0).get<std::string>(), jk.at(1).get<std::string>()});
        if (!seen.insert(a.action_id).second)
            throw InvalidSpec("duplicate action_id " + a.action_id);
        catalog.actions.push_back(std::move(a));
    }
    return catalog;
}

Catalog load_catalog(const std::filesystem::path& file) {
    return catalog_from_json(read_file(file));
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& file) {
    write_file(file, catalog_to_json(catalog));
}

Catalog derive_catalog(const WorldState& state) {
    Catalog catalog;
    for (const auto& [id, v] : state.venues) {
        if (v.kind == VenueKind::OracleShort) {
            // one non-returning short per asset the oracle pool can absorb
            for (const auto& [asset, amount] : state.venue(v.oracle_venue).reserves) {
                ActionSpec a;
                a.action_id = id + ":short-" + asset;
                a.venue = id;
                a.input_asset = asset;
                a.storage_keys = derive_storage_keys(a, state);
                catalog.actions.push_back(std::move(a));
            }
            continue;
        }
        for (const auto& [in, out] : v.trade_pairs()) {
            ActionSpec a;
            a.action_id = id + ":" + in + "-" + out;
            a.venue = id;
            a.input_asset = in;
            a.output_asset = out;
            a.storage_keys = derive_storage_keys(a, v);
            catalog.actions.push_back(std::move(a));
        }
    }
    return catalog;
}

void resolve_storage_keys(Catalog& catalog, const WorldState& state) {
    for (ActionSpec& a : catalog.actions) {
        if (a.storage_keys.empty()) a.storage_keys = derive_storage_keys(a, state);
    }
}

Catalog catalog_preset_96() {
    // 24 Uniswap ETH pairs, 23 Bancor BNT pairs, one DAI/SAI converter:
    // 48 + 46 + 2 = 96 directed actions.
    static const char* kUniswapTokens[] = {
        "AMN", "AMPL", "ANT", "BAT", "BNT", "DAI", "DATA", "ENJ",
        "FXC", "GNO", "HEDG", "KNC", "MANA", "MKR", "POA20", "RCN",
        "RDN", "RLC", "SAI", "SAN", "SNT", "TKN", "TRST", "UBT"};
    static const char* kBancorTokens[] = {
        "AMN", "AMPL", "ANT", "BAT", "DATA", "ENJ", "ETH", "FXC",
        "GNO", "HEDG", "KNC", "MANA", "MKR", "POA20", "RCN", "RDN",
        "RLC", "SAI", "SAN", "SNT", "TKN", "TRST", "UBT"};

    Catalog catalog;
    auto add = [&catalog](const std::string& id, const std::string& venue,
                          const AssetId& in, const AssetId& out) {
        ActionSpec a;
        a.action_id = id;
        a.venue = venue;
        a.input_asset = in;
        a.output_asset = out;
        a.storage_keys = {trader_key(in), trader_key(out), {venue, in}, {venue, out}};
        catalog.actions.push_back(std::move(a));
    };
    for (const char* t : kUniswapTokens) {
        const std::string venue = std::string("uniswap-") + t;
        add("uni-ETH-" + std::string(t), venue, "ETH", t);
        add("uni-" + std::string(t) + "-ETH", venue, t, "ETH");
    }
    for (const char* t : kBancorTokens) {
        const std::string venue = std::string("bancor-") + t;
        add("ban-BNT-" + std::string(t), venue, "BNT", t);
        add("ban-" + std::string(t) + "-BNT", venue, t, "BNT");
    }
    add("mkr-DAI-SAI", "makerdao", "DAI", "SAI");
    add("mkr-SAI-DAI", "makerdao", "SAI", "DAI");
    return catalog;
}

namespace {

WorldState preset_fig5_bzx() {
    // ETH/WBTC scenario: an oracle-dependent short on venue "bzx" pushes the
    // WBTC->ETH price of "uniswap-wbtc" from 44.1488 to ~110, flipping the
    // ETH->WBTC->ETH cycle weight from +0.28 to negative.
    WorldState s;
    s.block_height = 9484688;
    s.trader_balances = {{"ETH", 10000.0}, {"WBTC", 0.0}};
    MarketVenue a = cp_venue("uniswap-wbtc", "ETH", 1730.0, "WBTC", 39.0681060413873);
    MarketVenue b = cp_venue("market-b", "ETH", 20000.0, "WBTC", 341.0230692076229);
    MarketVenue bzx;
    bzx.venue_id = "bzx";
    bzx.kind = VenueKind::OracleShort;
    bzx.collateral_ratio = 1.0;
    bzx.oracle_venue = "uniswap-wbtc";
    s.venues = {{a.venue_id, a}, {b.venue_id, b}, {bzx.venue_id, bzx}};
    return s;
}

WorldState preset_block_9819643_style() {
    // Two overlapping opportunities sharing the ETH->TKA pool m1: a two-pool
    // cycle worth 0.11 ETH at its optimum and a three-pool cycle worth 0.20.
    // Committing the small one moves m1 enough to kill the large one.
    WorldState s;
    s.block_height = 9819643;
    s.trader_balances = {{"ETH", 50.0}, {"TKA", 0.0}, {"TKB", 0.0}};
    MarketVenue m1 = cp_venue("m1", "ETH", 50.0, "TKA", 5000.0);
    MarketVenue m2 = cp_venue("m2", "ETH", 46.08855803514619, "TKA", 4000.0);
    MarketVenue m3 = cp_venue("m3", "TKA", 350187.1226848753, "TKB", 200000.0);
    MarketVenue m4 = cp_venue("m4", "ETH", 5000.0, "TKB", 250000.0);
    s.venues = {{"m1", m1}, {"m2", m2}, {"m3", m3}, {"m4", m4}};
    return s;
}

WorldState preset_appendix_e_bancor() {
    // ETH/BNT two-venue scenario with wei-scale reserve constants; the trader
    // holds 1000 ETH.
    WorldState s;
    s.block_height = 9680000;
    s.trader_balances = {{"ETH", 1e21}, {"BNT", 0.0}};
    MarketVenue uni = cp_venue("uniswap-bnt", "ETH", 135368255883939133529.0, "BNT",
                               108143877658121296155075.0);
    MarketVenue ban;
    ban.venue_id = "bancor-eth";
    ban.kind = VenueKind::BancorConverter;
    ban.reserves = {{"ETH", 10936591981278719837125.0}, {"BNT", 8792249012668956788248921.0}};
    ban.ratio_ppm = {{"ETH", 500000.0}, {"BNT", 500000.0}};
    ban.fee_ppm = 1000.0;
    s.venues = {{uni.venue_id, uni}, {ban.venue_id, ban}};
    return s;
}

}  // namespace

WorldState snapshot_preset(const std::string& name) {
    if (name == "fig5-bzx") return preset_fig5_bzx();
    if (name == "block-9819643-style") return preset_block_9819643_style();
    if (name == "appendix-e-bancor") return preset_appendix_e_bancor();
    throw InvalidSpec("unknown preset '" + name + "'");
}

std::vector<std::string> snapshot_preset_names() {
    return {"fig5-bzx", "block-9819643-style", "appendix-e-bancor"};
}

Catalog catalog_preset(const std::string& name) {
    const WorldState state = snapshot_preset(name);
    if (name != "fig5-bzx") return derive_catalog(state);
    // only the quoted directions exist in this scenario
    Catalog catalog;
    auto add = [&](const std::string& venue, const AssetId& in,
                   std::optional<AssetId> out) {
        ActionSpec a;
        a.action_id = venue + ":" + in + (out ? "-" + *out : "-short");
        a.venue = venue;
        a.input_asset = in;
        a.output_asset = std::move(out);
        a.storage_keys = derive_storage_keys(a, state);
        catalog.actions.push_back(std::move(a));
    };
    add("market-b", "ETH", AssetId("WBTC"));
    add("uniswap-wbtc", "WBTC", AssetId("ETH"));
    add("bzx", "ETH", std::nullopt);
    return catalog;
}

}  // namespace defi
