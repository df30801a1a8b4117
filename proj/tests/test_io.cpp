#include <filesystem>

#include "doctest.h"

#include "defi/io.hpp"

using namespace defi;

TEST_CASE("snapshot round trip preserves every amount bit-exactly") {
    for (const std::string& name : snapshot_preset_names()) {
        WorldState s = snapshot_preset(name);
        WorldState r = snapshot_from_json(snapshot_to_json(s));
        CHECK(r.block_height == s.block_height);
        CHECK(r.trader_balances == s.trader_balances);
        REQUIRE(r.venues.size() == s.venues.size());
        for (const auto& [id, v] : s.venues) {
            const MarketVenue& w = r.venue(id);
            CHECK(w.kind == v.kind);
            CHECK(w.reserves == v.reserves);
            CHECK(w.fee_num == v.fee_num);
            CHECK(w.fee_den == v.fee_den);
            CHECK(w.fee_ppm == v.fee_ppm);
            CHECK(w.ratio_ppm == v.ratio_ppm);
            CHECK(w.collateral_ratio == v.collateral_ratio);
            CHECK(w.oracle_venue == v.oracle_venue);
        }
        // amounts serialize as decimal strings
        CHECK(snapshot_to_json(s).find("\"ETH\": \"") != std::string::npos);
    }
}

TEST_CASE("snapshot parse errors") {
    CHECK_THROWS_AS(snapshot_from_json("{"), InvalidSpec);
    CHECK_THROWS_AS(snapshot_from_json(R"({"balances":{"ETH":"abc"}})"), InvalidSpec);
    CHECK_THROWS_AS(snapshot_from_json(R"({"venues":[
        {"venue_id":"a","kind":"one_to_one"},
        {"venue_id":"a","kind":"one_to_one"}]})"),
                    InvalidSpec);
    CHECK_THROWS_AS(snapshot_from_json(R"({"venues":[{"venue_id":"a","kind":"bogus"}]})"),
                    InvalidSpec);
}

TEST_CASE("catalog round trip") {
    Catalog c = catalog_preset("fig5-bzx");
    Catalog r = catalog_from_json(catalog_to_json(c));
    REQUIRE(r.actions.size() == c.actions.size());
    for (std::size_t i = 0; i < c.actions.size(); ++i) {
        CHECK(r.actions[i].action_id == c.actions[i].action_id);
        CHECK(r.actions[i].venue == c.actions[i].venue);
        CHECK(r.actions[i].input_asset == c.actions[i].input_asset);
        CHECK(r.actions[i].output_asset == c.actions[i].output_asset);
        CHECK(r.actions[i].storage_keys == c.actions[i].storage_keys);
    }
    CHECK_THROWS_AS(catalog_from_json("{}"), InvalidSpec);
}

TEST_CASE("bundled 96-action catalog") {
    Catalog c = catalog_preset_96();
    CHECK(c.actions.size() == 96);
    int uni = 0, ban = 0, mkr = 0;
    for (const ActionSpec& a : c.actions) {
        CHECK_FALSE(a.storage_keys.empty());
        CHECK(a.returning());
        if (a.action_id.rfind("uni-", 0) == 0) ++uni;
        if (a.action_id.rfind("ban-", 0) == 0) ++ban;
        if (a.action_id.rfind("mkr-", 0) == 0) ++mkr;
        // every action carries the trader keys for both legs
        CHECK(a.storage_keys.count(trader_key(a.input_asset)) == 1);
        CHECK(a.storage_keys.count(trader_key(*a.output_asset)) == 1);
    }
    CHECK(uni == 48);
    CHECK(ban == 46);
    CHECK(mkr == 2);
    // Uniswap pairs ETH on one side, Bancor pairs BNT
    CHECK(c.find("uniswap-BAT", "ETH", "BAT") != nullptr);
    CHECK(c.find("bancor-ETH", "BNT", "ETH") != nullptr);
    CHECK(c.find("makerdao", "DAI", "SAI") != nullptr);
}

TEST_CASE("derive_catalog covers every directed pair plus oracle shorts") {
    WorldState s = snapshot_preset("fig5-bzx");
    Catalog c = derive_catalog(s);
    // two CP pools at 2 directions each + 2 shortable oracle-pool assets
    CHECK(c.actions.size() == 6);
    CHECK(c.by_id("bzx:short-ETH").output_asset == std::nullopt);
    const ActionSpec& sh = c.by_id("bzx:short-ETH");
    CHECK(sh.storage_keys.count({"uniswap-wbtc", "ETH"}) == 1);
    CHECK(sh.storage_keys.count({"uniswap-wbtc", "WBTC"}) == 1);
}

TEST_CASE("presets validate and match their scenario constants") {
    WorldState e = snapshot_preset("appendix-e-bancor");
    CHECK(e.venue("uniswap-bnt").reserves.at("ETH") == 135368255883939133529.0);
    CHECK(e.venue("uniswap-bnt").reserves.at("BNT") == 108143877658121296155075.0);
    CHECK(e.venue("bancor-eth").ratio_ppm.at("ETH") == 500000.0);
    CHECK(e.venue("bancor-eth").fee_ppm == 1000.0);
    CHECK(e.balance("ETH") == 1e21);

    WorldState b = snapshot_preset("block-9819643-style");
    CHECK(b.venues.size() == 4);

    CHECK_THROWS_AS(snapshot_preset("nope"), InvalidSpec);
}

TEST_CASE("save and load files") {
    auto dir = std::filesystem::temp_directory_path() / "defi_io_test";
    std::filesystem::create_directories(dir);
    WorldState s = snapshot_preset("block-9819643-style");
    save_snapshot(s, dir / "snap.json");
    CHECK(load_snapshot(dir / "snap.json").venues.size() == s.venues.size());
    Catalog c = derive_catalog(s);
    save_catalog(c, dir / "cat.json");
    CHECK(load_catalog(dir / "cat.json").actions.size() == c.actions.size());
    CHECK_THROWS_AS(load_snapshot(dir / "missing.json"), InvalidSpec);
}

TEST_CASE("resolve_storage_keys fills only empty key sets") {
    WorldState s = snapshot_preset("block-9819643-style");
    Catalog c = derive_catalog(s);
    std::set<StorageKey> original = c.actions.front().storage_keys;
    Catalog bare = c;
    for (ActionSpec& a : bare.actions) a.storage_keys.clear();
    resolve_storage_keys(bare, s);
    CHECK(bare.actions.front().storage_keys == original);
}
