#include <cmath>

#include "doctest.h"

#include "defi/io.hpp"
#include "defi/paths.hpp"
#include "defi/replay.hpp"

using namespace defi;

namespace {

MarketVenue make_cp(const std::string& id, const AssetId& a, double ra, const AssetId& b,
                    double rb) {
    MarketVenue v;
    v.venue_id = id;
    v.reserves = {{a, ra}, {b, rb}};
    return v;
}

// Two independent two-pool round trips: p1/p2 over token A (profitable),
// q1/q2 over token B (dead even, unprofitable after fees).
WorldState base_block(long long height) {
    WorldState s;
    s.block_height = height;
    s.trader_balances = {{"ETH", 1000.0}, {"A", 0.0}, {"B", 0.0}};
    s.venues["p1"] = make_cp("p1", "ETH", 100.0, "A", 1000.0);
    s.venues["p2"] = make_cp("p2", "A", 1000.0, "ETH", 110.0);
    s.venues["q1"] = make_cp("q1", "ETH", 500.0, "B", 5000.0);
    s.venues["q2"] = make_cp("q2", "B", 5000.0, "ETH", 500.0);
    return s;
}

}  // namespace

TEST_CASE("block series bookkeeping") {
    BlockSeries series;
    series.push(base_block(100));
    series.push(base_block(105));

    CHECK(series.has_height(100));
    CHECK(series.has_height(105));
    CHECK_FALSE(series.has_height(101));
    CHECK(series.at_height(105).block_height == 105);
    CHECK_THROWS_AS(series.at_height(101), MissingBlock);
    CHECK_THROWS_AS(series.push(base_block(105)), InvalidSpec);
    CHECK_THROWS_AS(series.push(base_block(99)), InvalidSpec);
}

TEST_CASE("cost model") {
    CostModel m;  // defaults: 32 gwei, 150k gas per action, no flash fee
    CHECK(m.cost(0) == 0.0);
    CHECK(m.cost(1) == doctest::Approx(0.0048));
    CHECK(m.cost(3) == doctest::Approx(0.0144));
    for (std::size_t n = 1; n < 8; ++n) CHECK(m.cost(n) > m.cost(n - 1));

    CostModel f;
    f.flash_loan_fee = 2.5;
    CHECK(f.cost(2) == doctest::Approx(2.5 + 2 * 0.0048));

    CostModel cheap;
    cheap.gas_price_gwei = 0.0;
    CHECK(cheap.cost(5) == 0.0);
}

TEST_CASE("state_changed watches exactly the path's storage keys") {
    Catalog c = derive_catalog(base_block(0));
    std::vector<std::string> p_path = {"p1:ETH-A", "p2:A-ETH"};
    std::vector<std::string> q_path = {"q1:ETH-B", "q2:B-ETH"};

    BlockSeries series;
    series.push(base_block(1));
    WorldState b2 = base_block(2);
    series.push(b2);
    WorldState b3 = base_block(3);
    b3.venues.at("p1").reserves.at("ETH") += 1.0;  // touches p_path only
    series.push(b3);
    WorldState b4 = base_block(4);
    b4.venues.at("p1").reserves.at("ETH") = b3.venues.at("p1").reserves.at("ETH");
    b4.trader_balances.at("B") = 7.0;  // trader key of q_path
    series.push(b4);

    SUBCASE("identical consecutive snapshots are unchanged") {
        CHECK_FALSE(state_changed(p_path, c, series, 2));
        CHECK_FALSE(state_changed(q_path, c, series, 2));
    }
    SUBCASE("a moved reserve flags only paths that read it") {
        CHECK(state_changed(p_path, c, series, 3));
        CHECK_FALSE(state_changed(q_path, c, series, 3));
    }
    SUBCASE("trader balances count as watched state") {
        CHECK_FALSE(state_changed(p_path, c, series, 4));
        CHECK(state_changed(q_path, c, series, 4));
    }
    SUBCASE("sub-noise jitter is ignored") {
        BlockSeries s2;
        s2.push(base_block(1));
        WorldState j = base_block(2);
        double& r = j.venues.at("p1").reserves.at("ETH");
        r += r * 1e-17;
        s2.push(j);
        CHECK_FALSE(state_changed(p_path, c, s2, 2));
    }
    SUBCASE("missing predecessor block throws") {
        BlockSeries gap;
        gap.push(base_block(1));
        gap.push(base_block(5));
        CHECK_THROWS_AS(state_changed(p_path, c, gap, 5), MissingBlock);
    }
}

TEST_CASE("replay in search mode") {
    Catalog c = derive_catalog(base_block(0));
    const std::size_t n_candidates = enumerate_pruned(c, "ETH", 3).paths.size();
    CHECK(n_candidates == 4);  // two directions for each of the two round trips

    // five blocks: static, static, p-move, unrelated q-move, static
    BlockSeries series;
    series.push(base_block(1));
    series.push(base_block(2));
    WorldState b3 = base_block(3);
    b3.venues.at("p1").reserves.at("A") += 50.0;
    series.push(b3);
    WorldState b4 = b3;
    b4.block_height = 4;
    b4.venues.at("q1").reserves.at("B") += 100.0;
    series.push(b4);
    WorldState b5 = b4;
    b5.block_height = 5;
    series.push(b5);

    CostModel cost;
    ReplayReport rep = replay(series, c, "ETH", DiscoveryMode::Search, cost);

    SUBCASE("discovery invocations equal changed (path, block) pairs") {
        // block 1: all 4 paths; block 2: none; block 3: the 2 p-paths;
        // block 4: the 2 q-paths; block 5: none
        CHECK(rep.discovery_invocations == 4 + 0 + 2 + 2 + 0);
        CHECK(rep.errors.empty());
    }
    SUBCASE("only genuinely profitable blocks commit, at most one strategy each") {
        REQUIRE(!rep.committed.empty());
        long long prev_block = -1;
        for (const ReplayEntry& e : rep.committed) {
            CHECK(e.block != prev_block);
            prev_block = e.block;
            CHECK(e.net > 0.0);
            CHECK(e.net == doctest::Approx(e.revenue - e.cost));
            CHECK(e.cost == doctest::Approx(cost.cost(e.path.size())));
            CHECK(e.revenue > 0.1);
        }
        // the profitable round trip goes through the p pools
        CHECK(rep.committed.front().path.front().substr(0, 1) == "p");
    }
    SUBCASE("cumulative revenue is per block, flat over static stretches") {
        REQUIRE(rep.cumulative.size() == 5);
        CHECK(rep.cumulative[0].first == 1);
        CHECK(rep.cumulative[1].second == rep.cumulative[0].second);  // block 2 static
        CHECK(rep.cumulative[4].second == rep.cumulative[3].second);  // block 5 static
        CHECK(rep.cumulative.back().second == doctest::Approx(rep.total_gross));
        CHECK(rep.total_net <= rep.total_gross);
    }
    SUBCASE("deterministic apart from the timing columns") {
        ReplayReport rep2 = replay(series, c, "ETH", DiscoveryMode::Search, cost);
        REQUIRE(rep2.committed.size() == rep.committed.size());
        for (std::size_t i = 0; i < rep.committed.size(); ++i) {
            CHECK(rep2.committed[i].block == rep.committed[i].block);
            CHECK(rep2.committed[i].path == rep.committed[i].path);
            CHECK(rep2.committed[i].revenue == rep.committed[i].revenue);
            CHECK(rep2.committed[i].net == rep.committed[i].net);
        }
        CHECK(rep2.cumulative == rep.cumulative);
        CHECK(rep2.discovery_invocations == rep.discovery_invocations);
    }
    SUBCASE("costs above revenue suppress commits but not discovery") {
        CostModel pricey;
        pricey.flash_loan_fee = 1000.0;
        ReplayReport none = replay(series, c, "ETH", DiscoveryMode::Search, pricey);
        CHECK(none.committed.empty());
        CHECK(none.total_gross == 0.0);
        CHECK(none.discovery_invocations == rep.discovery_invocations);
        for (const auto& [h, cum] : none.cumulative) CHECK(cum == 0.0);
    }
}

TEST_CASE("replay in arb mode") {
    Catalog c = derive_catalog(base_block(0));
    BlockSeries series;
    series.push(base_block(1));
    series.push(base_block(2));  // static
    WorldState b3 = base_block(3);
    b3.venues.at("q2").reserves.at("ETH") += 5.0;
    series.push(b3);
    WorldState b4 = b3;
    b4.block_height = 4;
    series.push(b4);  // static again

    CostModel cost;
    ReplayReport rep = replay(series, c, "ETH", DiscoveryMode::Arb, cost);

    SUBCASE("one discovery run per changed block") {
        CHECK(rep.discovery_invocations == 2);  // block 1 and block 3
        CHECK(rep.errors.empty());
    }
    SUBCASE("the profitable cycle is committed with positive net") {
        REQUIRE(!rep.committed.empty());
        for (const ReplayEntry& e : rep.committed) {
            CHECK(e.net > 0.0);
            CHECK(e.revenue >= 0.1);
        }
        CHECK(rep.total_net < rep.total_gross);  // gas was charged
    }
    SUBCASE("empty series is rejected") {
        CHECK_THROWS_AS(replay(BlockSeries{}, c, "ETH", DiscoveryMode::Arb, cost),
                        InvalidSpec);
    }
}
