#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "defi/arb.hpp"
#include "defi/io.hpp"
#include "defi/mdp.hpp"
#include "defi/optimize.hpp"
#include "defi/paths.hpp"
#include "defi/replay.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct Meta {
    std::string config;
    std::string hash_hex() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(config)));
        return buf;
    }
    json to_json() const {
        return {{"version", kVersion}, {"config_hash", hash_hex()}};
    }
    std::string csv_header() const {
        return std::string("# version=") + kVersion + " config_hash=" + hash_hex() + "\n";
    }
};

void write_out(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw defi::InvalidSpec("cannot write " + out);
    f << text;
}

std::string join_path(const std::vector<std::string>& path) {
    std::string s;
    for (std::size_t i = 0; i < path.size(); ++i)
        s += (i ? " " : "") + path[i];
    return s;
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeFi strategy discovery engine"};
    app.require_subcommand(1);
    int jobs = 1;
    unsigned long long seed = 0;
    std::string out, log_level = "info";
    app.add_option("--jobs", jobs, "parallelism for path evaluation");
    app.add_option("--seed", seed, "seed for randomized modes");
    app.add_option("--out", out, "output file (default stdout)");
    app.add_option("--log-level", log_level, "quiet|info|debug");

    // arb
    auto* arb = app.add_subcommand("arb", "negative-cycle arbitrage extraction");
    std::string arb_snapshot, arb_catalog, arb_base = "ETH";
    double arb_min_revenue = 0.1;
    int arb_max_cycles = 50;
    arb->add_option("--snapshot", arb_snapshot, "snapshot JSON")->required();
    arb->add_option("--catalog", arb_catalog, "catalog JSON (default: derived)");
    arb->add_option("--base", arb_base, "base asset");
    arb->add_option("--min-revenue", arb_min_revenue, "revenue floor, base units");
    arb->add_option("--max-cycles", arb_max_cycles, "negative-cycle round cap");

    // paths
    auto* paths = app.add_subcommand("paths", "heuristic-pruned path enumeration");
    std::string paths_catalog, paths_base = "ETH", paths_list;
    std::size_t paths_max_len = 5;
    bool paths_stats = false;
    std::uint64_t paths_budget = 100000000ULL;
    paths->add_option("--catalog", paths_catalog, "catalog JSON (default: bundled 96)");
    paths->add_option("--base", paths_base, "base asset");
    paths->add_option("--max-len", paths_max_len, "maximum path length");
    paths->add_option("--list", paths_list, "write accepted paths here, one per line");
    paths->add_option("--budget", paths_budget, "node expansion cap");
    paths->add_flag("--stats", paths_stats, "print the per-length prune table");

    // search
    auto* search = app.add_subcommand("search", "per-path revenue optimization");
    std::string search_snapshot, search_catalog, search_paths, search_base = "ETH";
    std::string export_smt;
    double search_min = 0.1;
    bool search_free_params = false;
    search->add_option("--snapshot", search_snapshot, "snapshot JSON")->required();
    search->add_option("--catalog", search_catalog, "catalog JSON (default: derived)");
    search->add_option("--paths", search_paths, "path list file (default: enumerate)");
    search->add_option("--base", search_base, "base asset");
    search->add_option("--min-revenue", search_min, "revenue floor, base units");
    search->add_option("--export-smt", export_smt, "emit one .smt2 file per path here");
    search->add_flag("--free-params", search_free_params,
                     "per-action amounts via coordinate descent");

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "block-series replay with cost model");
    std::string series_dir, replay_mode = "arb", replay_catalog, replay_base = "ETH";
    double gas_gwei = 32.0, flash_fee = 0.0, replay_min = 0.1;
    long long gas_per_action = 150000;
    std::size_t replay_max_len = 3;
    replay_cmd->add_option("--series", series_dir, "directory of snapshot JSONs")->required();
    replay_cmd->add_option("--mode", replay_mode, "arb|search");
    replay_cmd->add_option("--catalog", replay_catalog, "catalog JSON (default: derived)");
    replay_cmd->add_option("--base", replay_base, "base asset");
    replay_cmd->add_option("--gas-gwei", gas_gwei, "gas price, GWei");
    replay_cmd->add_option("--gas-per-action", gas_per_action, "gas units per action");
    replay_cmd->add_option("--flash-fee", flash_fee, "flat flash loan fee, base units");
    replay_cmd->add_option("--min-revenue", replay_min, "revenue floor, base units");
    replay_cmd->add_option("--max-len", replay_max_len, "path length cap (search mode)");

    // mdp
    auto* mdp = app.add_subcommand("mdp", "fork-decision MEV threshold");
    double alpha = 0.10, stale = 0.0572, gamma = 0.0, omega = 0.0, margin = 0.1;
    double cm = -1.0;
    int kconf = 1, cutoff = 20;
    std::string sweep;
    mdp->add_option("--alpha", alpha, "adversary hash-rate fraction");
    mdp->add_option("--stale", stale, "stale block rate r_s");
    mdp->add_option("--gamma", gamma, "propagation parameter");
    mdp->add_option("--omega", omega, "eclipse parameter");
    mdp->add_option("--k", kconf, "confirmations before exit");
    mdp->add_option("--cutoff", cutoff, "max chain length");
    mdp->add_option("--cm", cm, "mining cost per step (default: alpha)");
    mdp->add_option("--margin", margin, "bisection margin, block rewards");
    mdp->add_option("--sweep", sweep, "alpha=LO:HI:STEP sweep");

    // gen-snapshot
    auto* gen = app.add_subcommand("gen-snapshot", "synthetic scenario generator");
    std::string preset, gen_catalog_out;
    gen->add_option("--preset", preset, "fig5-bzx | block-9819643-style | appendix-e-bancor")
        ->required();
    gen->add_option("--catalog-out", gen_catalog_out, "also write the matching catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::ostringstream cfg;
    for (int i = 1; i < argc; ++i) cfg << argv[i] << '\n';
    Meta meta{cfg.str()};

    try {
        if (*arb) {
            defi::WorldState state = defi::load_snapshot(arb_snapshot);
            defi::Catalog catalog = arb_catalog.empty() ? defi::derive_catalog(state)
                                                        : defi::load_catalog(arb_catalog);
            defi::resolve_storage_keys(catalog, state);
            defi::ArbResult r =
                defi::run_arb(state, catalog, arb_base, arb_min_revenue, arb_max_cycles);
            json doc;
            doc["meta"] = meta.to_json();
            doc["total_revenue"] = r.total_revenue;
            doc["cycles_found"] = r.cycles_found;
            doc["cap_hit"] = r.cap_hit;
            json strategies = json::array();
            for (const defi::Strategy& s : r.strategies)
                strategies.push_back(
                    {{"path", s.path}, {"params", s.params}, {"revenue", s.revenue}});
            doc["strategies"] = std::move(strategies);
            write_out(doc.dump(2) + "\n", out);
        } else if (*paths) {
            defi::Catalog catalog = paths_catalog.empty()
                                        ? defi::catalog_preset_96()
                                        : defi::load_catalog(paths_catalog);
            defi::EnumerateResult r =
                defi::enumerate_pruned(catalog, paths_base, paths_max_len, paths_budget);
            std::ostringstream table;
            table << meta.csv_header() << "length,before,after\n";
            for (const auto& [len, counts] : r.stats.per_length)
                table << len << "," << counts.first << "," << counts.second << "\n";
            if (paths_stats || paths_list.empty()) write_out(table.str(), out);
            if (!paths_list.empty()) {
                std::ostringstream list;
                for (const auto& p : r.paths) list << join_path(p) << "\n";
                write_out(list.str(), paths_list);
            }
        } else if (*search) {
            defi::WorldState state = defi::load_snapshot(search_snapshot);
            defi::Catalog catalog = search_catalog.empty()
                                        ? defi::derive_catalog(state)
                                        : defi::load_catalog(search_catalog);
            defi::resolve_storage_keys(catalog, state);
            std::vector<std::vector<std::string>> candidates;
            if (search_paths.empty()) {
                candidates = defi::enumerate_pruned(catalog, search_base, 3).paths;
            } else {
                std::ifstream f(search_paths);
                if (!f) throw defi::InvalidSpec("cannot open " + search_paths);
                std::string line;
                while (std::getline(f, line)) {
                    std::istringstream ls(line);
                    std::vector<std::string> p;
                    std::string id;
                    while (ls >> id) p.push_back(id);
                    if (!p.empty()) candidates.push_back(std::move(p));
                }
            }
            if (!export_smt.empty()) {
                fs::create_directories(export_smt);
                for (const auto& p : candidates) {
                    try {
                        std::string text = defi::export_smtlib(state, catalog, search_base,
                                                               p, search_min);
                        char name[64];
                        std::snprintf(name, sizeof(name), "%lld_%016llx.smt2",
                                      (long long)state.block_height,
                                      (unsigned long long)fnv1a(join_path(p)));
                        std::ofstream sf(fs::path(export_smt) / name, std::ios::binary);
                        sf << text;
                    } catch (const defi::UnsupportedVenueKind&) {
                        // paths through venues without closed-form predicates
                        // are skipped in the export
                    }
                }
            }
            defi::OptimizeOptions opts;
            opts.min_target = search_min;
            opts.free_params = search_free_params;
            json doc;
            doc["meta"] = meta.to_json();
            try {
                defi::Strategy best =
                    defi::rank_paths(candidates, state, catalog, search_base, opts);
                doc["best"] = {{"path", best.path},
                               {"params", best.params},
                               {"revenue", best.revenue}};
            } catch (const defi::NoProfitablePath&) {
                doc["best"] = nullptr;
            }
            doc["candidates"] = candidates.size();
            write_out(doc.dump(2) + "\n", out);
        } else if (*replay_cmd) {
            defi::BlockSeries series;
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(series_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            std::vector<defi::WorldState> blocks;
            for (const auto& f : files) blocks.push_back(defi::load_snapshot(f));
            std::sort(blocks.begin(), blocks.end(),
                      [](const auto& a, const auto& b) {
                          return a.block_height < b.block_height;
                      });
            for (auto& b : blocks) series.push(std::move(b));
            if (series.blocks.empty()) throw defi::InvalidSpec("no snapshots in " + series_dir);
            defi::Catalog catalog = replay_catalog.empty()
                                        ? defi::derive_catalog(series.blocks.front())
                                        : defi::load_catalog(replay_catalog);
            defi::resolve_storage_keys(catalog, series.blocks.front());
            defi::CostModel cost{gas_gwei, gas_per_action, flash_fee};
            defi::DiscoveryMode mode = replay_mode == "search" ? defi::DiscoveryMode::Search
                                                               : defi::DiscoveryMode::Arb;
            if (replay_mode != "search" && replay_mode != "arb")
                throw CLI::ValidationError("--mode must be arb or search");
            defi::ReplayReport r = defi::replay(series, catalog, replay_base, mode, cost,
                                                replay_min, replay_max_len);
            std::ostringstream csv;
            csv << meta.csv_header()
                << "block,mode,path,revenue,cost,net,ms_prune,ms_search,ms_validate\n";
            for (const defi::ReplayEntry& e : r.committed)
                csv << e.block << "," << replay_mode << "," << join_path(e.path) << ","
                    << csv_num(e.revenue) << "," << csv_num(e.cost) << ","
                    << csv_num(e.net) << "," << csv_num(e.ms_prune) << ","
                    << csv_num(e.ms_search) << "," << csv_num(e.ms_validate) << "\n";
            csv << "# total_gross=" << csv_num(r.total_gross)
                << " total_net=" << csv_num(r.total_net)
                << " discovery_invocations=" << r.discovery_invocations << "\n";
            for (const std::string& err : r.errors) csv << "# error: " << err << "\n";
            write_out(csv.str(), out);
        } else if (*mdp) {
            std::ostringstream csv;
            csv << meta.csv_header() << "alpha,r_s,mev_v\n";
            auto run_one = [&](double a) {
                defi::MdpSpec spec;
                spec.alpha = a;
                spec.gamma = gamma;
                spec.omega = omega;
                spec.r_s = stale;
                spec.k = kconf;
                spec.cutoff = cutoff;
                spec.c_m = cm < 0.0 ? a : cm;
                double t = defi::mev_threshold(spec, margin);
                csv << csv_num(a) << "," << csv_num(stale) << "," << csv_num(t) << "\n";
            };
            if (sweep.empty()) {
                run_one(alpha);
            } else {
                double lo = 0, hi = 0, step = 0;
                if (std::sscanf(sweep.c_str(), "alpha=%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
                    step <= 0)
                    throw CLI::ValidationError("--sweep expects alpha=LO:HI:STEP");
                for (double a = lo; a <= hi + 1e-12; a += step) run_one(a);
            }
            write_out(csv.str(), out);
        } else if (*gen) {
            defi::WorldState state = defi::snapshot_preset(preset);
            write_out(defi::snapshot_to_json(state), out);
            if (!gen_catalog_out.empty())
                defi::save_catalog(defi::catalog_preset(preset), gen_catalog_out);
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const defi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
