#pragma once

#include <optional>

#include "defi/core.hpp"

namespace defi {

struct NoProfitablePath : Error { using Error::Error; };
struct UnsupportedVenueKind : Error { using Error::Error; };

struct OptimizerResult {
    double revenue = 0.0;            // last satisfiable target (lower bound)
    std::vector<double> params;      // witness achieving >= revenue
    int sat_probes = 0;
    std::vector<std::pair<double, double>> bounds_history;  // nested (l, u)
};

struct OptimizeOptions {
    double min_target = 0.1;      // base units; below this the path is dropped
    double rel_tol = 1e-3;        // binary-search exit tolerance
    bool free_params = false;     // per-action amounts via coordinate descent
};

// Feasibility oracle: returns params achieving revenue >= target with all
// non-base balances restored, or nullopt. Parameter model: x1 free and every
// later amount chained to the full amount received; with free_params a
// 3-sweep coordinate descent refines each amount separately.
std::optional<std::vector<double>> is_sat(const WorldState& state, const Catalog& catalog,
                                          const AssetId& base,
                                          const std::vector<std::string>& path,
                                          double target,
                                          const OptimizeOptions& opts = {},
                                          int* probes = nullptr);

// Coarse x10 upper-bound growth from min_target, then binary search between
// the last SAT and first UNSAT targets.
std::optional<OptimizerResult> optimize_revenue(const WorldState& state,
                                                const Catalog& catalog, const AssetId& base,
                                                const std::vector<std::string>& path,
                                                const OptimizeOptions& opts = {});

// Optimizes every path against the same initial state and returns the best
// strategy; ties broken by shorter path, then lexicographic action ids.
Strategy rank_paths(const std::vector<std::vector<std::string>>& paths,
                    const WorldState& state, const Catalog& catalog, const AssetId& base,
                    const OptimizeOptions& opts = {});

// SMT-LIB2 (logic QF_NRA) encoding of the path: free variables x1..xn,
// initial-state equalities, per-step transition + frame equalities with range
// bounds, objective B0(base) + Z <= Bn(base) and non-base restoration.
std::string export_smtlib(const WorldState& state, const Catalog& catalog,
                          const AssetId& base, const std::vector<std::string>& path,
                          double target);

}  // namespace defi
