#include "defi/optimize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace defi {

namespace {

// restoration-checked revenue; -inf when infeasible
double safe_revenue(const WorldState& state, const Catalog& catalog, const AssetId& base,
                    const std::vector<std::string>& path, const std::vector<double>& params) {
    try {
        return strategy_revenue(state, catalog, base, path, params);
    } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

struct ChainedMax {
    double revenue = -std::numeric_limits<double>::infinity();
    std::vector<double> params;
};

// maximize revenue over the scalar entry amount (doubling ramp + golden
// section), full-amount chaining downstream
ChainedMax maximize_chained(const WorldState& state, const Catalog& catalog,
                            const AssetId& base, const std::vector<std::string>& path) {
    ChainedMax out;
    if (path.empty()) return out;
    auto revenue_at = [&](double x) {
        return run_chained(state, catalog, base, path, x).first;
    };
    const double capital = state.balance(catalog.by_id(path.front()).input_asset);
    if (capital <= 0.0) return out;
    double best_x = 0.0, best_r = 0.0;
    for (double x = 1e-6; x <= capital * 2 && x < 1e30; x *= 2) {
        double r = revenue_at(x);
        if (r > best_r) {
            best_r = r;
            best_x = x;
        } else if (best_r > 0.0) {
            break;
        }
    }
    if (best_r <= 0.0) return out;
    double a = best_x / 2.0, b = std::min(best_x * 2.0, capital);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = revenue_at(c), fd = revenue_at(d);
    for (int i = 0; i < 200 && (b - a) > 1e-12 * std::max(1.0, b); ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = revenue_at(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = revenue_at(d);
        }
    }
    auto [r, params] = run_chained(state, catalog, base, path, (a + b) / 2.0);
    if (r < best_r) std::tie(r, params) = run_chained(state, catalog, base, path, best_x);
    out.revenue = r;
    out.params = std::move(params);
    return out;
}

// penalized objective for the free-params mode: base delta minus a stiff
// penalty on unrestored non-base balances
double penalized(const WorldState& state, const Catalog& catalog, const AssetId& base,
                 const std::vector<std::string>& path, const std::vector<double>& params) {
    WorldState final_state;
    try {
        final_state = simulate_path(state, catalog, path, params);
    } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
    }
    double penalty = 0.0;
    std::set<AssetId> assets;
    for (const auto& [a, v] : state.trader_balances) assets.insert(a);
    for (const auto& [a, v] : final_state.trader_balances) assets.insert(a);
    for (const AssetId& a : assets) {
        if (a == base) continue;
        double before = 0, after = 0;
        if (auto it = state.trader_balances.find(a); it != state.trader_balances.end())
            before = it->second;
        after = final_state.balance(a);
        penalty += std::fabs(after - before);
    }
    return final_state.balance(base) - state.balance(base) - 1e6 * penalty;
}

ChainedMax refine_free_params(const WorldState& state, const Catalog& catalog,
                              const AssetId& base, const std::vector<std::string>& path,
                              std::vector<double> params) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    auto value = [&](const std::vector<double>& p) {
        return penalized(state, catalog, base, path, p);
    };
    double best = value(params);
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            double center = params[i];
            double a = center * 0.5, b = std::max(center * 1.5, 1e-9);
            double c = b - gr * (b - a), d = a + gr * (b - a);
            auto at = [&](double x) {
                std::vector<double> p = params;
                p[i] = x;
                return value(p);
            };
            double fc = at(c), fd = at(d);
            for (int it = 0; it < 60; ++it) {
                if (fc > fd) {
                    b = d; d = c; fd = fc;
                    c = b - gr * (b - a); fc = at(c);
                } else {
                    a = c; c = d; fc = fd;
                    d = a + gr * (b - a); fd = at(d);
                }
            }
            double x = (a + b) / 2.0;
            double fx = at(x);
            if (fx > best) {
                best = fx;
                params[i] = x;
            }
        }
    }
    ChainedMax out;
    out.revenue = safe_revenue(state, catalog, base, path, params);
    out.params = std::move(params);
    return out;
}

}  // namespace

std::optional<std::vector<double>> is_sat(const WorldState& state, const Catalog& catalog,
                                          const AssetId& base,
                                          const std::vector<std::string>& path,
                                          double target, const OptimizeOptions& opts,
                                          int* probes) {
    if (probes) ++*probes;
    if (!(target > 0.0) || !std::isfinite(target)) return std::nullopt;
    ChainedMax best = maximize_chained(state, catalog, base, path);
    if (opts.free_params && !best.params.empty()) {
        ChainedMax refined = refine_free_params(state, catalog, base, path, best.params);
        if (refined.revenue > best.revenue) best = std::move(refined);
    }
    if (best.params.empty()) return std::nullopt;
    double check = safe_revenue(state, catalog, base, path, best.params);
    if (check >= target) return best.params;
    return std::nullopt;
}

std::optional<OptimizerResult> optimize_revenue(const WorldState& state,
                                                const Catalog& catalog, const AssetId& base,
                                                const std::vector<std::string>& path,
                                                const OptimizeOptions& opts) {
    OptimizerResult result;
    auto sat = [&](double z) { return is_sat(state, catalog, base, path, z, opts,
                                             &result.sat_probes); };
    auto witness = sat(opts.min_target);
    if (!witness) return std::nullopt;
    result.params = *witness;
    double l = opts.min_target, u = opts.min_target * 10.0;
    while (u < 1e30) {
        auto w = sat(u);
        if (!w) break;
        result.params = *w;
        l = u;
        u *= 10.0;
    }
    result.bounds_history.emplace_back(l, u);
    while (u - l > opts.rel_tol * u) {
        double mid = (l + u) / 2.0;
        if (auto w = sat(mid)) {
            result.params = *w;
            l = mid;
        } else {
            u = mid;
        }
        result.bounds_history.emplace_back(l, u);
    }
    result.revenue = l;
    return result;
}

Strategy rank_paths(const std::vector<std::vector<std::string>>& paths,
                    const WorldState& state, const Catalog& catalog, const AssetId& base,
                    const OptimizeOptions& opts) {
    if (paths.empty()) throw NoProfitablePath("no candidate paths");
    bool found = false;
    Strategy best;
    for (const auto& path : paths) {
        auto r = optimize_revenue(state, catalog, base, path, opts);
        if (!r) continue;
        double revenue = safe_revenue(state, catalog, base, path, r->params);
        bool better = !found || revenue > best.revenue ||
                      (revenue == best.revenue &&
                       (path.size() < best.path.size() ||
                        (path.size() == best.path.size() && path < best.path)));
        if (better) {
            found = true;
            best.path = path;
            best.params = r->params;
            best.revenue = revenue;
        }
    }
    if (!found) throw NoProfitablePath("every path is unprofitable");
    return best;
}

// ---------------------------------------------------------------------------
// SMT-LIB2 export
// ---------------------------------------------------------------------------

namespace {

// exact decimal expansion of the binary double (finite for every double)
std::string smt_real(double v) {
    if (v < 0) return "(- " + smt_real(-v) + ")";
    char buf[1200];
    std::snprintf(buf, sizeof(buf), "%.1080f", v);
    std::string s(buf);
    std::size_t last = s.find_last_not_of('0');
    if (s[last] == '.') ++last;
    s.erase(last + 1);
    return s;
}

struct SmtVar {
    std::string venue;  // "trader" for balances
    std::string field;
};

std::string var_name(int step, const SmtVar& v) {
    std::string n = "S" + std::to_string(step) + "_" + v.venue + "_" + v.field;
    for (char& c : n)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return n;
}

}  // namespace

std::string export_smtlib(const WorldState& state, const Catalog& catalog,
                          const AssetId& base, const std::vector<std::string>& path,
                          double target) {
    std::vector<const ActionSpec*> acts;
    for (const std::string& id : path) acts.push_back(&catalog.by_id(id));

    // tracked variables: balances of every touched asset plus every field of
    // every touched venue (Bancor venues carry their ratios and fee as
    // per-step variables with frame equalities)
    std::set<AssetId> assets;
    std::set<std::string> venues;
    for (const ActionSpec* a : acts) {
        const MarketVenue& v = state.venue(a->venue);
        if (v.kind == VenueKind::OracleShort)
            throw UnsupportedVenueKind(a->venue + ": no closed-form predicate exported");
        assets.insert(a->input_asset);
        if (a->output_asset) assets.insert(*a->output_asset);
        for (const auto& [asset, r] : v.reserves) assets.insert(asset);
        venues.insert(a->venue);
    }
    assets.insert(base);

    std::vector<SmtVar> vars;
    auto initial_value = [&](const SmtVar& sv) -> double {
        if (sv.venue == "trader") return state.balance(sv.field);
        const MarketVenue& v = state.venue(sv.venue);
        if (sv.field == "fee_ppm") return v.fee_ppm;
        if (sv.field.rfind("ratio_", 0) == 0) return v.ratio_ppm.at(sv.field.substr(6));
        return v.reserves.at(sv.field);
    };
    for (const AssetId& a : assets) vars.push_back({"trader", a});
    for (const std::string& id : venues) {
        const MarketVenue& v = state.venue(id);
        for (const auto& [asset, r] : v.reserves) vars.push_back({id, asset});
        if (v.kind == VenueKind::BancorConverter) {
            for (const auto& [asset, r] : v.ratio_ppm) vars.push_back({id, "ratio_" + asset});
            vars.push_back({id, "fee_ppm"});
        }
    }

    std::ostringstream out;
    out << "(set-logic QF_NRA)\n";
    out << "; strategy feasibility instance, base asset " << base
        << ", target revenue " << smt_real(target) << "\n";
    const int n = static_cast<int>(acts.size());
    for (int i = 1; i <= n; ++i)
        out << "(declare-const x" << i << " Real)\n";
    for (int step = 0; step <= n; ++step)
        for (const SmtVar& v : vars)
            out << "(declare-const " << var_name(step, v) << " Real)\n";

    // t1: initial state
    for (const SmtVar& v : vars)
        out << "(assert (= " << var_name(0, v) << " " << smt_real(initial_value(v))
            << "))\n";

    // t2/t3: per-action transitions, range bounds, frame equalities
    for (int i = 1; i <= n; ++i) {
        const ActionSpec& a = *acts[i - 1];
        const MarketVenue& v = state.venue(a.venue);
        const std::string x = "x" + std::to_string(i);
        const std::string bal_in = var_name(i - 1, {"trader", a.input_asset});
        out << "(assert (>= " << x << " 0))\n";
        out << "(assert (<= " << x << " " << bal_in << "))\n";

        std::set<std::string> touched;
        std::string out_expr;
        std::string out_asset;
        switch (v.kind) {
            case VenueKind::ConstantProduct: {
                AssetId other;
                for (const auto& [asset, r] : v.reserves)
                    if (asset != a.input_asset) other = asset;
                const std::string rin = var_name(i - 1, {a.venue, a.input_asset});
                const std::string rout = var_name(i - 1, {a.venue, other});
                out_expr = "(/ (* " + smt_real(v.fee_num) + " " + x + " " + rout +
                           ") (+ (* " + smt_real(v.fee_den) + " " + rin + ") (* " +
                           smt_real(v.fee_num) + " " + x + ")))";
                out_asset = other;
                out << "(assert (= " << var_name(i, {a.venue, a.input_asset}) << " (+ "
                    << rin << " " << x << ")))\n";
                out << "(assert (= " << var_name(i, {a.venue, other}) << " (- " << rout
                    << " " << out_expr << ")))\n";
                touched = {var_name(i, {a.venue, a.input_asset}),
                           var_name(i, {a.venue, other})};
                break;
            }
            case VenueKind::BancorConverter: {
                AssetId other;
                for (const auto& [asset, r] : v.reserves)
                    if (asset != a.input_asset) other = asset;
                const std::string rin = var_name(i - 1, {a.venue, a.input_asset});
                const std::string rout = var_name(i - 1, {a.venue, other});
                const std::string win = var_name(i - 1, {a.venue, "ratio_" + a.input_asset});
                const std::string wout = var_name(i - 1, {a.venue, "ratio_" + other});
                const std::string fee = var_name(i - 1, {a.venue, "fee_ppm"});
                out_expr = "(* " + rout + " (- 1 (^ (/ " + rin + " (+ " + rin + " " + x +
                           ")) (/ " + win + " " + wout + "))) (/ (* (- 1000000 " + fee +
                           ") (- 1000000 " + fee + ")) 1000000000000))";
                out_asset = other;
                out << "(assert (= " << var_name(i, {a.venue, a.input_asset}) << " (+ "
                    << rin << " " << x << ")))\n";
                out << "(assert (= " << var_name(i, {a.venue, other}) << " (- " << rout
                    << " " << out_expr << ")))\n";
                touched = {var_name(i, {a.venue, a.input_asset}),
                           var_name(i, {a.venue, other})};
                break;
            }
            case VenueKind::OneToOne: {
                out_expr = x;
                out_asset = *a.output_asset;
                break;
            }
            case VenueKind::OracleShort:
                throw UnsupportedVenueKind(a.venue);
        }
        out << "(assert (= " << var_name(i, {"trader", a.input_asset}) << " (- " << bal_in
            << " " << x << ")))\n";
        touched.insert(var_name(i, {"trader", a.input_asset}));
        if (a.output_asset) {
            out << "(assert (= " << var_name(i, {"trader", *a.output_asset}) << " (+ "
                << var_name(i - 1, {"trader", *a.output_asset}) << " " << out_expr
                << ")))\n";
            touched.insert(var_name(i, {"trader", *a.output_asset}));
        }
        for (const SmtVar& sv : vars) {
            const std::string name = var_name(i, sv);
            if (touched.count(name)) continue;
            out << "(assert (= " << name << " " << var_name(i - 1, sv) << "))\n";
        }
    }

    // t4: objective and non-base restoration
    out << "(assert (<= (+ " << var_name(0, {"trader", base}) << " " << smt_real(target)
        << ") " << var_name(n, {"trader", base}) << "))\n";
    for (const AssetId& a : assets) {
        if (a == base) continue;
        out << "(assert (= " << var_name(n, {"trader", a}) << " "
            << var_name(0, {"trader", a}) << "))\n";
    }
    out << "(check-sat)\n";
    return out.str();
}

}  // namespace defi
