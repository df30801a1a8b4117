#include "defi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace defi {

void MdpSpec::validate() const {
    if (!(alpha > 0.0 && alpha < 0.5)) throw InvalidSpec("alpha must be in (0, 0.5)");
    if (gamma < 0.0 || gamma > 1.0) throw InvalidSpec("gamma must be in [0, 1]");
    if (omega < 0.0 || omega > 1.0) throw InvalidSpec("omega must be in [0, 1]");
    if (r_s < 0.0 || r_s >= 1.0) throw InvalidSpec("r_s must be in [0, 1)");
    if (k < 0) throw InvalidSpec("k must be non-negative");
    if (cutoff < k + 1) throw InvalidSpec("cutoff must be at least k + 1");
    if (c_m < 0.0) throw InvalidSpec("c_m must be non-negative");
    if (mev_value < 0.0) throw InvalidSpec("mev_value must be non-negative");
}

std::string to_string(MdpAction a) {
    switch (a) {
        case MdpAction::Adopt: return "adopt";
        case MdpAction::Override: return "override";
        case MdpAction::Match: return "match";
        case MdpAction::Wait: return "wait";
        case MdpAction::Exit: return "exit";
    }
    return "?";
}

int MdpTables::index(int l_a, int l_h, int fork) const {
    const int side = spec.cutoff + 1;
    return (fork * side + l_a) * side + l_h;
}

std::tuple<int, int, int> MdpTables::unpack(int state) const {
    const int side = spec.cutoff + 1;
    int l_h = state % side;
    int l_a = (state / side) % side;
    int fork = state / (side * side);
    return {l_a, l_h, fork};
}

MdpTables build_mdp(const MdpSpec& spec) {
    spec.validate();
    MdpTables t;
    t.spec = spec;
    t.fork_dims = spec.gamma > 0.0 ? 2 : 1;
    const int side = spec.cutoff + 1;
    t.n_states = side * side * t.fork_dims;
    t.rows.assign(kMdpActions, {});
    for (auto& per_state : t.rows) per_state.assign(t.n_states, {});

    // the adversary finds the next block w.p. alpha; the honest network finds
    // it w.p. (1-alpha)(1-r_s) or goes stale w.p. (1-alpha) r_s
    const double p_a = spec.alpha;
    const double p_h = (1.0 - spec.alpha) * (1.0 - spec.r_s);
    const double p_s = (1.0 - spec.alpha) * spec.r_s;
    const int reset = t.index(0, 0, 0);

    for (int state = 0; state < t.n_states; ++state) {
        auto [l_a, l_h, fork] = t.unpack(state);

        // adopt: abandon the private chain, fresh opportunity
        t.rows[(int)MdpAction::Adopt][state] = {{reset, 1.0, 0.0}};

        // wait: mine one more time step; at the cutoff boundary the race must
        // resolve, so wait is unavailable there
        if (l_a < spec.cutoff && l_h < spec.cutoff) {
            auto& row = t.rows[(int)MdpAction::Wait][state];
            row.push_back({t.index(l_a + 1, l_h, fork), p_a, -spec.c_m});
            row.push_back({t.index(l_a, l_h + 1, fork), p_h, -spec.c_m});
            if (p_s > 0.0) row.push_back({state, p_s, -spec.c_m});
        }

        // exit: publish everything, collect the MEV opportunity plus the
        // private block rewards; requires a lead beyond k confirmations
        if (l_a > l_h && l_a > spec.k) {
            t.rows[(int)MdpAction::Exit][state] = {
                {reset, 1.0, spec.mev_value + static_cast<double>(l_a)}};
            // override: publish just enough to orphan the honest chain and
            // keep mining privately on the rest of the lead
            t.rows[(int)MdpAction::Override][state] = {
                {t.index(l_a - l_h - 1, 0, fork), 1.0, static_cast<double>(l_h + 1)}};
        }

        // match: gamma plumbing only — a tie broadcast that the honest
        // network extends w.p. gamma (stylized; inert at the gamma=0 default)
        if (spec.gamma > 0.0 && l_a >= l_h && l_h >= 1 && l_a < spec.cutoff &&
            l_h < spec.cutoff) {
            auto& row = t.rows[(int)MdpAction::Match][state];
            row.push_back({t.index(l_a + 1, l_h, 1), p_a, -spec.c_m});
            row.push_back({t.index(l_a - l_h, 0, 1), p_h * spec.gamma,
                           static_cast<double>(l_h) - spec.c_m});
            row.push_back({t.index(l_a, l_h + 1, 1), p_h * (1.0 - spec.gamma), -spec.c_m});
            if (p_s > 0.0) row.push_back({state, p_s, -spec.c_m});
        }
    }
    return t;
}

MdpSolution solve_policy(const MdpTables& tables, double eps, long long max_iter) {
    const int n = tables.n_states;
    MdpSolution sol;
    sol.h.assign(n, 0.0);
    sol.policy.assign(n, MdpAction::Adopt);
    std::vector<double> hn(n);
    const double ninf = -std::numeric_limits<double>::infinity();
    for (long long it = 1; it <= max_iter; ++it) {
        for (int s = 0; s < n; ++s) {
            double best = ninf;
            MdpAction best_a = MdpAction::Adopt;
            for (int a = 0; a < kMdpActions; ++a) {
                const auto& row = tables.rows[a][s];
                if (row.empty()) continue;
                double q = 0.0;
                for (const MdpTransition& tr : row)
                    q += tr.prob * (tr.reward + sol.h[tr.next]);
                if (q > best) {
                    best = q;
                    best_a = static_cast<MdpAction>(a);
                }
            }
            hn[s] = best;
            sol.policy[s] = best_a;
        }
        const double g = hn[0];  // h is kept normalized with h[(0,0)] = 0
        double span_lo = std::numeric_limits<double>::infinity(), span_hi = -span_lo;
        for (int s = 0; s < n; ++s) {
            double d = (hn[s] - g) - sol.h[s];
            span_lo = std::min(span_lo, d);
            span_hi = std::max(span_hi, d);
        }
        for (int s = 0; s < n; ++s) sol.h[s] = hn[s] - g;
        sol.gain = g;
        sol.iterations = it;
        if (span_hi - span_lo < eps) return sol;
    }
    throw NoConvergence("value iteration did not converge");
}

double honest_gain(const MdpSpec& spec) {
    return spec.alpha - spec.c_m;
}

double mev_threshold(MdpSpec spec, double margin) {
    spec.validate();
    if (!(margin > 0.0)) throw InvalidSpec("margin must be positive");
    const double baseline = honest_gain(spec);
    auto gain_at = [&](double mev) {
        MdpSpec s = spec;
        s.mev_value = mev;
        return solve_policy(build_mdp(s)).gain;
    };
    double lo = 0.0, hi = 1.0;
    while (gain_at(hi) <= baseline) {
        lo = hi;
        hi *= 2.0;
        if (hi >= 5000.0) return std::numeric_limits<double>::infinity();
    }
    while (hi - lo > margin / 2.0) {
        double mid = (lo + hi) / 2.0;
        if (gain_at(mid) > baseline)
            hi = mid;
        else
            lo = mid;
    }
    return (lo + hi) / 2.0;
}

}  // namespace defi
