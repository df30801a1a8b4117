#pragma once

#include <cstdint>

#include "defi/core.hpp"

namespace defi {

struct NoConvergence : Error { using Error::Error; };

struct MdpSpec {
    double alpha = 0.10;    // adversary hash-rate fraction, (0, 0.5)
    double gamma = 0.0;     // propagation parameter
    double r_s = 0.0;       // stale block rate, [0, 1)
    int k = 1;              // confirmations required before exit
    double omega = 0.0;     // eclipse parameter (slot only)
    double c_m = 0.10;      // mining cost per time step, fraction of a block reward
    int cutoff = 20;        // max chain length
    double mev_value = 0.0; // block-reward units

    void validate() const;
};

enum class MdpAction { Adopt = 0, Override = 1, Match = 2, Wait = 3, Exit = 4 };
inline constexpr int kMdpActions = 5;

std::string to_string(MdpAction a);

struct MdpTransition {
    int next = 0;
    double prob = 0.0;
    double reward = 0.0;
};

struct MdpTables {
    MdpSpec spec;
    int n_states = 0;                 // (cutoff+1)^2 * fork_dims
    int fork_dims = 1;                // 2 when gamma > 0
    // per action, per state: outgoing transitions; empty when invalid
    std::vector<std::vector<std::vector<MdpTransition>>> rows;

    int index(int l_a, int l_h, int fork = 0) const;
    std::tuple<int, int, int> unpack(int state) const;
    bool valid(MdpAction a, int state) const {
        return !rows[static_cast<int>(a)][state].empty();
    }
};

struct MdpSolution {
    double gain = 0.0;                 // average reward per step
    std::vector<double> h;             // relative values
    std::vector<MdpAction> policy;
    long long iterations = 0;
};

// Enumerates states up to cutoff and fills transition/reward rows; every
// valid row's probabilities sum to 1.
MdpTables build_mdp(const MdpSpec& spec);

// Relative value iteration under the average-reward criterion; converges when
// the span seminorm of the value update drops below eps.
MdpSolution solve_policy(const MdpTables& tables, double eps = 1e-6,
                         long long max_iter = 1000000);

// Reward rate of plain honest mining: one block reward per block found minus
// the per-step mining cost.
double honest_gain(const MdpSpec& spec);

// Least mev_value at which the optimal policy strictly beats honest mining,
// by doubling bracket growth and bisection to the given margin.
double mev_threshold(MdpSpec spec, double margin = 0.1);

}  // namespace defi
