#pragma once

#include <vector>

#include "smac/numeric.hpp"
#include "smac/policy.hpp"

namespace smac {

// T transitions collected under one policy, plus the bootstrap value of
// the state after the last transition. dones[t] marks an episode boundary
// (termination or time-limit truncation); the bootstrap past a boundary
// is treated as zero.
struct RolloutBatch {
    std::vector<Vec> states;
    std::vector<Action> actions;
    std::vector<double> rewards;
    std::vector<char> dones;
    std::vector<double> values;     // length T+1, includes V(s_T)
    std::vector<double> log_probs;  // log pi(a_t | s_t) at sampling time
    std::vector<Vec> scores;        // per-sample grad log pi, filled before updates

    std::size_t size() const { return rewards.size(); }
};

struct GaeOutput {
    std::vector<double> deltas;
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages[t] + values[t], exactly
};

// TD residuals, lambda-weighted advantages, and return targets.
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   A_t     = sum_l (gamma * lambda)^l delta_{t+l}, truncated at episode ends
// Implemented as the usual backward recursion.
GaeOutput compute_gae(const RolloutBatch& batch, double gamma, double lambda_gae);

// Same contract evaluated as the literal O(T^2) double sum. Test oracle.
GaeOutput gae_bruteforce_oracle(const RolloutBatch& batch, double gamma, double lambda_gae);

}  // namespace smac
