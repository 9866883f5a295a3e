#pragma once

#include <string>
#include <vector>

namespace smac {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Sherman-Morrison inverse vs dense Gaussian elimination:
// n_cases random (lambda, l, g) across d in {2, 8, 64, 128} and
// lambda in {0.01, 0.1, 1, 10}, relative error <= 1e-10.
CheckResult check_sm_exactness(int n_cases);

// Analytic score/critic gradients vs central finite differences
// (h = 1e-5, relative error <= 1e-4) on n_nets random nets with d <= 500.
CheckResult check_gradients(int n_nets);

// Recursive GAE vs the O(T^2) brute-force sum on n_batches random batches
// (T <= 256, random done flags), tolerance 1e-12; lambda = 0 gives A = delta.
CheckResult check_gae_oracle(int n_batches);

// For single-score batches the CG direction equals the closed-form
// Sherman-Morrison direction within 1e-6 and CG stops in <= 2 iterations.
CheckResult check_cg_rank1_consistency(int n_cases);

// Binning and smoothing pipeline: hand-computed cases plus identity on
// constants; summary statistics survive a CSV round trip within 1e-9.
CheckResult check_protocol_fidelity();

// Score-function properties: zero mean over the discrete action set and the
// positive-definite quadratic form of the damped empirical Fisher.
CheckResult check_score_properties(int n_states);

// The fast suite (everything above, reduced case counts suitable for a CLI
// verification pass).
std::vector<CheckResult> run_verification();

}  // namespace smac
