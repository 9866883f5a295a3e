#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "smac/dense.hpp"
#include "smac/numeric.hpp"

namespace smac {

// Implicit damped rank-1 curvature matrix lambda*I + l l^T, where l is a
// score vector (one-sample) or a batch mean of score vectors. With
// lambda > 0 the matrix is symmetric positive definite and the rank-1
// inverse update condition 1 + |l|^2/lambda > 0 can never fail.
struct FisherPrecond {
    double lambda = 0.0;
    Vec direction;
    double sq_norm = 0.0;  // cached direction^T direction

    FisherPrecond(double lambda_, Vec direction_);
};

// Implicit empirical curvature (1/N) sum_i l_i l_i^T + damping*I applied
// through inner products only.
struct FvpBatch {
    std::vector<Vec> scores;
    double damping = 0.0;
};

// (lambda*I + l l^T)^{-1} g computed in O(d) time and memory:
//   g/lambda - l * (l^T g) / (lambda^2 + lambda * l^T l).
Vec sm_inverse_apply(const FisherPrecond& p, const Vec& g);

// Explicitly builds lambda*I + l l^T and solves with Gaussian elimination.
// Test oracle only; refuses d > 128.
Vec dense_sm_oracle(const FisherPrecond& p, const Vec& g);

// Elementwise mean of N score vectors.
Vec batch_mean_score(const std::vector<Vec>& scores);

// Natural-gradient update direction: inverse of lambda*I + lbar lbar^T
// applied to g, with lbar the batch-mean score. Returns the zero vector
// for g = 0.
Vec smac_direction(double lambda, const std::vector<Vec>& scores, const Vec& g);

// (1/N) sum_i l_i (l_i^T v) + damping * v. Empty batch degenerates to
// damping * v.
Vec empirical_fvp(const FvpBatch& b, const Vec& v);

struct CgResult {
    Vec x;
    int iterations = 0;
    double residual_norm = 0.0;  // ||op(x) - g|| recomputed at exit
};

// Conjugate gradient on an implicit SPD operator, from x0 = 0, stopping at
// ||residual|| <= tol * ||g|| or max_iters.
CgResult cg_solve(const std::function<Vec(const Vec&)>& op, const Vec& g, int max_iters, double tol);

// Runtime estimates of the curvature spectrum bounds:
//   g_hat  = max_i ||l_i||        (score-norm bound)
//   trace  = (1/N) sum_i ||l_i||^2 (trace of the empirical matrix)
//   mu_hat = smallest eigenvalue of the dense matrix, when d <= 128
// Satisfies mu_hat <= trace/d <= g_hat^2.
struct AssumptionDiagnostics {
    double g_hat = 0.0;
    double trace = 0.0;
    std::optional<double> mu_hat;
};

AssumptionDiagnostics assumption_diagnostics(const FvpBatch& b);

}  // namespace smac
