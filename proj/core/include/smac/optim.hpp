#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "smac/fisher.hpp"
#include "smac/numeric.hpp"

namespace smac {

struct AdamState {
    Vec m, v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState fresh(std::size_t dim) {
        AdamState s;
        s.m = zeros(dim);
        s.v = zeros(dim);
        return s;
    }
};

// Per-update diagnostics surfaced into the run log.
struct UpdateReport {
    double direction_norm = 0.0;
    double dot_with_grad = 0.0;
    double wall_ms = 0.0;
    std::optional<double> sm_denominator;  // lambda^2 + lambda * |lbar|^2
    std::optional<int> cg_iterations;
    std::optional<double> cg_residual;
};

// theta + eta * g (gradient ascent).
Vec sgd_step(const Vec& theta, const Vec& g, double eta);

// Bias-corrected Adam, ascent orientation: theta + alpha * m_hat / (sqrt(v_hat) + eps).
// Callers minimizing a loss pass the negated gradient.
std::pair<Vec, AdamState> adam_step(const AdamState& state, const Vec& theta, const Vec& g, double alpha);

// One natural-gradient step: theta + eta * (lambda*I + lbar lbar^T)^{-1} g
// with lbar the mean of the score batch.
std::pair<Vec, UpdateReport> smac_step(const Vec& theta, const std::vector<Vec>& scores, const Vec& g,
                                       double eta, double lambda);

// Sequential per-sample pass over a frozen batch: for each sample i,
// theta += eta * (lambda*I + l_i l_i^T)^{-1} (l_i * advantage_i).
// The report aggregates over the whole pass (mean denominator, net direction).
std::pair<Vec, UpdateReport> smac_per_sample_pass(const Vec& theta, const std::vector<Vec>& scores,
                                                  const std::vector<double>& advantages, double eta,
                                                  double lambda);

// Conjugate-gradient natural-gradient step: theta + eta * x where x solves
// ((1/N) sum l_i l_i^T + cg_damping * I) x = g.
std::pair<Vec, UpdateReport> cg_npg_step(const Vec& theta, const std::vector<Vec>& scores, const Vec& g,
                                         double eta, double cg_damping, int max_iters, double tol);

}  // namespace smac
