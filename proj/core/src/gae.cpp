#include "smac/gae.hpp"

#include <stdexcept>

namespace smac {

namespace {

void check_batch(const RolloutBatch& batch, double gamma, double lambda_gae) {
    const std::size_t t = batch.size();
    if (t == 0) throw std::invalid_argument("compute_gae: empty batch");
    if (batch.dones.size() != t || batch.values.size() != t + 1)
        throw std::invalid_argument("compute_gae: inconsistent batch lengths");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("compute_gae: gamma must be in (0,1]");
    if (!(lambda_gae >= 0.0 && lambda_gae <= 1.0))
        throw std::invalid_argument("compute_gae: lambda_gae must be in [0,1]");
}

std::vector<double> td_residuals(const RolloutBatch& batch, double gamma) {
    const std::size_t t_max = batch.size();
    std::vector<double> deltas(t_max);
    for (std::size_t t = 0; t < t_max; ++t) {
        const double next_v = batch.dones[t] ? 0.0 : batch.values[t + 1];
        deltas[t] = batch.rewards[t] + gamma * next_v - batch.values[t];
    }
    return deltas;
}

}  // namespace

GaeOutput compute_gae(const RolloutBatch& batch, double gamma, double lambda_gae) {
    check_batch(batch, gamma, lambda_gae);
    const std::size_t t_max = batch.size();
    GaeOutput out;
    out.deltas = td_residuals(batch, gamma);
    out.advantages.assign(t_max, 0.0);
    out.returns.assign(t_max, 0.0);
    double acc = 0.0;
    for (std::size_t t = t_max; t-- > 0;) {
        acc = out.deltas[t] + (batch.dones[t] ? 0.0 : gamma * lambda_gae * acc);
        out.advantages[t] = acc;
        out.returns[t] = acc + batch.values[t];
    }
    return out;
}

GaeOutput gae_bruteforce_oracle(const RolloutBatch& batch, double gamma, double lambda_gae) {
    check_batch(batch, gamma, lambda_gae);
    const std::size_t t_max = batch.size();
    GaeOutput out;
    out.deltas = td_residuals(batch, gamma);
    out.advantages.assign(t_max, 0.0);
    out.returns.assign(t_max, 0.0);
    for (std::size_t t = 0; t < t_max; ++t) {
        double sum = 0.0;
        double w = 1.0;
        for (std::size_t l = 0; t + l < t_max; ++l) {
            sum += w * out.deltas[t + l];
            if (batch.dones[t + l]) break;  // episode boundary stops accumulation
            w *= gamma * lambda_gae;
        }
        out.advantages[t] = sum;
        out.returns[t] = sum + batch.values[t];
    }
    return out;
}

}  // namespace smac
