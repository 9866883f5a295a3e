#include "smac/optim.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace smac {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require_finite(const Vec& g, const char* where) {
    if (!all_finite(g)) throw std::runtime_error(std::string(where) + ": non-finite gradient");
}

}  // namespace

Vec sgd_step(const Vec& theta, const Vec& g, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("sgd_step: eta must be > 0");
    require_finite(g, "sgd_step");
    return axpy(eta, g, theta);
}

std::pair<Vec, AdamState> adam_step(const AdamState& state, const Vec& theta, const Vec& g, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("adam_step: alpha must be > 0");
    require_same_dim(state.m, g, "adam_step");
    require_same_dim(theta, g, "adam_step");
    require_finite(g, "adam_step");

    AdamState next = state;
    next.t = state.t + 1;
    const double bc1 = 1.0 - std::pow(next.beta1, static_cast<double>(next.t));
    const double bc2 = 1.0 - std::pow(next.beta2, static_cast<double>(next.t));
    Vec out(theta);
    for (std::size_t i = 0; i < g.size(); ++i) {
        next.m[i] = next.beta1 * next.m[i] + (1.0 - next.beta1) * g[i];
        next.v[i] = next.beta2 * next.v[i] + (1.0 - next.beta2) * g[i] * g[i];
        const double m_hat = next.m[i] / bc1;
        const double v_hat = next.v[i] / bc2;
        out[i] += alpha * m_hat / (std::sqrt(v_hat) + next.eps);
    }
    return {std::move(out), std::move(next)};
}

std::pair<Vec, UpdateReport> smac_step(const Vec& theta, const std::vector<Vec>& scores, const Vec& g,
                                       double eta, double lambda) {
    if (!(eta > 0.0)) throw std::invalid_argument("smac_step: eta must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("smac_step: lambda must be > 0");
    require_same_dim(theta, g, "smac_step");
    require_finite(g, "smac_step");

    const auto start = Clock::now();
    UpdateReport report;
    Vec direction;
    if (squared_norm(g) == 0.0) {
        direction = zeros(g.size());
        report.sm_denominator = lambda * lambda;
    } else {
        const FisherPrecond p(lambda, batch_mean_score(scores));
        direction = sm_inverse_apply(p, g);
        report.sm_denominator = lambda * lambda + lambda * p.sq_norm;
    }
    Vec out = axpy(eta, direction, theta);
    report.direction_norm = norm(direction);
    report.dot_with_grad = dot(direction, g);
    report.wall_ms = ms_since(start);
    return {std::move(out), std::move(report)};
}

std::pair<Vec, UpdateReport> smac_per_sample_pass(const Vec& theta, const std::vector<Vec>& scores,
                                                  const std::vector<double>& advantages, double eta,
                                                  double lambda) {
    if (!(eta > 0.0)) throw std::invalid_argument("smac_per_sample_pass: eta must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("smac_per_sample_pass: lambda must be > 0");
    if (scores.size() != advantages.size())
        throw std::invalid_argument("smac_per_sample_pass: scores/advantages length mismatch");
    if (scores.empty()) throw std::invalid_argument("smac_per_sample_pass: empty batch");

    const auto start = Clock::now();
    Vec out(theta);
    Vec g_i(theta.size());
    double denom_sum = 0.0;
    const double inv_lambda = 1.0 / lambda;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const Vec& l = scores[i];
        require_same_dim(out, l, "smac_per_sample_pass");
        // One-sample policy gradient and its damped rank-1 inverse apply.
        for (std::size_t j = 0; j < l.size(); ++j) g_i[j] = advantages[i] * l[j];
        const double sq = squared_norm(l);
        const double denom = lambda * lambda + lambda * sq;
        denom_sum += denom;
        const double coeff = dot(l, g_i) / denom;
        for (std::size_t j = 0; j < l.size(); ++j) out[j] += eta * (inv_lambda * g_i[j] - coeff * l[j]);
    }

    UpdateReport report;
    Vec net_direction = axpy(-1.0, theta, out);
    scale_inplace(1.0 / eta, net_direction);
    report.direction_norm = norm(net_direction);
    report.sm_denominator = denom_sum / static_cast<double>(scores.size());
    report.wall_ms = ms_since(start);
    return {std::move(out), std::move(report)};
}

std::pair<Vec, UpdateReport> cg_npg_step(const Vec& theta, const std::vector<Vec>& scores, const Vec& g,
                                         double eta, double cg_damping, int max_iters, double tol) {
    if (!(eta > 0.0)) throw std::invalid_argument("cg_npg_step: eta must be > 0");
    require_same_dim(theta, g, "cg_npg_step");
    require_finite(g, "cg_npg_step");

    const auto start = Clock::now();
    UpdateReport report;
    Vec direction;
    if (squared_norm(g) == 0.0) {
        direction = zeros(g.size());
        report.cg_iterations = 0;
        report.cg_residual = 0.0;
    } else {
        const FvpBatch batch{scores, cg_damping};
        const CgResult cg =
            cg_solve([&batch](const Vec& v) { return empirical_fvp(batch, v); }, g, max_iters, tol);
        direction = cg.x;
        report.cg_iterations = cg.iterations;
        report.cg_residual = cg.residual_norm;
    }
    Vec out = axpy(eta, direction, theta);
    report.direction_norm = norm(direction);
    report.dot_with_grad = dot(direction, g);
    report.wall_ms = ms_since(start);
    return {std::move(out), std::move(report)};
}

}  // namespace smac
