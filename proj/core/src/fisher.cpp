#include "smac/fisher.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace smac {

FisherPrecond::FisherPrecond(double lambda_, Vec direction_)
    : lambda(lambda_), direction(std::move(direction_)), sq_norm(squared_norm(direction)) {
    if (!(lambda > 0.0)) throw std::invalid_argument("FisherPrecond: lambda must be > 0");
}

Vec sm_inverse_apply(const FisherPrecond& p, const Vec& g) {
    require_same_dim(p.direction, g, "sm_inverse_apply");
    const double denom = p.lambda * p.lambda + p.lambda * p.sq_norm;
    assert(denom > 0.0);
    const double coeff = dot(p.direction, g) / denom;
    Vec out(g.size());
    const double inv_lambda = 1.0 / p.lambda;
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = inv_lambda * g[i] - coeff * p.direction[i];
    return out;
}

Vec dense_sm_oracle(const FisherPrecond& p, const Vec& g) {
    require_same_dim(p.direction, g, "dense_sm_oracle");
    if (p.direction.size() > 128) throw std::invalid_argument("dense_sm_oracle: test-scale only (d <= 128)");
    DenseMatrix a = DenseMatrix::outer(p.direction, p.direction);
    a.add_scaled_identity(p.lambda);
    return solve_gauss(std::move(a), g);
}

Vec batch_mean_score(const std::vector<Vec>& scores) {
    if (scores.empty()) throw std::invalid_argument("batch_mean_score: empty batch");
    Vec mean(scores.front().size(), 0.0);
    for (const Vec& s : scores) {
        require_same_dim(mean, s, "batch_mean_score");
        for (std::size_t i = 0; i < s.size(); ++i) mean[i] += s[i];
    }
    const double inv_n = 1.0 / static_cast<double>(scores.size());
    for (double& v : mean) v *= inv_n;
    return mean;
}

Vec smac_direction(double lambda, const std::vector<Vec>& scores, const Vec& g) {
    if (!(lambda > 0.0)) throw std::invalid_argument("smac_direction: lambda must be > 0");
    if (squared_norm(g) == 0.0) return zeros(g.size());
    return sm_inverse_apply(FisherPrecond(lambda, batch_mean_score(scores)), g);
}

Vec empirical_fvp(const FvpBatch& b, const Vec& v) {
    Vec out = scaled(b.damping, v);
    if (b.scores.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(b.scores.size());
    for (const Vec& l : b.scores) {
        require_same_dim(l, v, "empirical_fvp");
        const double c = inv_n * dot(l, v);
        axpy_inplace(c, l, out);
    }
    return out;
}

CgResult cg_solve(const std::function<Vec(const Vec&)>& op, const Vec& g, int max_iters, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be > 0");
    if (max_iters < 0) throw std::invalid_argument("cg_solve: max_iters must be >= 0");

    CgResult res;
    res.x = zeros(g.size());
    Vec r = g;  // residual of x0 = 0
    Vec p = r;
    double rr = squared_norm(r);
    const double stop = tol * std::sqrt(squared_norm(g));

    int it = 0;
    while (it < max_iters && std::sqrt(rr) > stop) {
        Vec ap = op(p);
        const double pap = dot(p, ap);
        if (!std::isfinite(pap) || pap <= 0.0)
            throw std::runtime_error("cg_solve: operator not positive definite on search direction");
        const double alpha = rr / pap;
        axpy_inplace(alpha, p, res.x);
        axpy_inplace(-alpha, ap, r);
        const double rr_next = squared_norm(r);
        if (!std::isfinite(rr_next)) throw std::runtime_error("cg_solve: non-finite residual");
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
        ++it;
    }
    res.iterations = it;
    res.residual_norm = norm(axpy(-1.0, g, op(res.x)));
    return res;
}

AssumptionDiagnostics assumption_diagnostics(const FvpBatch& b) {
    if (b.scores.empty()) throw std::invalid_argument("assumption_diagnostics: empty batch");
    AssumptionDiagnostics d;
    for (const Vec& l : b.scores) {
        const double sq = squared_norm(l);
        d.trace += sq;
        d.g_hat = std::max(d.g_hat, std::sqrt(sq));
    }
    d.trace /= static_cast<double>(b.scores.size());
    const std::size_t dim = b.scores.front().size();
    if (dim <= 128) {
        DenseMatrix f(static_cast<int>(dim), static_cast<int>(dim));
        const double inv_n = 1.0 / static_cast<double>(b.scores.size());
        for (const Vec& l : b.scores)
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j)
                    f.at(static_cast<int>(i), static_cast<int>(j)) += inv_n * l[i] * l[j];
        d.mu_hat = smallest_symmetric_eigenvalue(f);
    }
    return d;
}

}  // namespace smac
