#include "smac/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smac {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

double logsumexp(const Vec& v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

int require_discrete(const Action& a, int n_actions) {
    const int* idx = std::get_if<int>(&a);
    if (!idx) throw std::invalid_argument("categorical policy: discrete action expected");
    if (*idx < 0 || *idx >= n_actions) throw std::out_of_range("categorical policy: action index out of range");
    return *idx;
}

const Vec& require_continuous(const Action& a, int dim) {
    const Vec* v = std::get_if<Vec>(&a);
    if (!v) throw std::invalid_argument("gaussian policy: continuous action expected");
    if (static_cast<int>(v->size()) != dim)
        throw std::invalid_argument("gaussian policy: action dimension mismatch");
    return *v;
}

}  // namespace

CategoricalPolicy::CategoricalPolicy(Mlp net, int n_actions)
    : net_(std::move(net)), n_actions_(n_actions) {
    if (n_actions < 2) throw std::invalid_argument("CategoricalPolicy: need at least 2 actions");
    if (net_.spec().output_dim != n_actions)
        throw std::invalid_argument("CategoricalPolicy: net output_dim must equal n_actions");
}

Vec CategoricalPolicy::checked_logits(const Vec& state) const {
    Vec logits = net_.forward(state);
    if (!all_finite(logits)) throw std::runtime_error("CategoricalPolicy: non-finite logits");
    return logits;
}

Vec CategoricalPolicy::action_probs(const Vec& state) const {
    Vec logits = checked_logits(state);
    const double lse = logsumexp(logits);
    for (double& l : logits) l = std::exp(l - lse);
    return logits;
}

SampleResult CategoricalPolicy::sample(const Vec& state, Rng& rng) const {
    Vec logits = checked_logits(state);
    const double lse = logsumexp(logits);
    const double u = rng.uniform();
    double cum = 0.0;
    int a = n_actions_ - 1;
    for (int i = 0; i < n_actions_; ++i) {
        cum += std::exp(logits[i] - lse);
        if (u < cum) {
            a = i;
            break;
        }
    }
    return {Action{a}, logits[a] - lse};
}

double CategoricalPolicy::log_prob_of(const Vec& state, const Action& action) const {
    const int a = require_discrete(action, n_actions_);
    Vec logits = checked_logits(state);
    return logits[a] - logsumexp(logits);
}

Vec CategoricalPolicy::grad_log_prob(const Vec& state, const Action& action) const {
    const int a = require_discrete(action, n_actions_);
    Vec upstream = action_probs(state);
    for (double& p : upstream) p = -p;
    upstream[a] += 1.0;  // onehot(a) - softmax(logits)
    return net_.backward(state, upstream);
}

GaussianPolicy::GaussianPolicy(Mlp mean_net, int action_dim)
    : net_(std::move(mean_net)), action_dim_(action_dim), log_std_(action_dim, 0.0) {
    if (action_dim < 1) throw std::invalid_argument("GaussianPolicy: action_dim must be >= 1");
    if (net_.spec().output_dim != action_dim)
        throw std::invalid_argument("GaussianPolicy: net output_dim must equal action_dim");
}

double GaussianPolicy::clamped_log_std(int j) const {
    return std::clamp(log_std_[j], kLogStdMin, kLogStdMax);
}

Vec GaussianPolicy::stddev() const {
    Vec s(action_dim_);
    for (int j = 0; j < action_dim_; ++j) s[j] = std::exp(clamped_log_std(j));
    return s;
}

SampleResult GaussianPolicy::sample(const Vec& state, Rng& rng) const {
    Vec mean = net_.forward(state);
    if (!all_finite(mean)) throw std::runtime_error("GaussianPolicy: non-finite mean");
    Vec a(action_dim_);
    double logp = 0.0;
    for (int j = 0; j < action_dim_; ++j) {
        const double ls = clamped_log_std(j);
        const double sd = std::exp(ls);
        const double z = rng.normal();
        a[j] = mean[j] + sd * z;
        logp += -0.5 * z * z - ls - kHalfLog2Pi;
    }
    return {Action{std::move(a)}, logp};
}

double GaussianPolicy::log_prob_of(const Vec& state, const Action& action) const {
    const Vec& a = require_continuous(action, action_dim_);
    Vec mean = net_.forward(state);
    double logp = 0.0;
    for (int j = 0; j < action_dim_; ++j) {
        const double ls = clamped_log_std(j);
        const double sd = std::exp(ls);
        const double z = (a[j] - mean[j]) / sd;
        logp += -0.5 * z * z - ls - kHalfLog2Pi;
    }
    return logp;
}

Vec GaussianPolicy::grad_log_prob(const Vec& state, const Action& action) const {
    const Vec& a = require_continuous(action, action_dim_);
    Vec mean = net_.forward(state);
    Vec upstream(action_dim_);
    Vec grad;
    grad.reserve(param_dim());
    for (int j = 0; j < action_dim_; ++j) {
        const double sd = std::exp(clamped_log_std(j));
        upstream[j] = (a[j] - mean[j]) / (sd * sd);
    }
    grad = net_.backward(state, upstream);
    grad.resize(param_dim(), 0.0);
    const int off = net_.param_dim();
    for (int j = 0; j < action_dim_; ++j) {
        // d logp / d log_std = z^2 - 1; zero where the clamp is active.
        if (log_std_[j] <= kLogStdMin || log_std_[j] >= kLogStdMax) continue;
        const double sd = std::exp(log_std_[j]);
        const double z = (a[j] - mean[j]) / sd;
        grad[off + j] = z * z - 1.0;
    }
    return grad;
}

Vec GaussianPolicy::params() const {
    Vec theta = net_.params();
    theta.insert(theta.end(), log_std_.begin(), log_std_.end());
    return theta;
}

void GaussianPolicy::set_params(const Vec& theta) {
    if (static_cast<int>(theta.size()) != param_dim())
        throw std::invalid_argument("GaussianPolicy::set_params: dimension mismatch");
    Vec net_part(theta.begin(), theta.begin() + net_.param_dim());
    net_.set_params(std::move(net_part));
    std::copy(theta.begin() + net_.param_dim(), theta.end(), log_std_.begin());
}

}  // namespace smac
