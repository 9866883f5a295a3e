#pragma once

#include <memory>
#include <utility>
#include <variant>

#include "smac/mlp.hpp"
#include "smac/numeric.hpp"
#include "smac/rng.hpp"

namespace smac {

// Discrete action index or continuous action vector.
using Action = std::variant<int, Vec>;

struct SampleResult {
    Action action;
    double log_prob = 0.0;
};

// Stochastic policy over a flat parameter vector theta. grad_log_prob
// returns the score vector consumed by the Fisher preconditioner.
class Policy {
public:
    virtual ~Policy() = default;

    virtual SampleResult sample(const Vec& state, Rng& rng) const = 0;
    virtual double log_prob_of(const Vec& state, const Action& action) const = 0;
    virtual Vec grad_log_prob(const Vec& state, const Action& action) const = 0;

    virtual Vec params() const = 0;
    virtual void set_params(const Vec& theta) = 0;
    virtual int param_dim() const = 0;
};

// Softmax over one logit per action.
class CategoricalPolicy final : public Policy {
public:
    CategoricalPolicy(Mlp net, int n_actions);

    SampleResult sample(const Vec& state, Rng& rng) const override;
    double log_prob_of(const Vec& state, const Action& action) const override;
    Vec grad_log_prob(const Vec& state, const Action& action) const override;

    Vec params() const override { return net_.params(); }
    void set_params(const Vec& theta) override { net_.set_params(theta); }
    int param_dim() const override { return net_.param_dim(); }

    int n_actions() const { return n_actions_; }
    const Mlp& net() const { return net_; }

    // Action probabilities for a state (softmax of logits).
    Vec action_probs(const Vec& state) const;

private:
    Mlp net_;
    int n_actions_;

    Vec checked_logits(const Vec& state) const;
};

// Diagonal Gaussian with state-dependent mean and a learned
// state-independent log standard deviation. theta = [net params, log_std].
class GaussianPolicy final : public Policy {
public:
    static constexpr double kLogStdMin = -5.0;
    static constexpr double kLogStdMax = 2.0;

    GaussianPolicy(Mlp mean_net, int action_dim);

    SampleResult sample(const Vec& state, Rng& rng) const override;
    double log_prob_of(const Vec& state, const Action& action) const override;
    Vec grad_log_prob(const Vec& state, const Action& action) const override;

    Vec params() const override;
    void set_params(const Vec& theta) override;
    int param_dim() const override { return net_.param_dim() + action_dim_; }

    int action_dim() const { return action_dim_; }
    Vec stddev() const;

private:
    Mlp net_;
    int action_dim_;
    Vec log_std_;  // raw values; clamped to [kLogStdMin, kLogStdMax] when used

    double clamped_log_std(int j) const;
};

}  // namespace smac
