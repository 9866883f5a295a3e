#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smac/env.hpp"
#include "smac/gae.hpp"
#include "smac/mlp.hpp"
#include "smac/optim.hpp"
#include "smac/policy.hpp"

namespace smac {

enum class BatchMode { batch_mean, per_sample };

std::string to_string(BatchMode mode);
BatchMode batch_mode_from_string(const std::string& s);

struct AgentConfig {
    std::string env_id = "cartpole";
    std::string optimizer_id = "smac";  // smac | sgd | adam | cg
    double eta = 5e-3;                  // actor step size
    double alpha = 1e-3;                // critic Adam learning rate
    int T = 1000;                       // steps per update
    double gamma = 0.99;
    double lambda_gae = 0.9;
    double lambda = 0.1;                // SM damping
    long total_timesteps = 300000;
    std::uint64_t seed = 0;
    BatchMode batch_mode = BatchMode::batch_mean;
    int update_batch_size = 0;          // 0 = derive from batch_mode (T or 1)
    int critic_epochs = 1;
    double cg_damping = 1e-2;
    int cg_max_iters = 10;
    double cg_tol = 1e-10;
    std::vector<int> actor_hidden{64, 64};
    std::vector<int> critic_hidden{64, 64};
    int checkpoint_interval = 0;        // iterations between checkpoints, 0 = off
    std::string checkpoint_dir;
    std::string trajectory_csv;         // optional raw-transition dump

    // Effective update batch size B (1 for per-sample, T for batch-mean).
    int effective_update_batch() const;

    void validate() const;  // throws std::invalid_argument on bad fields
};

struct IterationLog {
    long iteration = 0;
    long timestep = 0;  // cumulative environment steps after this iteration
    double mean_episode_return = 0.0;
    double mean_action_log_prob = 0.0;
    double critic_loss = 0.0;
    double direction_norm = 0.0;
    double dot_with_grad = 0.0;
    double sm_denominator = 0.0;  // NaN when the optimizer has none
    int cg_iterations = 0;
    double cg_residual = 0.0;
    double score_g_hat = 0.0;   // max_i ||l_i|| over the batch
    double score_trace = 0.0;   // (1/T) sum_i ||l_i||^2
    double actor_ms = 0.0;      // actor update phase only
    double wall_ms = 0.0;       // whole iteration
};

struct RunRecord {
    AgentConfig config;
    std::vector<IterationLog> iterations;
    std::vector<std::pair<double, double>> episode_returns;  // (timestep at episode end, return)
    // 100-bin curves over the per-iteration series, then exponentially smoothed.
    std::vector<double> bin_centers;
    std::vector<double> binned_return, smoothed_return;
    std::vector<double> binned_logprob, smoothed_logprob;
    double final_return = 0.0;  // last smoothed bin
    long total_actor_updates = 0;
    double total_actor_ms = 0.0;
    double total_wall_ms = 0.0;
    bool failed = false;
    std::string error;
};

// Rolls out a policy/critic pair, auto-resetting the environment and carrying
// episode state across calls so T-step windows can cut episodes anywhere.
class RolloutCollector {
public:
    RolloutCollector(Env& env, const Policy& policy, const Mlp& critic, Rng& rng);

    RolloutBatch collect(int t_steps);

    // Episodes completed since the last call (timestep of completion, return).
    std::vector<std::pair<double, double>> drain_completed_episodes();

    long total_steps() const { return total_steps_; }

private:
    Env& env_;
    const Policy& policy_;
    const Mlp& critic_;
    Rng& rng_;
    Vec obs_;
    bool need_reset_ = true;
    double episode_return_ = 0.0;
    long total_steps_ = 0;
    std::vector<std::pair<double, double>> completed_;
};

// Convenience wrapper: fresh collector over a freshly reset environment.
RolloutBatch collect_rollout(const Policy& policy, const Mlp& critic, Env& env, Rng& rng, int t_steps);

// One Adam descent step on the mean squared error (1/T) sum (R_t - V(s_t))^2.
// Returns the pre-step loss.
std::pair<Mlp, double> critic_update(const Mlp& critic, const RolloutBatch& batch, const GaeOutput& gae,
                                     AdamState& adam, double alpha);

// Full training loop: rollout -> GAE -> actor update -> critic update.
RunRecord train(const AgentConfig& config);

// Checkpoint / snapshot helpers (JSON text).
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);
void write_checkpoint(const std::string& path, const Vec& actor_params, const Mlp& critic,
                      const AdamState& critic_adam, long iteration);

}  // namespace smac
