#include "smac/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "smac/binning.hpp"

namespace smac {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::unique_ptr<Policy> make_policy_for(const Env& env, const std::vector<int>& hidden, Rng& rng) {
    const ActionSpace space = env.action_space();
    if (space.kind == ActionSpace::Kind::discrete) {
        MlpSpec spec{env.obs_dim(), space.n, hidden};
        return std::make_unique<CategoricalPolicy>(Mlp::init(spec, rng), space.n);
    }
    MlpSpec spec{env.obs_dim(), space.dim, hidden};
    return std::make_unique<GaussianPolicy>(Mlp::init(spec, rng), space.dim);
}

Action clip_to_space(const Action& a, const ActionSpace& space) {
    if (space.kind == ActionSpace::Kind::discrete) return a;
    Vec clipped = std::get<Vec>(a);
    for (double& v : clipped) v = std::clamp(v, space.low, space.high);
    return Action{std::move(clipped)};
}

// Batch-mean updates over contiguous chunks of the rollout. chunk = T is the
// single batch-mean update, chunk = 1 degenerates to the per-sample pass.
std::pair<Vec, UpdateReport> smac_chunked_pass(const Vec& theta, const std::vector<Vec>& scores,
                                               const std::vector<double>& advantages, double eta,
                                               double lambda, int chunk) {
    const std::size_t n = scores.size();
    Vec out(theta);
    UpdateReport total;
    double denom_sum = 0.0;
    int n_chunks = 0;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(begin + static_cast<std::size_t>(chunk), n);
        std::vector<Vec> chunk_scores(scores.begin() + begin, scores.begin() + end);
        Vec g = zeros(theta.size());
        for (std::size_t i = begin; i < end; ++i) axpy_inplace(advantages[i], scores[i], g);
        scale_inplace(1.0 / static_cast<double>(end - begin), g);
        auto [next, report] = smac_step(out, chunk_scores, g, eta, lambda);
        out = std::move(next);
        denom_sum += report.sm_denominator.value_or(0.0);
        ++n_chunks;
    }
    Vec direction = axpy(-1.0, theta, out);
    scale_inplace(1.0 / eta, direction);
    total.direction_norm = norm(direction);
    total.sm_denominator = denom_sum / std::max(1, n_chunks);
    return {std::move(out), std::move(total)};
}

}  // namespace

std::string to_string(BatchMode mode) {
    return mode == BatchMode::batch_mean ? "batch_mean" : "per_sample";
}

BatchMode batch_mode_from_string(const std::string& s) {
    if (s == "batch_mean") return BatchMode::batch_mean;
    if (s == "per_sample") return BatchMode::per_sample;
    throw std::invalid_argument("unknown batch mode '" + s + "'");
}

int AgentConfig::effective_update_batch() const {
    if (update_batch_size > 0) return std::min(update_batch_size, T);
    return batch_mode == BatchMode::per_sample ? 1 : T;
}

void AgentConfig::validate() const {
    if (env_id != "cartpole" && env_id != "acrobot" && env_id != "pendulum")
        throw std::invalid_argument("config: unknown env_id '" + env_id + "'");
    if (optimizer_id != "smac" && optimizer_id != "sgd" && optimizer_id != "adam" && optimizer_id != "cg")
        throw std::invalid_argument("config: unknown optimizer_id '" + optimizer_id + "'");
    if (!(eta > 0.0)) throw std::invalid_argument("config: eta must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("config: alpha must be > 0");
    if (T < 1) throw std::invalid_argument("config: T must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("config: gamma must be in (0,1]");
    if (!(lambda_gae >= 0.0 && lambda_gae <= 1.0))
        throw std::invalid_argument("config: lambda_gae must be in [0,1]");
    if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be > 0");
    if (total_timesteps < T || total_timesteps % T != 0)
        throw std::invalid_argument("config: total_timesteps must be a positive multiple of T");
    if (critic_epochs < 1) throw std::invalid_argument("config: critic_epochs must be >= 1");
    if (update_batch_size < 0) throw std::invalid_argument("config: update_batch_size must be >= 0");
    if (actor_hidden.empty() || critic_hidden.empty())
        throw std::invalid_argument("config: hidden layer lists must be non-empty");
    for (int h : actor_hidden)
        if (h < 1) throw std::invalid_argument("config: actor hidden widths must be >= 1");
    for (int h : critic_hidden)
        if (h < 1) throw std::invalid_argument("config: critic hidden widths must be >= 1");
}

RolloutCollector::RolloutCollector(Env& env, const Policy& policy, const Mlp& critic, Rng& rng)
    : env_(env), policy_(policy), critic_(critic), rng_(rng) {}

RolloutBatch RolloutCollector::collect(int t_steps) {
    if (t_steps < 1) throw std::invalid_argument("collect: T must be >= 1");
    RolloutBatch batch;
    batch.states.reserve(t_steps);
    batch.actions.reserve(t_steps);
    batch.rewards.reserve(t_steps);
    batch.dones.reserve(t_steps);
    batch.values.reserve(t_steps + 1);
    batch.log_probs.reserve(t_steps);

    const ActionSpace space = env_.action_space();
    for (int t = 0; t < t_steps; ++t) {
        if (need_reset_) {
            obs_ = env_.reset(rng_);
            episode_return_ = 0.0;
            need_reset_ = false;
        }
        SampleResult sr = policy_.sample(obs_, rng_);
        const StepResult step = env_.step(clip_to_space(sr.action, space));

        batch.states.push_back(obs_);
        batch.actions.push_back(std::move(sr.action));
        batch.rewards.push_back(step.reward);
        batch.dones.push_back(step.done() ? 1 : 0);
        batch.values.push_back(critic_.forward(obs_)[0]);
        batch.log_probs.push_back(sr.log_prob);

        episode_return_ += step.reward;
        ++total_steps_;
        if (step.done()) {
            completed_.emplace_back(static_cast<double>(total_steps_), episode_return_);
            need_reset_ = true;
        } else {
            obs_ = step.observation;
        }
    }
    // Bootstrap value of the state after the window; zero at an episode
    // boundary (GAE masks it there anyway).
    batch.values.push_back(need_reset_ ? 0.0 : critic_.forward(obs_)[0]);
    return batch;
}

std::vector<std::pair<double, double>> RolloutCollector::drain_completed_episodes() {
    return std::exchange(completed_, {});
}

RolloutBatch collect_rollout(const Policy& policy, const Mlp& critic, Env& env, Rng& rng, int t_steps) {
    RolloutCollector collector(env, policy, critic, rng);
    return collector.collect(t_steps);
}

std::pair<Mlp, double> critic_update(const Mlp& critic, const RolloutBatch& batch, const GaeOutput& gae,
                                     AdamState& adam, double alpha) {
    const std::size_t t_max = batch.size();
    if (t_max == 0) throw std::invalid_argument("critic_update: empty batch");
    if (gae.returns.size() != t_max) throw std::invalid_argument("critic_update: gae/batch mismatch");

    const double inv_t = 1.0 / static_cast<double>(t_max);
    double loss = 0.0;
    Vec grad = zeros(critic.param_dim());
    Vec upstream(1);
    for (std::size_t t = 0; t < t_max; ++t) {
        const double v = critic.forward(batch.states[t])[0];
        const double err = v - gae.returns[t];
        loss += inv_t * err * err;
        upstream[0] = 2.0 * inv_t * err;  // d loss / d V(s_t)
        axpy_inplace(1.0, critic.backward(batch.states[t], upstream), grad);
    }
    if (!std::isfinite(loss)) throw std::runtime_error("critic_update: non-finite loss");

    // Descent on the loss via the ascent-oriented Adam step.
    scale_inplace(-1.0, grad);
    auto [new_params, new_state] = adam_step(adam, critic.params(), grad, alpha);
    adam = std::move(new_state);
    Mlp next = critic;
    next.set_params(std::move(new_params));
    return {std::move(next), loss};
}

RunRecord train(const AgentConfig& config) {
    config.validate();

    RunRecord record;
    record.config = config;
    const auto run_start = Clock::now();

    try {
        Rng rng(config.seed);
        auto env = make_env(config.env_id);
        auto policy = make_policy_for(*env, config.actor_hidden, rng);
        Mlp critic = Mlp::init(MlpSpec{env->obs_dim(), 1, config.critic_hidden}, rng);
        AdamState critic_adam = AdamState::fresh(critic.params().size());
        AdamState actor_adam = AdamState::fresh(policy->param_dim());

        RolloutCollector collector(*env, *policy, critic, rng);
        std::vector<TransitionRecord> trajectory;

        const long iterations = config.total_timesteps / config.T;
        const int update_batch = config.effective_update_batch();
        double last_mean_return = kNaN;

        for (long k = 0; k < iterations; ++k) {
            const auto iter_start = Clock::now();

            RolloutBatch batch = collector.collect(config.T);
            const GaeOutput gae = compute_gae(batch, config.gamma, config.lambda_gae);

            // Scores of the frozen rollout policy, plus the spectrum
            // diagnostics that come along for free.
            IterationLog log;
            batch.scores.resize(batch.size());
            for (std::size_t t = 0; t < batch.size(); ++t) {
                batch.scores[t] = policy->grad_log_prob(batch.states[t], batch.actions[t]);
                const double sq = squared_norm(batch.scores[t]);
                log.score_trace += sq;
                log.score_g_hat = std::max(log.score_g_hat, std::sqrt(sq));
            }
            log.score_trace /= static_cast<double>(batch.size());

            const auto actor_start = Clock::now();
            Vec theta = policy->params();
            UpdateReport report;
            report.sm_denominator = kNaN;
            if (config.optimizer_id == "smac" && update_batch == 1) {
                auto [next, r] = smac_per_sample_pass(theta, batch.scores, gae.advantages, config.eta,
                                                      config.lambda);
                theta = std::move(next);
                report = std::move(r);
            } else if (config.optimizer_id == "smac" && update_batch < config.T) {
                auto [next, r] = smac_chunked_pass(theta, batch.scores, gae.advantages, config.eta,
                                                   config.lambda, update_batch);
                theta = std::move(next);
                report = std::move(r);
            } else {
                Vec g = zeros(theta.size());
                for (std::size_t t = 0; t < batch.size(); ++t)
                    axpy_inplace(gae.advantages[t], batch.scores[t], g);
                scale_inplace(1.0 / static_cast<double>(batch.size()), g);

                if (config.optimizer_id == "smac") {
                    auto [next, r] = smac_step(theta, batch.scores, g, config.eta, config.lambda);
                    theta = std::move(next);
                    report = std::move(r);
                } else if (config.optimizer_id == "sgd") {
                    theta = sgd_step(theta, g, config.eta);
                    report.direction_norm = norm(g);
                    report.dot_with_grad = squared_norm(g);
                } else if (config.optimizer_id == "adam") {
                    auto [next, state] = adam_step(actor_adam, theta, g, config.eta);
                    theta = std::move(next);
                    actor_adam = std::move(state);
                    report.direction_norm = norm(g);
                    report.dot_with_grad = squared_norm(g);
                } else {  // cg
                    auto [next, r] = cg_npg_step(theta, batch.scores, g, config.eta, config.cg_damping,
                                                 config.cg_max_iters, config.cg_tol);
                    theta = std::move(next);
                    report = std::move(r);
                }
            }
            if (!all_finite(theta)) throw std::runtime_error("train: actor parameters diverged");
            policy->set_params(theta);
            const double actor_ms = ms_since(actor_start);

            double critic_loss = 0.0;
            for (int e = 0; e < config.critic_epochs; ++e) {
                auto [next_critic, loss] = critic_update(critic, batch, gae, critic_adam, config.alpha);
                critic = std::move(next_critic);
                if (e == 0) critic_loss = loss;
            }

            const auto episodes = collector.drain_completed_episodes();
            if (!episodes.empty()) {
                double sum = 0.0;
                for (const auto& [ts, ret] : episodes) sum += ret;
                last_mean_return = sum / static_cast<double>(episodes.size());
                record.episode_returns.insert(record.episode_returns.end(), episodes.begin(),
                                              episodes.end());
            }

            double logp_sum = 0.0;
            for (double lp : batch.log_probs) logp_sum += lp;

            log.iteration = k;
            log.timestep = (k + 1) * config.T;
            log.mean_episode_return = last_mean_return;
            log.mean_action_log_prob = logp_sum / static_cast<double>(batch.size());
            log.critic_loss = critic_loss;
            log.direction_norm = report.direction_norm;
            log.dot_with_grad = report.dot_with_grad;
            log.sm_denominator = report.sm_denominator.value_or(kNaN);
            log.cg_iterations = report.cg_iterations.value_or(0);
            log.cg_residual = report.cg_residual.value_or(0.0);
            log.actor_ms = actor_ms;
            log.wall_ms = ms_since(iter_start);
            record.iterations.push_back(log);
            record.total_actor_ms += actor_ms;
            record.total_actor_updates +=
                config.optimizer_id == "smac" ? (config.T + update_batch - 1) / update_batch : 1;

            if (!config.trajectory_csv.empty()) {
                for (std::size_t t = 0; t < batch.size(); ++t) {
                    trajectory.push_back(TransitionRecord{static_cast<int>(k * config.T + t),
                                                          batch.states[t], batch.actions[t],
                                                          batch.rewards[t], batch.dones[t] != 0});
                }
            }
            if (config.checkpoint_interval > 0 && (k + 1) % config.checkpoint_interval == 0) {
                std::filesystem::create_directories(config.checkpoint_dir);
                write_checkpoint(config.checkpoint_dir + "/checkpoint_" + std::to_string(k + 1) + ".json",
                                 policy->params(), critic, critic_adam, k + 1);
            }
        }

        if (!config.trajectory_csv.empty()) write_trajectory_csv(config.trajectory_csv, trajectory);

        // 100-bin curves over the per-iteration series, then the standard
        // exponential smoothing.
        std::vector<std::pair<double, double>> return_points, logprob_points;
        for (const IterationLog& l : record.iterations) {
            return_points.emplace_back(static_cast<double>(l.timestep), l.mean_episode_return);
            logprob_points.emplace_back(static_cast<double>(l.timestep), l.mean_action_log_prob);
        }
        const auto binned_ret = bin_curve(return_points, 100);
        const auto binned_lp = bin_curve(logprob_points, 100);
        for (const auto& [c, v] : binned_ret) {
            record.bin_centers.push_back(c);
            record.binned_return.push_back(v);
        }
        for (const auto& [c, v] : binned_lp) record.binned_logprob.push_back(v);
        record.smoothed_return = ewm_smooth(record.binned_return, 0.1);
        record.smoothed_logprob = ewm_smooth(record.binned_logprob, 0.1);
        record.final_return = record.smoothed_return.back();
    } catch (const std::exception& e) {
        record.failed = true;
        record.error = e.what();
    }
    record.total_wall_ms = ms_since(run_start);
    return record;
}

std::string mlp_to_json(const Mlp& net) {
    json j;
    j["spec"] = {{"input_dim", net.spec().input_dim},
                 {"output_dim", net.spec().output_dim},
                 {"hidden", net.spec().hidden}};
    j["params"] = net.params();
    return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
    const json j = json::parse(text);
    MlpSpec spec;
    spec.input_dim = j.at("spec").at("input_dim").get<int>();
    spec.output_dim = j.at("spec").at("output_dim").get<int>();
    spec.hidden = j.at("spec").at("hidden").get<std::vector<int>>();
    Rng rng(0);
    Mlp net = Mlp::init(spec, rng);
    net.set_params(j.at("params").get<Vec>());
    return net;
}

void write_checkpoint(const std::string& path, const Vec& actor_params, const Mlp& critic,
                      const AdamState& critic_adam, long iteration) {
    json j;
    j["iteration"] = iteration;
    j["actor_params"] = actor_params;
    j["critic"] = json::parse(mlp_to_json(critic));
    j["critic_adam"] = {{"m", critic_adam.m},   {"v", critic_adam.v},       {"t", critic_adam.t},
                        {"beta1", critic_adam.beta1}, {"beta2", critic_adam.beta2}, {"eps", critic_adam.eps}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_checkpoint: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace smac
