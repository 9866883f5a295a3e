#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "smac/trainer.hpp"

using namespace smac;

namespace {

AgentConfig tiny_config(const std::string& env_id, const std::string& opt) {
    AgentConfig c;
    c.env_id = env_id;
    c.optimizer_id = opt;
    c.T = 64;
    c.total_timesteps = 256;
    c.actor_hidden = {8};
    c.critic_hidden = {8};
    c.seed = 3;
    return c;
}

double median_wall(const RunRecord& r) {
    std::vector<double> w;
    for (const auto& l : r.iterations) w.push_back(l.wall_ms);
    std::sort(w.begin(), w.end());
    return w[w.size() / 2];
}

}  // namespace

TEST_CASE("config validation") {
    AgentConfig c = tiny_config("cartpole", "smac");
    CHECK_NOTHROW(c.validate());
    c.env_id = "lunar_lander";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_config("cartpole", "rmsprop");
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_config("cartpole", "smac");
    c.total_timesteps = 100;  // not a multiple of T=64
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_config("cartpole", "smac");
    c.eta = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = tiny_config("cartpole", "smac");
    c.gamma = 1.2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("collect_rollout: minimal window and bootstrap") {
    Rng rng(5);
    auto env = make_env("cartpole");
    CategoricalPolicy policy(Mlp::init(MlpSpec{4, 2, {8}}, rng), 2);
    Mlp critic = Mlp::init(MlpSpec{4, 1, {8}}, rng);
    const RolloutBatch batch = collect_rollout(policy, critic, *env, rng, 1);
    CHECK(batch.size() == 1);
    CHECK(batch.values.size() == 2);
    CHECK(batch.rewards[0] == 1.0);
}

TEST_CASE("collect_rollout: deterministic and log-prob consistent") {
    auto run_once = [](RolloutBatch& out) {
        Rng rng(17);
        auto env = make_env("cartpole");
        CategoricalPolicy policy(Mlp::init(MlpSpec{4, 2, {8}}, rng), 2);
        Mlp critic = Mlp::init(MlpSpec{4, 1, {8}}, rng);
        out = collect_rollout(policy, critic, *env, rng, 128);
        for (std::size_t t = 0; t < out.size(); ++t) {
            const double lp = policy.log_prob_of(out.states[t], out.actions[t]);
            CHECK(std::abs(lp - out.log_probs[t]) <= 1e-12);
        }
    };
    RolloutBatch a, b;
    run_once(a);
    run_once(b);
    CHECK(a.rewards == b.rewards);
    CHECK(a.log_probs == b.log_probs);
    CHECK(a.values == b.values);
}

TEST_CASE("collector: episodes spanning windows accumulate full returns") {
    Rng rng(19);
    auto env = make_env("pendulum");
    GaussianPolicy policy(Mlp::init(MlpSpec{3, 1, {8}}, rng), 1);
    Mlp critic = Mlp::init(MlpSpec{3, 1, {8}}, rng);
    RolloutCollector collector(*env, policy, critic, rng);
    // Pendulum episodes are exactly 1000 steps; four 500-step windows hold
    // exactly two completed episodes.
    double episodes = 0;
    for (int w = 0; w < 4; ++w) {
        collector.collect(500);
        episodes += collector.drain_completed_episodes().size();
    }
    CHECK(episodes == 2);
}

TEST_CASE("critic_update: perfect critic has zero loss and does not move") {
    Rng rng(23);
    Mlp critic = Mlp::init(MlpSpec{2, 1, {4}}, rng);
    critic.set_params(zeros(critic.params().size()));  // V identically 0
    RolloutBatch batch;
    for (int t = 0; t < 4; ++t) {
        batch.states.push_back({0.1 * t, -0.1 * t});
        batch.actions.push_back(Action{0});
        batch.rewards.push_back(0.0);
        batch.dones.push_back(0);
        batch.values.push_back(0.0);
        batch.log_probs.push_back(0.0);
    }
    batch.values.push_back(0.0);
    GaeOutput gae;
    gae.deltas = gae.advantages = {0, 0, 0, 0};
    gae.returns = {0, 0, 0, 0};  // targets equal V everywhere
    AdamState adam = AdamState::fresh(critic.params().size());
    const auto [next, loss] = critic_update(critic, batch, gae, adam, 1e-3);
    CHECK(loss == 0.0);
    CHECK(next.params() == critic.params());
}

TEST_CASE("critic_update: unit residual on a zero critic gives loss 1") {
    Rng rng(29);
    Mlp critic = Mlp::init(MlpSpec{2, 1, {4}}, rng);
    critic.set_params(zeros(critic.params().size()));
    RolloutBatch batch;
    for (int t = 0; t < 3; ++t) {
        batch.states.push_back({1.0, -1.0});
        batch.actions.push_back(Action{0});
        batch.rewards.push_back(0.0);
        batch.dones.push_back(0);
        batch.values.push_back(0.0);
        batch.log_probs.push_back(0.0);
    }
    batch.values.push_back(0.0);
    GaeOutput gae;
    gae.returns = {1.0, 1.0, 1.0};
    gae.advantages = gae.deltas = {1.0, 1.0, 1.0};
    AdamState adam = AdamState::fresh(critic.params().size());
    const auto [next, loss] = critic_update(critic, batch, gae, adam, 1e-3);
    CHECK(loss == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(next.params() != critic.params());
}

TEST_CASE("train: single iteration produces one log entry") {
    AgentConfig c = tiny_config("cartpole", "smac");
    c.total_timesteps = c.T;
    const RunRecord r = train(c);
    REQUIRE_FALSE(r.failed);
    CHECK(r.iterations.size() == 1);
    CHECK(r.iterations[0].timestep == c.T);
    CHECK(r.total_actor_updates == 1);
    CHECK(r.bin_centers.size() == 100);
    CHECK(r.smoothed_return.size() == 100);
}

TEST_CASE("train: bit-reproducible given the seed") {
    AgentConfig c = tiny_config("cartpole", "smac");
    const RunRecord a = train(c);
    const RunRecord b = train(c);
    REQUIRE_FALSE(a.failed);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i) {
        CHECK(a.iterations[i].mean_episode_return == b.iterations[i].mean_episode_return);
        CHECK(a.iterations[i].mean_action_log_prob == b.iterations[i].mean_action_log_prob);
        CHECK(a.iterations[i].critic_loss == b.iterations[i].critic_loss);
        CHECK(a.iterations[i].direction_norm == b.iterations[i].direction_norm);
    }
    CHECK(a.episode_returns == b.episode_returns);
}

TEST_CASE("train: every optimizer id runs and logs sane quantities") {
    for (const char* opt : {"smac", "sgd", "adam", "cg"}) {
        AgentConfig c = tiny_config("cartpole", opt);
        const RunRecord r = train(c);
        REQUIRE_FALSE(r.failed);
        for (const auto& l : r.iterations) {
            CHECK(l.mean_action_log_prob <= 0.0);  // discrete task
            CHECK(l.direction_norm >= 0.0);
            CHECK(std::isfinite(l.critic_loss));
            CHECK(l.score_g_hat * l.score_g_hat + 1e-12 >= l.score_trace);  // G^2 >= trace
        }
    }
}

TEST_CASE("train: per-sample mode counts T updates per iteration") {
    AgentConfig c = tiny_config("cartpole", "smac");
    c.batch_mode = BatchMode::per_sample;
    c.T = 50;
    c.total_timesteps = 100;
    const RunRecord r = train(c);
    REQUIRE_FALSE(r.failed);
    CHECK(r.total_actor_updates == 100);
}

TEST_CASE("train: smac with huge damping tracks sgd") {
    // eta_smac = eta_sgd * lambda makes the two updates agree to O(1/lambda).
    const double lambda = 1e10;
    AgentConfig sgd = tiny_config("cartpole", "sgd");
    sgd.eta = 7e-3;
    sgd.T = 100;
    sgd.total_timesteps = 500;
    AgentConfig smac = sgd;
    smac.optimizer_id = "smac";
    smac.lambda = lambda;
    smac.eta = sgd.eta * lambda;

    const RunRecord ra = train(sgd);
    const RunRecord rb = train(smac);
    REQUIRE_FALSE(ra.failed);
    REQUIRE_FALSE(rb.failed);
    REQUIRE(ra.iterations.size() == rb.iterations.size());
    for (std::size_t i = 0; i < ra.iterations.size(); ++i) {
        // Identical trajectories imply identical logged rollout statistics.
        CHECK(ra.iterations[i].mean_action_log_prob ==
              doctest::Approx(rb.iterations[i].mean_action_log_prob).epsilon(1e-6));
        CHECK(ra.iterations[i].critic_loss == doctest::Approx(rb.iterations[i].critic_loss).epsilon(1e-6));
    }
}

TEST_CASE("train: smac iteration cost stays within 2x of sgd") {
    // Same d and T; medians over a handful of iterations damp scheduler noise.
    AgentConfig sgd = tiny_config("cartpole", "sgd");
    sgd.actor_hidden = {64, 64};
    sgd.critic_hidden = {64, 64};
    sgd.T = 500;
    sgd.total_timesteps = 4000;
    AgentConfig smac = sgd;
    smac.optimizer_id = "smac";
    const RunRecord rs = train(sgd);
    const RunRecord rm = train(smac);
    REQUIRE_FALSE(rs.failed);
    REQUIRE_FALSE(rm.failed);
    CHECK(median_wall(rm) <= 2.0 * median_wall(rs));
}

TEST_CASE("train: structured failure record on divergence") {
    AgentConfig c = tiny_config("pendulum", "sgd");
    c.eta = 1e308;  // first step overflows the parameters to inf
    c.T = 50;
    c.total_timesteps = 500;
    const RunRecord r = train(c);
    CHECK(r.failed);
    CHECK_FALSE(r.error.empty());
}

TEST_CASE("checkpoints and mlp json round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "smac_ckpt_test";
    fs::remove_all(dir);

    AgentConfig c = tiny_config("cartpole", "smac");
    c.checkpoint_interval = 2;
    c.checkpoint_dir = dir.string();
    c.total_timesteps = 4 * c.T;
    const RunRecord r = train(c);
    REQUIRE_FALSE(r.failed);
    CHECK(fs::exists(dir / "checkpoint_2.json"));
    CHECK(fs::exists(dir / "checkpoint_4.json"));

    Rng rng(77);
    const Mlp net = Mlp::init(MlpSpec{3, 2, {5, 4}}, rng);
    const Mlp back = mlp_from_json(mlp_to_json(net));
    CHECK(back.params() == net.params());
    CHECK(back.spec().hidden == net.spec().hidden);
}

TEST_CASE("train: trajectory dump writes one row per step") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "smac_train_traj.csv").string();
    AgentConfig c = tiny_config("cartpole", "smac");
    c.T = 32;
    c.total_timesteps = 64;
    c.trajectory_csv = path;
    const RunRecord r = train(c);
    REQUIRE_FALSE(r.failed);
    std::ifstream in(path);
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 64);
}
