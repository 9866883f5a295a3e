#pragma once

#include <memory>
#include <string>

#include "smac/numeric.hpp"
#include "smac/policy.hpp"
#include "smac/rng.hpp"

namespace smac {

struct StepResult {
    Vec observation;
    double reward = 0.0;
    bool terminated = false;
    bool truncated = false;

    bool done() const { return terminated || truncated; }
};

// Either a discrete action set {0..n-1} or a box of continuous actions.
struct ActionSpace {
    enum class Kind { discrete, continuous } kind = Kind::discrete;
    int n = 0;           // discrete
    int dim = 0;         // continuous
    double low = 0.0;    // continuous bounds (same for every component)
    double high = 0.0;
};

// Episodic environment with a hard 1000-step horizon. Dynamics follow the
// standard published classic-control equations; trajectories are
// bit-deterministic given the seed and action sequence.
class Env {
public:
    static constexpr int kHorizon = 1000;

    virtual ~Env() = default;

    virtual Vec reset(Rng& rng) = 0;
    virtual StepResult step(const Action& action) = 0;

    virtual int obs_dim() const = 0;
    virtual ActionSpace action_space() const = 0;
    virtual std::string id() const = 0;

    int step_count() const { return step_count_; }

protected:
    int step_count_ = 0;
};

// ids: "cartpole", "acrobot", "pendulum"
std::unique_ptr<Env> make_env(const std::string& id);

// One recorded transition for optional trajectory dumps.
struct TransitionRecord {
    int t = 0;
    Vec observation;
    Action action;
    double reward = 0.0;
    bool done = false;
};

// CSV rows: t, obs..., action..., reward, done
void write_trajectory_csv(const std::string& path, const std::vector<TransitionRecord>& trajectory);

}  // namespace smac
