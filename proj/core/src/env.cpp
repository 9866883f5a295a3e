#include "smac/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace smac {

namespace {

constexpr double kPi = 3.14159265358979323846;

int require_discrete_action(const Action& a, int n, const char* env_id) {
    const int* idx = std::get_if<int>(&a);
    if (!idx) throw std::invalid_argument(std::string(env_id) + ": discrete action expected");
    if (*idx < 0 || *idx >= n) throw std::invalid_argument(std::string(env_id) + ": action out of range");
    return *idx;
}

double wrap(double x, double lo, double hi) {
    const double width = hi - lo;
    while (x > hi) x -= width;
    while (x < lo) x += width;
    return x;
}

double angle_normalize(double x) { return wrap(x, -kPi, kPi); }

class CartpoleEnv final : public Env {
public:
    Vec reset(Rng& rng) override {
        for (double& v : state_) v = rng.uniform(-0.05, 0.05);
        step_count_ = 0;
        alive_ = true;
        return observation();
    }

    StepResult step(const Action& action) override {
        if (!alive_) throw std::logic_error("cartpole: step before reset or after episode end");
        const int a = require_discrete_action(action, 2, "cartpole");
        const double force = a == 1 ? kForceMag : -kForceMag;
        const double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];

        const double cos_t = std::cos(theta);
        const double sin_t = std::sin(theta);
        const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
        const double theta_acc =
            (kGravity * sin_t - cos_t * temp) / (kLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
        const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

        // Euler step: positions advance with the old velocities.
        state_[0] = x + kTau * x_dot;
        state_[1] = x_dot + kTau * x_acc;
        state_[2] = theta + kTau * theta_dot;
        state_[3] = theta_dot + kTau * theta_acc;
        ++step_count_;

        StepResult res;
        res.observation = observation();
        res.reward = 1.0;
        res.terminated = std::abs(state_[0]) > kXThreshold || std::abs(state_[2]) > kThetaThreshold;
        res.truncated = !res.terminated && step_count_ >= kHorizon;
        alive_ = !res.done();
        return res;
    }

    int obs_dim() const override { return 4; }
    ActionSpace action_space() const override { return {ActionSpace::Kind::discrete, 2, 0, 0.0, 0.0}; }
    std::string id() const override { return "cartpole"; }

private:
    static constexpr double kGravity = 9.8;
    static constexpr double kMassCart = 1.0;
    static constexpr double kMassPole = 0.1;
    static constexpr double kTotalMass = kMassCart + kMassPole;
    static constexpr double kLength = 0.5;  // half the pole length
    static constexpr double kPoleMassLength = kMassPole * kLength;
    static constexpr double kForceMag = 10.0;
    static constexpr double kTau = 0.02;
    static constexpr double kXThreshold = 2.4;
    static constexpr double kThetaThreshold = 12.0 * 2.0 * kPi / 360.0;

    std::array<double, 4> state_{};  // x, x_dot, theta, theta_dot
    bool alive_ = false;

    Vec observation() const { return {state_[0], state_[1], state_[2], state_[3]}; }
};

class AcrobotEnv final : public Env {
public:
    Vec reset(Rng& rng) override {
        for (double& v : state_) v = rng.uniform(-0.1, 0.1);
        step_count_ = 0;
        alive_ = true;
        return observation();
    }

    StepResult step(const Action& action) override {
        if (!alive_) throw std::logic_error("acrobot: step before reset or after episode end");
        const int a = require_discrete_action(action, 3, "acrobot");
        const double torque = static_cast<double>(a - 1);  // {-1, 0, +1}

        // One RK4 step of the two-link dynamics with the torque appended.
        std::array<double, 5> s{state_[0], state_[1], state_[2], state_[3], torque};
        const auto k1 = dsdt(s);
        const auto k2 = dsdt(advanced(s, k1, kDt / 2.0));
        const auto k3 = dsdt(advanced(s, k2, kDt / 2.0));
        const auto k4 = dsdt(advanced(s, k3, kDt));
        for (int i = 0; i < 4; ++i)
            state_[i] = s[i] + kDt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        state_[0] = wrap(state_[0], -kPi, kPi);
        state_[1] = wrap(state_[1], -kPi, kPi);
        state_[2] = std::clamp(state_[2], -kMaxVel1, kMaxVel1);
        state_[3] = std::clamp(state_[3], -kMaxVel2, kMaxVel2);
        ++step_count_;

        StepResult res;
        res.observation = observation();
        res.terminated = -std::cos(state_[0]) - std::cos(state_[1] + state_[0]) > 1.0;
        res.reward = res.terminated ? 0.0 : -1.0;
        res.truncated = !res.terminated && step_count_ >= kHorizon;
        alive_ = !res.done();
        return res;
    }

    int obs_dim() const override { return 6; }
    ActionSpace action_space() const override { return {ActionSpace::Kind::discrete, 3, 0, 0.0, 0.0}; }
    std::string id() const override { return "acrobot"; }

private:
    static constexpr double kDt = 0.2;
    static constexpr double kLink1 = 1.0, kMass1 = 1.0, kMass2 = 1.0;
    static constexpr double kCom1 = 0.5, kCom2 = 0.5;
    static constexpr double kMoi = 1.0;
    static constexpr double kGravity = 9.8;
    static constexpr double kMaxVel1 = 4.0 * kPi;
    static constexpr double kMaxVel2 = 9.0 * kPi;

    std::array<double, 4> state_{};  // theta1, theta2, dtheta1, dtheta2
    bool alive_ = false;

    static std::array<double, 5> advanced(const std::array<double, 5>& s, const std::array<double, 4>& k,
                                          double h) {
        return {s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3], s[4]};
    }

    static std::array<double, 4> dsdt(const std::array<double, 5>& s) {
        const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3], a = s[4];
        const double d1 = kMass1 * kCom1 * kCom1 +
                          kMass2 * (kLink1 * kLink1 + kCom2 * kCom2 + 2.0 * kLink1 * kCom2 * std::cos(theta2)) +
                          2.0 * kMoi;
        const double d2 = kMass2 * (kCom2 * kCom2 + kLink1 * kCom2 * std::cos(theta2)) + kMoi;
        const double phi2 = kMass2 * kCom2 * kGravity * std::cos(theta1 + theta2 - kPi / 2.0);
        const double phi1 = -kMass2 * kLink1 * kCom2 * dtheta2 * dtheta2 * std::sin(theta2) -
                            2.0 * kMass2 * kLink1 * kCom2 * dtheta2 * dtheta1 * std::sin(theta2) +
                            (kMass1 * kCom1 + kMass2 * kLink1) * kGravity * std::cos(theta1 - kPi / 2.0) + phi2;
        const double ddtheta2 =
            (a + d2 / d1 * phi1 - kMass2 * kLink1 * kCom2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
            (kMass2 * kCom2 * kCom2 + kMoi - d2 * d2 / d1);
        const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        return {dtheta1, dtheta2, ddtheta1, ddtheta2};
    }

    Vec observation() const {
        return {std::cos(state_[0]), std::sin(state_[0]), std::cos(state_[1]),
                std::sin(state_[1]), state_[2],           state_[3]};
    }
};

class PendulumEnv final : public Env {
public:
    Vec reset(Rng& rng) override {
        theta_ = rng.uniform(-kPi, kPi);
        theta_dot_ = rng.uniform(-1.0, 1.0);
        step_count_ = 0;
        alive_ = true;
        return observation();
    }

    StepResult step(const Action& action) override {
        if (!alive_) throw std::logic_error("pendulum: step before reset or after episode end");
        const Vec* torque_vec = std::get_if<Vec>(&action);
        if (!torque_vec || torque_vec->size() != 1)
            throw std::invalid_argument("pendulum: 1-dimensional continuous action expected");
        const double u = (*torque_vec)[0];
        if (!(u >= -kMaxTorque && u <= kMaxTorque))
            throw std::invalid_argument("pendulum: torque outside [-2, 2]");

        const double th = angle_normalize(theta_);
        const double cost = th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

        double new_dot = theta_dot_ + (3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                                       3.0 / (kMass * kLength * kLength) * u) *
                                          kDt;
        new_dot = std::clamp(new_dot, -kMaxSpeed, kMaxSpeed);
        theta_ = theta_ + new_dot * kDt;
        theta_dot_ = new_dot;
        ++step_count_;

        StepResult res;
        res.observation = observation();
        res.reward = -cost;
        res.terminated = false;  // only the horizon ends an episode
        res.truncated = step_count_ >= kHorizon;
        alive_ = !res.done();
        return res;
    }

    int obs_dim() const override { return 3; }
    ActionSpace action_space() const override {
        return {ActionSpace::Kind::continuous, 0, 1, -kMaxTorque, kMaxTorque};
    }
    std::string id() const override { return "pendulum"; }

private:
    static constexpr double kGravity = 10.0;
    static constexpr double kMass = 1.0;
    static constexpr double kLength = 1.0;
    static constexpr double kDt = 0.05;
    static constexpr double kMaxSpeed = 8.0;
    static constexpr double kMaxTorque = 2.0;

    double theta_ = 0.0;
    double theta_dot_ = 0.0;
    bool alive_ = false;

    Vec observation() const { return {std::cos(theta_), std::sin(theta_), theta_dot_}; }
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& id) {
    if (id == "cartpole") return std::make_unique<CartpoleEnv>();
    if (id == "acrobot") return std::make_unique<AcrobotEnv>();
    if (id == "pendulum") return std::make_unique<PendulumEnv>();
    throw std::invalid_argument("make_env: unknown environment id '" + id + "'");
}

void write_trajectory_csv(const std::string& path, const std::vector<TransitionRecord>& trajectory) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "t";
    if (!trajectory.empty()) {
        for (std::size_t i = 0; i < trajectory.front().observation.size(); ++i) out << ",obs" << i;
    }
    out << ",action,reward,done\n";
    out.precision(17);
    for (const TransitionRecord& tr : trajectory) {
        out << tr.t;
        for (double o : tr.observation) out << ',' << o;
        if (const int* a = std::get_if<int>(&tr.action)) {
            out << ',' << *a;
        } else {
            const Vec& av = std::get<Vec>(tr.action);
            out << ',';
            for (std::size_t i = 0; i < av.size(); ++i) out << (i ? ";" : "") << av[i];
        }
        out << ',' << tr.reward << ',' << (tr.done ? 1 : 0) << '\n';
    }
}

}  // namespace smac
