#include "biaslab/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace biaslab {

double wrap_angle(double angle) noexcept {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    double a = std::fmod(angle + std::numbers::pi, kTwoPi);
    if (a < 0.0) {
        a += kTwoPi;
    }
    // a is in [0, 2pi); shift to [-pi, pi) and fold -pi onto pi.
    a -= std::numbers::pi;
    return a <= -std::numbers::pi ? std::numbers::pi : a;
}

EnvSpec EnvSpec::pendulum(double reward_noise, int max_episode_steps, double gamma) {
    EnvSpec spec;
    spec.reward_noise = reward_noise;
    spec.max_episode_steps = max_episode_steps;
    spec.gamma = gamma;
    spec.validate();
    return spec;
}

void EnvSpec::validate() const {
    if (name != "pendulum") {
        throw std::invalid_argument("unknown environment '" + name + "'");
    }
    if (observation_width != 3 || action_width != 1 || action_low.size() != 1 || action_high.size() != 1) {
        throw std::invalid_argument("pendulum has 3 observation and 1 action dimensions");
    }
    if (!(action_low(0) < action_high(0))) {
        throw std::invalid_argument("action box needs low < high");
    }
    if (max_episode_steps <= 0) {
        throw std::invalid_argument("max_episode_steps must be positive");
    }
    if (!(reward_noise >= 0.0) || !std::isfinite(reward_noise)) {
        throw std::invalid_argument("reward_noise must be a finite non-negative real");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("gamma must lie in [0, 1)");
    }
}

Pendulum::Pendulum(EnvSpec spec, std::uint64_t seed) : spec_(std::move(spec)), rng_(seed) {
    spec_.validate();
}

Vector Pendulum::reset() {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> velocity(-1.0, 1.0);
    state_.angle = wrap_angle(angle(rng_));
    state_.velocity = velocity(rng_);
    steps_ = 0;
    return observation();
}

Vector Pendulum::reset(std::uint64_t seed) {
    rng_.seed(seed);
    return reset();
}

double Pendulum::base_reward(PendulumState state, double torque) noexcept {
    const double angle = wrap_angle(state.angle);
    return -(angle * angle + 0.1 * state.velocity * state.velocity + 0.001 * torque * torque);
}

StepResult Pendulum::step(const Vector& action) {
    if (action.size() != 1 || !std::isfinite(action(0))) {
        throw std::invalid_argument("pendulum action must be one finite torque");
    }
    const double torque = std::clamp(action(0), spec_.action_low(0), spec_.action_high(0));
    StepResult out;
    out.base_reward = base_reward(state_, torque);
    out.reward = out.base_reward;
    if (spec_.reward_noise > 0.0) {
        std::normal_distribution<double> noise(0.0, 1.0);
        out.reward += spec_.reward_noise * noise(rng_);
    }

    const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(state_.angle) +
                         3.0 / (kMass * kLength * kLength) * torque;
    state_.velocity = std::clamp(state_.velocity + accel * kDt, -kMaxSpeed, kMaxSpeed);
    state_.angle = wrap_angle(state_.angle + state_.velocity * kDt);
    ++steps_;

    out.observation = observation();
    out.terminal = steps_ >= spec_.max_episode_steps;
    out.absorbing = false;
    return out;
}

void Pendulum::set_state(PendulumState state) {
    if (!std::isfinite(state.angle) || !std::isfinite(state.velocity)) {
        throw std::invalid_argument("pendulum state must be finite");
    }
    state_.angle = wrap_angle(state.angle);
    state_.velocity = std::clamp(state.velocity, -kMaxSpeed, kMaxSpeed);
}

Vector Pendulum::observation() const {
    Vector obs(3);
    obs << std::cos(state_.angle), std::sin(state_.angle), state_.velocity;
    return obs;
}

PendulumState Pendulum::state_from_observation(const Vector& observation) {
    if (observation.size() != 3) {
        throw std::invalid_argument("pendulum observation has 3 entries");
    }
    return PendulumState{std::atan2(observation(1), observation(0)), observation(2)};
}

}  // namespace biaslab
