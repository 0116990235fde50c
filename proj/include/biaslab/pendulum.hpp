#pragma once

// Torque-limited inverted pendulum with a reward-noise knob.
//
// Angle 0 is upright. Each step applies a torque in [-2, 2] for 0.05 s with
// semi-implicit integration. The emitted reward is the negated quadratic
// cost plus reward_noise * N(0, 1); the dynamics themselves stay
// deterministic.

#include "biaslab/network.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace biaslab {

struct EnvSpec {
    std::string name = "pendulum";
    Eigen::Index observation_width = 3;
    Eigen::Index action_width = 1;
    Vector action_low = Vector::Constant(1, -2.0);
    Vector action_high = Vector::Constant(1, 2.0);
    int max_episode_steps = 200;
    double reward_noise = 0.0;
    double gamma = 0.99;

    static EnvSpec pendulum(double reward_noise = 0.0, int max_episode_steps = 200, double gamma = 0.99);

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

struct PendulumState {
    double angle = 0.0;     // radians, wrapped to (-pi, pi]
    double velocity = 0.0;  // radians / s, within [-8, 8]
};

struct StepResult {
    Vector observation;
    double reward = 0.0;       // base reward plus noise
    double base_reward = 0.0;  // noise-free part
    bool terminal = false;     // episode over (time limit)
    bool absorbing = false;    // bootstrapping must stop; never true for the pendulum
};

double wrap_angle(double angle) noexcept;

class Pendulum {
public:
    static constexpr double kGravity = 10.0;
    static constexpr double kMass = 1.0;
    static constexpr double kLength = 1.0;
    static constexpr double kDt = 0.05;
    static constexpr double kMaxSpeed = 8.0;
    static constexpr double kMaxTorque = 2.0;

    Pendulum(EnvSpec spec, std::uint64_t seed);

    /// Random start: angle uniform on (-pi, pi], velocity uniform on [-1, 1].
    Vector reset();
    /// Reseeds the environment's generator, then resets.
    Vector reset(std::uint64_t seed);

    /// Throws std::invalid_argument on a non-finite or wrongly sized action.
    StepResult step(const Vector& action);

    /// Injects an arbitrary physical state (used by Monte Carlo rollouts).
    /// The step counter is left untouched.
    void set_state(PendulumState state);
    PendulumState state() const noexcept { return state_; }
    Vector observation() const;
    int steps() const noexcept { return steps_; }
    const EnvSpec& spec() const noexcept { return spec_; }

    static double base_reward(PendulumState state, double torque) noexcept;
    static PendulumState state_from_observation(const Vector& observation);

private:
    EnvSpec spec_;
    std::mt19937_64 rng_;
    PendulumState state_{};
    int steps_ = 0;
};

}  // namespace biaslab
