#pragma once

// Estimated-versus-true Q-value measurement. True values come from Monte
// Carlo rollouts of the current deterministic policy from replayed
// state-action pairs; estimates come from the first critic.

#include "biaslab/agents.hpp"
#include "biaslab/network.hpp"
#include "biaslab/pendulum.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace biaslab {

struct BiasRecord {
    std::uint64_t step = 0;
    double estimated_q_mean = 0.0;
    double true_q_mean = 0.0;
    double bias = 0.0;  // estimated_q_mean - true_q_mean
    std::size_t n_samples = 0;

    static BiasRecord make(std::uint64_t step, double estimated, double truth, std::size_t n);
};

struct BiasSettings {
    std::size_t samples = 256;
    std::uint64_t cadence = 5000;
    int horizon = 1000;
};

/// Mean over the columns of (states, actions) of sum_{i<horizon} gamma^i r_i,
/// where the first action is the given one and later actions come from
/// `policy`. Episode time limits are ignored; rollouts run the full horizon.
/// Reward noise, if any, is drawn from generators seeded off `rng`.
double estimate_true_q(const NetworkParams& policy, const EnvSpec& env, const Matrix& states,
                       const Matrix& actions, double gamma, int horizon, std::mt19937_64& rng);

/// Mean first-critic value over the given pairs.
double estimate_critic_q(const NetworkParams& critic, const Matrix& states, const Matrix& actions);

/// Draws n pairs uniformly from the agent's replay buffer and compares the
/// first critic against Monte Carlo returns. Throws std::logic_error when
/// the replay buffer is empty.
BiasRecord measure_bias_once(const Agent& agent, std::size_t n, int horizon, std::uint64_t step,
                             std::mt19937_64& rng);

/// Trains like train() while taking a BiasRecord every `cadence` steps.
struct BiasRun {
    std::vector<RunRecord> run_log;
    std::vector<BiasRecord> bias;
};

BiasRun train_with_bias(Agent& agent, Pendulum& env, const TrainSettings& train_settings,
                        const BiasSettings& bias_settings, std::mt19937_64& bias_rng);

void write_bias_log(std::ostream& os, const std::vector<BiasRecord>& records);

}  // namespace biaslab
