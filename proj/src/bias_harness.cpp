#include "biaslab/bias_harness.hpp"

#include "biaslab/csv.hpp"

#include <ostream>
#include <stdexcept>

namespace biaslab {

BiasRecord BiasRecord::make(std::uint64_t step, double estimated, double truth, std::size_t n) {
    return BiasRecord{step, estimated, truth, estimated - truth, n};
}

double estimate_true_q(const NetworkParams& policy, const EnvSpec& env, const Matrix& states,
                       const Matrix& actions, double gamma, int horizon, std::mt19937_64& rng) {
    if (states.cols() == 0 || states.cols() != actions.cols()) {
        throw std::invalid_argument("estimate_true_q needs matching, non-empty state and action batches");
    }
    if (horizon < 1) {
        throw std::invalid_argument("rollout horizon must be at least 1");
    }
    const Eigen::Index n = states.cols();
    std::vector<Pendulum> envs;
    envs.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        envs.emplace_back(env, rng());
        envs.back().set_state(Pendulum::state_from_observation(states.col(i)));
    }

    Vector returns = Vector::Zero(n);
    Matrix current_actions = actions;
    Matrix observations(env.observation_width, n);
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const StepResult r = envs[static_cast<std::size_t>(i)].step(current_actions.col(i));
            returns(i) += discount * r.reward;
            observations.col(i) = r.observation;
        }
        discount *= gamma;
        if (t + 1 < horizon) {
            current_actions = forward(policy, observations);
        }
    }
    return returns.mean();
}

double estimate_critic_q(const NetworkParams& critic, const Matrix& states, const Matrix& actions) {
    return forward(critic, concat_rows(states, actions)).mean();
}

BiasRecord measure_bias_once(const Agent& agent, std::size_t n, int horizon, std::uint64_t step,
                             std::mt19937_64& rng) {
    if (n == 0) {
        throw std::invalid_argument("bias measurement needs at least one sample");
    }
    if (agent.replay().empty()) {
        throw std::logic_error("replay buffer is empty; nothing to measure");
    }
    const Batch pairs = agent.replay().sample(n, rng);
    const double estimated = estimate_critic_q(agent.critics().front(), pairs.states, pairs.actions);
    const double truth = estimate_true_q(agent.actor(), agent.env_spec(), pairs.states, pairs.actions,
                                         agent.env_spec().gamma, horizon, rng);
    return BiasRecord::make(step, estimated, truth, n);
}

BiasRun train_with_bias(Agent& agent, Pendulum& env, const TrainSettings& train_settings,
                        const BiasSettings& bias_settings, std::mt19937_64& bias_rng) {
    if (bias_settings.cadence == 0) {
        throw std::invalid_argument("bias cadence must be at least 1");
    }
    BiasRun run;
    auto hook = [&](std::uint64_t step, Agent& a) {
        if (step % bias_settings.cadence == 0) {
            run.bias.push_back(measure_bias_once(a, bias_settings.samples, bias_settings.horizon, step, bias_rng));
        }
    };
    run.run_log = train(agent, env, train_settings, hook);
    return run;
}

void write_bias_log(std::ostream& os, const std::vector<BiasRecord>& records) {
    os << "step,estimated_q,true_q,bias,n\n";
    for (const auto& r : records) {
        os << r.step << ',' << format_real(r.estimated_q_mean) << ',' << format_real(r.true_q_mean) << ','
           << format_real(r.bias) << ',' << r.n_samples << '\n';
    }
}

}  // namespace biaslab
