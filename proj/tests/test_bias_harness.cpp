#include "biaslab/bias_harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace biaslab;

namespace {

NetworkParams zero_torque_policy(const EnvSpec& env) {
    std::mt19937_64 rng(0);
    NetworkParams p = make_bounded_network({3, 8, 1}, env.action_low, env.action_high, rng);
    for (auto& l : p.layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
    return p;
}

struct Pairs {
    Matrix states;
    Matrix actions;
};

Pairs random_pairs(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-3.0, 3.0), vel(-4.0, 4.0), torque(-2.0, 2.0);
    Pairs p{Matrix(3, n), Matrix(1, n)};
    for (int i = 0; i < n; ++i) {
        const double a = angle(rng);
        p.states.col(i) << std::cos(a), std::sin(a), vel(rng);
        p.actions(0, i) = torque(rng);
    }
    return p;
}

AgentConfig tiny_config() {
    AgentConfig c;
    c.hidden = 8;
    c.batch_size = 8;
    c.warmup_steps = 100;
    c.replay_capacity = 100000;
    return c;
}

}  // namespace

TEST(TrueQ, ZeroDiscountIsImmediateReward) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    std::mt19937_64 rng(1);
    const Pairs p = random_pairs(50, rng);
    std::mt19937_64 rollout(2);
    const double q = estimate_true_q(zero_torque_policy(env), env, p.states, p.actions, 0.0, 20, rollout);
    double expected = 0.0;
    for (int i = 0; i < 50; ++i) {
        expected += Pendulum::base_reward(Pendulum::state_from_observation(p.states.col(i)), p.actions(0, i));
    }
    EXPECT_NEAR(q, expected / 50.0, 1e-12);
}

TEST(TrueQ, EquilibriumWithZeroTorqueIsZero) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    Matrix s(3, 4);
    s.colwise() = (Vector(3) << 1.0, 0.0, 0.0).finished();
    std::mt19937_64 rng(3);
    EXPECT_EQ(estimate_true_q(zero_torque_policy(env), env, s, Matrix::Zero(1, 4), 0.99, 1000, rng), 0.0);
}

TEST(TrueQ, DiscountedSumByHand) {
    // Independent rollout with an explicit loop over one start pair.
    const EnvSpec env = EnvSpec::pendulum(0.0);
    std::mt19937_64 init(4);
    const NetworkParams policy = make_bounded_network({3, 8, 1}, env.action_low, env.action_high, init);
    Vector s(3);
    s << std::cos(2.0), std::sin(2.0), 0.5;
    const double gamma = 0.9;
    Pendulum p(env, 0);
    p.set_state({2.0, 0.5});
    double expected = 0.0, discount = 1.0;
    Vector a = Vector::Constant(1, 1.25);
    for (int t = 0; t < 60; ++t) {
        const StepResult r = p.step(a);
        expected += discount * r.reward;
        discount *= gamma;
        a = forward(policy, r.observation);
    }
    std::mt19937_64 rng(5);
    const double got = estimate_true_q(policy, env, s, Matrix::Constant(1, 1, 1.25), gamma, 60, rng);
    EXPECT_NEAR(got, expected, 1e-12);
}

TEST(TrueQ, HorizonDoublingChangesLittle) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    std::mt19937_64 init(6);
    const NetworkParams policy = make_bounded_network({3, 16, 1}, env.action_low, env.action_high, init);
    const Pairs p = random_pairs(64, init);
    std::mt19937_64 r1(7), r2(7);
    const double q1000 = estimate_true_q(policy, env, p.states, p.actions, 0.99, 1000, r1);
    const double q2000 = estimate_true_q(policy, env, p.states, p.actions, 0.99, 2000, r2);
    EXPECT_LT(std::abs(q2000 - q1000), 1e-2 * std::abs(q2000));
}

TEST(TrueQ, NoiselessIsDeterministic) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    std::mt19937_64 init(8);
    const NetworkParams policy = make_bounded_network({3, 16, 1}, env.action_low, env.action_high, init);
    const Pairs p = random_pairs(16, init);
    std::mt19937_64 r1(1), r2(2);
    EXPECT_EQ(estimate_true_q(policy, env, p.states, p.actions, 0.99, 200, r1),
              estimate_true_q(policy, env, p.states, p.actions, 0.99, 200, r2));
}

TEST(TrueQ, NoisyRewardsAverageOut) {
    const EnvSpec quiet = EnvSpec::pendulum(0.0);
    const EnvSpec noisy = EnvSpec::pendulum(1.0);
    std::mt19937_64 init(9);
    const NetworkParams policy = make_bounded_network({3, 16, 1}, quiet.action_low, quiet.action_high, init);
    const Pairs p = random_pairs(2000, init);
    std::mt19937_64 r1(1), r2(2);
    const double a = estimate_true_q(policy, quiet, p.states, p.actions, 0.9, 100, r1);
    const double b = estimate_true_q(policy, noisy, p.states, p.actions, 0.9, 100, r2);
    // Noise contributes sum gamma^t N(0,1): sd sqrt(1 / (1 - 0.81)) per pair.
    const double se = std::sqrt(1.0 / (1.0 - 0.81)) / std::sqrt(2000.0);
    EXPECT_LE(std::abs(a - b), 4.0 * se);
}

TEST(Measure, ZeroCriticGivesNegatedTruth) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    Agent agent(env, tiny_config(), TargetRule::clipped_double(), SeedStreams(10));
    agent.critics()[0].layers.back().weight.setZero();
    agent.critics()[0].layers.back().bias.setZero();
    Pendulum pend(env, 10);
    Vector obs = pend.reset();
    for (int i = 0; i < 50; ++i) {
        const Vector a = agent.select_action(obs, true);
        const StepResult r = pend.step(a);
        agent.store({obs, a, r.reward, r.observation, false});
        obs = r.observation;
    }
    std::mt19937_64 rng(11);
    const BiasRecord rec = measure_bias_once(agent, 32, 200, 50, rng);
    EXPECT_EQ(rec.estimated_q_mean, 0.0);
    EXPECT_EQ(rec.bias, -rec.true_q_mean);
    EXPECT_LT(rec.true_q_mean, 0.0);
    EXPECT_EQ(rec.n_samples, 32u);
    EXPECT_EQ(rec.step, 50u);
}

TEST(Measure, EmptyReplayThrows) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    const Agent agent(env, tiny_config(), TargetRule::clipped_double(), SeedStreams(12));
    std::mt19937_64 rng(1);
    EXPECT_THROW(measure_bias_once(agent, 8, 10, 0, rng), std::logic_error);
}

TEST(Measure, CriticFittingOnFrozenPolicyShrinksBias) {
    const EnvSpec env = EnvSpec::pendulum(0.0, 200, 0.9);
    AgentConfig c = tiny_config();
    c.hidden = 64;
    c.batch_size = 64;
    c.target_noise = 0.0;
    c.critic_lr = 1e-3;
    Agent agent(env, c, TargetRule::ddpg(), SeedStreams(13));
    Pendulum pend(env, 13);
    Vector obs = pend.reset();
    for (int i = 0; i < 2000; ++i) {
        const Vector a = agent.select_action(obs, true);
        const StepResult r = pend.step(a);
        agent.store({obs, a, r.reward, r.observation, false});
        obs = r.terminal ? pend.reset() : r.observation;
    }
    std::mt19937_64 r0(14);
    const double before = std::abs(measure_bias_once(agent, 256, 150, 0, r0).bias);
    for (int i = 0; i < 4000; ++i) {
        agent.critic_update(agent.sample_batch(64));
        soft_update(agent.critic_targets()[0], agent.critics()[0], 0.05);
    }
    std::mt19937_64 r1(14);
    const double after = std::abs(measure_bias_once(agent, 256, 150, 0, r1).bias);
    EXPECT_LT(after, 0.5 * before) << "before " << before << " after " << after;
}

TEST(TrainWithBias, CadenceBookkeeping) {
    const EnvSpec env = EnvSpec::pendulum(1.0);
    const SeedStreams streams(15);
    Agent agent(env, tiny_config(), TargetRule::swt(BetaSchedule::make(30000)), streams);
    Pendulum pend(env, streams.stream("env")());
    TrainSettings ts;
    ts.total_steps = 30000;
    ts.eval_every = 5000;
    ts.eval_episodes = 1;
    BiasSettings bs;
    bs.samples = 1000;
    bs.cadence = 5000;
    bs.horizon = 50;
    std::mt19937_64 rng = streams.stream("bias");
    const BiasRun run = train_with_bias(agent, pend, ts, bs, rng);
    ASSERT_EQ(run.bias.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(run.bias[i].step, 5000u * (i + 1));
        EXPECT_EQ(run.bias[i].n_samples, 1000u);
        EXPECT_EQ(run.bias[i].bias, run.bias[i].estimated_q_mean - run.bias[i].true_q_mean);
    }
    EXPECT_EQ(run.run_log.size(), 6u);
}

TEST(TrainWithBias, SingleRecordWhenCadenceIsTotal) {
    const EnvSpec env = EnvSpec::pendulum(0.0);
    Agent agent(env, tiny_config(), TargetRule::tcd3(), SeedStreams(16));
    Pendulum pend(env, 16);
    TrainSettings ts;
    ts.total_steps = 300;
    ts.eval_every = 100;
    ts.eval_episodes = 1;
    BiasSettings bs;
    bs.samples = 16;
    bs.cadence = 300;
    bs.horizon = 20;
    std::mt19937_64 rng(1);
    const BiasRun run = train_with_bias(agent, pend, ts, bs, rng);
    ASSERT_EQ(run.bias.size(), 1u);
    EXPECT_EQ(run.bias[0].step, 300u);
}

TEST(BiasLog, Format) {
    std::ostringstream os;
    write_bias_log(os, {BiasRecord::make(10, -1.5, -1.0, 4)});
    EXPECT_EQ(os.str(), "step,estimated_q,true_q,bias,n\n10,-1.5,-1,-0.5,4\n");
}
