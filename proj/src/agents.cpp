#include "biaslab/agents.hpp"

#include "biaslab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace biaslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

Vector row_to_vector(const Matrix& m) {
    return m.row(0).transpose();
}

}  // namespace

BetaSchedule BetaSchedule::make(std::uint64_t horizon, double alpha, double beta0) {
    BetaSchedule s{beta0, beta0, alpha, horizon, 0};
    s.validate();
    return s;
}

void BetaSchedule::validate() const {
    require(beta0 >= 0.0 && beta0 <= 1.0, "beta0 must lie in [0, 1]");
    require(alpha >= 0.0 && alpha <= beta0, "alpha must lie in [0, beta0]");
    require(lower >= alpha && lower <= beta0, "schedule lower bound must lie in [alpha, beta0]");
    require(horizon >= 1, "schedule horizon must be at least 1");
    require(t <= horizon, "schedule step is past its horizon");
}

double swt_draw_beta(const BetaSchedule& schedule, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    return schedule.lower + (schedule.beta0 - schedule.lower) * u;
}

void swt_advance(BetaSchedule& schedule) {
    if (schedule.t >= schedule.horizon) {
        throw std::logic_error("beta schedule advanced past its horizon");
    }
    schedule.t += 1;
    if (schedule.t == schedule.horizon) {
        schedule.lower = schedule.alpha;
        return;
    }
    const double drop = (schedule.beta0 - schedule.alpha) * static_cast<double>(schedule.t) /
                        static_cast<double>(schedule.horizon);
    schedule.lower = std::max(schedule.alpha, schedule.beta0 - drop);
}

TargetRule TargetRule::ddpg() {
    return TargetRule{RuleKind::Ddpg, 0.0, 1, {}};
}

TargetRule TargetRule::clipped_double() {
    return TargetRule{RuleKind::ClippedDouble, 1.0, 1, {}};
}

TargetRule TargetRule::wd3(double beta) {
    TargetRule r{RuleKind::Wd3, beta, 1, {}};
    r.validate();
    return r;
}

TargetRule TargetRule::tadd(double beta, std::size_t k) {
    TargetRule r{RuleKind::Tadd, beta, k, {}};
    r.validate();
    return r;
}

TargetRule TargetRule::tcd3() {
    return TargetRule{RuleKind::Tcd3, kNaN, 1, {}};
}

TargetRule TargetRule::swt(BetaSchedule schedule) {
    schedule.validate();
    return TargetRule{RuleKind::Swt, schedule.beta0, 1, schedule};
}

void TargetRule::validate() const {
    if (kind == RuleKind::Wd3 || kind == RuleKind::Tadd) {
        require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    }
    if (kind == RuleKind::Tadd) {
        require(k >= 1, "TADD needs K >= 1");
    }
    if (kind == RuleKind::Swt) {
        schedule.validate();
    }
}

std::size_t TargetRule::critic_count() const noexcept {
    switch (kind) {
        case RuleKind::Ddpg:
            return 1;
        case RuleKind::ClippedDouble:
        case RuleKind::Wd3:
        case RuleKind::Swt:
            return 2;
        case RuleKind::Tadd:
        case RuleKind::Tcd3:
            return 3;
    }
    return 2;
}

std::string TargetRule::label() const {
    switch (kind) {
        case RuleKind::Ddpg: return "ddpg";
        case RuleKind::ClippedDouble: return "td3";
        case RuleKind::Wd3: return "wd3";
        case RuleKind::Tadd: return "tadd";
        case RuleKind::Tcd3: return "tcd3";
        case RuleKind::Swt: return "swtd3";
    }
    return "unknown";
}

RuleKind parse_rule_kind(const std::string& name) {
    if (name == "ddpg") return RuleKind::Ddpg;
    if (name == "td3" || name == "clipped_double") return RuleKind::ClippedDouble;
    if (name == "wd3") return RuleKind::Wd3;
    if (name == "tadd") return RuleKind::Tadd;
    if (name == "tcd3") return RuleKind::Tcd3;
    if (name == "swtd3" || name == "swt") return RuleKind::Swt;
    throw std::invalid_argument("unknown rule '" + name + "'");
}

Matrix smoothed_target_action(const NetworkParams& target_actor, const Matrix& next_states, double sigma,
                              double clip, const Vector& low, const Vector& high, std::mt19937_64& rng) {
    require(clip >= 0.0, "noise clip must be non-negative");
    require(sigma >= 0.0, "target noise sigma must be non-negative");
    Matrix actions = forward(target_actor, next_states);
    if (sigma == 0.0 || clip == 0.0) {
        return actions;
    }
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index c = 0; c < actions.cols(); ++c) {
        for (Eigen::Index r = 0; r < actions.rows(); ++r) {
            const double noise = std::clamp(normal(rng), -clip, clip);
            actions(r, c) = std::clamp(actions(r, c) + noise, low(r), high(r));
        }
    }
    return actions;
}

TargetResult compute_target(const TargetRule& rule, const Vector& rewards, const Matrix& next_states,
                            const Vector& mask, const Matrix& target_actions, const TargetNetworks& nets,
                            double gamma, std::mt19937_64& beta_rng) {
    const Eigen::Index batch = rewards.size();
    require(next_states.cols() == batch && target_actions.cols() == batch && mask.size() == batch,
            "target inputs disagree on batch length");
    const std::size_t needed = rule.kind == RuleKind::Tcd3 ? 3 : (rule.kind == RuleKind::Ddpg ? 1 : 2);
    require(nets.critics.size() >= needed, "rule " + rule.label() + " needs " + std::to_string(needed) +
                                               " target critics, got " + std::to_string(nets.critics.size()));
    for (std::size_t i = 0; i < needed; ++i) {
        require(nets.critics[i] != nullptr, "missing target critic");
    }
    if (rule.kind == RuleKind::Tadd) {
        require(!nets.tadd_snapshots.empty(), "TADD needs at least one third-critic snapshot");
    }

    const Matrix inputs = concat_rows(next_states, target_actions);
    auto q = [&](const NetworkParams& net) { return row_to_vector(forward(net, inputs)); };

    TargetResult out;
    Vector value;
    const Vector q1 = q(*nets.critics[0]);
    switch (rule.kind) {
        case RuleKind::Ddpg:
            value = q1;
            out.beta = 0.0;
            break;
        case RuleKind::ClippedDouble:
            value = q1.cwiseMin(q(*nets.critics[1]));
            out.beta = 1.0;
            break;
        case RuleKind::Wd3: {
            const Vector q2 = q(*nets.critics[1]);
            value = rule.beta * q1.cwiseMin(q2) + ((1.0 - rule.beta) / 2.0) * (q1 + q2);
            out.beta = rule.beta;
            break;
        }
        case RuleKind::Tadd: {
            const Vector q2 = q(*nets.critics[1]);
            Vector third = Vector::Zero(batch);
            for (const NetworkParams* snap : nets.tadd_snapshots) {
                third += q(*snap);
            }
            const double count = static_cast<double>(nets.tadd_snapshots.size());
            value = rule.beta * q1.cwiseMin(q2) + ((1.0 - rule.beta) / count) * third;
            out.beta = rule.beta;
            break;
        }
        case RuleKind::Tcd3:
            value = q1.cwiseMax(q(*nets.critics[1])).cwiseMin(q(*nets.critics[2]));
            out.beta = kNaN;
            break;
        case RuleKind::Swt: {
            const double beta = swt_draw_beta(rule.schedule, beta_rng);
            value = beta * q1.cwiseMin(q(*nets.critics[1])) + (1.0 - beta) * q1;
            out.beta = beta;
            break;
        }
    }
    out.y = rewards + gamma * mask.cwiseProduct(value);
    return out;
}

void AgentConfig::validate() const {
    require(hidden > 0, "hidden width must be positive");
    require(batch_size > 0, "batch size must be positive");
    require(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
    require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    require(policy_delay >= 1, "policy delay must be at least 1");
    require(exploration_noise >= 0.0 && target_noise >= 0.0 && noise_clip >= 0.0, "noise scales must be non-negative");
    require(replay_capacity >= 1, "replay capacity must be positive");
}

Agent::Agent(const EnvSpec& env, AgentConfig config, TargetRule rule, const SeedStreams& streams)
    : env_(env),
      config_(config),
      rule_(std::move(rule)),
      replay_(config.replay_capacity, env.observation_width, env.action_low, env.action_high),
      exploration_rng_(streams.stream("exploration")),
      target_noise_rng_(streams.stream("target_noise")),
      replay_rng_(streams.stream("replay")),
      beta_rng_(streams.stream("beta")) {
    env_.validate();
    config_.validate();
    rule_.validate();
    const int obs = static_cast<int>(env_.observation_width);
    const int act = static_cast<int>(env_.action_width);
    const int h = config_.hidden;

    auto init_rng = streams.stream("init");
    actor_ = make_bounded_network({obs, h, h, act}, env_.action_low, env_.action_high, init_rng);
    actor_target_ = actor_;
    actor_opt_ = AdamState::for_network(actor_, AdamConfig{config_.actor_lr});
    for (std::size_t i = 0; i < rule_.critic_count(); ++i) {
        critics_.push_back(make_network({obs + act, h, h, 1}, OutputTransform::Identity, init_rng));
        critic_targets_.push_back(critics_.back());
        critic_opts_.push_back(AdamState::for_network(critics_.back(), AdamConfig{config_.critic_lr}));
    }
    if (rule_.kind == RuleKind::Tadd) {
        tadd_snapshots_.push_back(critic_targets_[2]);
    }
}

double Agent::action_scale() const {
    return 0.5 * (env_.action_high - env_.action_low).maxCoeff();
}

Vector Agent::select_action(const Vector& state, bool explore) {
    if (explore && stored_steps_ < config_.warmup_steps) {
        Vector a(env_.action_width);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            std::uniform_real_distribution<double> uniform(env_.action_low(i), env_.action_high(i));
            a(i) = uniform(exploration_rng_);
        }
        return a;
    }
    Vector a = forward(actor_, state);
    if (explore && config_.exploration_noise > 0.0) {
        std::normal_distribution<double> normal(0.0, config_.exploration_noise * action_scale());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a(i) += normal(exploration_rng_);
        }
    }
    return a.cwiseMax(env_.action_low).cwiseMin(env_.action_high);
}

void Agent::store(const Transition& t) {
    replay_.push(t);
    ++stored_steps_;
}

Batch Agent::sample_batch(std::size_t k) {
    return replay_.sample(k, replay_rng_);
}

Matrix Agent::target_actions(const Matrix& next_states) {
    const double scale = action_scale();
    return smoothed_target_action(actor_target_, next_states, config_.target_noise * scale,
                                  config_.noise_clip * scale, env_.action_low, env_.action_high,
                                  target_noise_rng_);
}

TargetNetworks Agent::target_networks() const {
    TargetNetworks nets;
    for (const auto& c : critic_targets_) {
        nets.critics.push_back(&c);
    }
    for (const auto& s : tadd_snapshots_) {
        nets.tadd_snapshots.push_back(&s);
    }
    return nets;
}

TargetResult Agent::target_for(const Batch& batch) {
    const Matrix next_actions = target_actions(batch.next_states);
    return compute_target(rule_, batch.rewards, batch.next_states, batch.mask, next_actions, target_networks(),
                          env_.gamma, beta_rng_);
}

CriticLosses Agent::critic_update(const Batch& batch) {
    const TargetResult target = target_for(batch);
    const Matrix inputs = concat_rows(batch.states, batch.actions);
    const Matrix y = target.y.transpose();
    CriticLosses out;
    out.beta = target.beta;
    for (std::size_t i = 0; i < critics_.size(); ++i) {
        MseResult r = grad_mse(critics_[i], inputs, y);
        if (!std::isfinite(r.loss)) {
            throw std::runtime_error("non-finite critic loss");
        }
        adam_step(critics_[i], r.grads, critic_opts_[i]);
        out.losses.push_back(r.loss);
    }
    return out;
}

bool Agent::actor_update_and_sync(const Batch& batch, std::uint64_t iteration) {
    if (iteration % static_cast<std::uint64_t>(config_.policy_delay) != 0) {
        return false;
    }
    Gradients g = grad_dpg(actor_, critics_.front(), batch.states);
    for (auto& layer : g) {
        layer.weight = -layer.weight;
        layer.bias = -layer.bias;
    }
    adam_step(actor_, g, actor_opt_);
    for (std::size_t i = 0; i < critics_.size(); ++i) {
        soft_update(critic_targets_[i], critics_[i], config_.tau);
    }
    soft_update(actor_target_, actor_, config_.tau);
    if (rule_.kind == RuleKind::Tadd) {
        tadd_snapshots_.push_back(critic_targets_[2]);
        while (tadd_snapshots_.size() > rule_.k) {
            tadd_snapshots_.pop_front();
        }
    }
    return true;
}

CriticLosses Agent::train_iteration() {
    ++iterations_;
    const Batch batch = sample_batch(static_cast<std::size_t>(config_.batch_size));
    CriticLosses losses = critic_update(batch);
    actor_update_and_sync(batch, iterations_);
    return losses;
}

void Agent::advance_schedule() {
    if (rule_.kind == RuleKind::Swt && rule_.schedule.t < rule_.schedule.horizon) {
        swt_advance(rule_.schedule);
    }
}

void Agent::save_checkpoint(std::ostream& os) const {
    save_network(os, actor_);
    save_network(os, actor_target_);
    for (std::size_t i = 0; i < critics_.size(); ++i) {
        save_network(os, critics_[i]);
        save_network(os, critic_targets_[i]);
    }
}

double evaluate_policy(const NetworkParams& actor, const EnvSpec& env, int episodes, std::uint64_t seed) {
    require(episodes >= 1, "need at least one evaluation episode");
    // Noise never reaches the reported return; dropping it keeps the start
    // states identical across reward-noise levels.
    EnvSpec quiet = env;
    quiet.reward_noise = 0.0;
    Pendulum eval_env(quiet, seed);
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Vector obs = eval_env.reset();
        bool done = false;
        while (!done) {
            const StepResult r = eval_env.step(forward(actor, obs));
            total += r.base_reward;
            obs = r.observation;
            done = r.terminal;
        }
    }
    return total / static_cast<double>(episodes);
}

std::vector<RunRecord> train(Agent& agent, Pendulum& env, const TrainSettings& settings, const StepHook& hook) {
    require(settings.eval_every >= 1, "eval_every must be at least 1");
    std::vector<RunRecord> records;
    if (settings.total_steps == 0) {
        return records;
    }
    const std::size_t critic_count = agent.critics().size();
    std::vector<double> loss_sum(critic_count, 0.0);
    std::uint64_t updates = 0;
    double beta_sum = 0.0;

    Vector obs = env.reset();
    for (std::uint64_t step = 1; step <= settings.total_steps; ++step) {
        const Vector action = agent.select_action(obs, true);
        const StepResult result = env.step(action);
        agent.store(Transition{obs, action, result.reward, result.observation, result.absorbing});
        obs = result.terminal ? env.reset() : result.observation;

        if (agent.stored_steps() > agent.config().warmup_steps) {
            const CriticLosses losses = agent.train_iteration();
            for (std::size_t i = 0; i < critic_count; ++i) {
                loss_sum[i] += losses.losses[i];
            }
            beta_sum += losses.beta;
            ++updates;
        }
        agent.advance_schedule();
        if (hook) {
            hook(step, agent);
        }

        if (step % settings.eval_every == 0 || step == settings.total_steps) {
            RunRecord rec;
            rec.step = step;
            rec.eval_return = evaluate_policy(agent.actor(), env.spec(), settings.eval_episodes, settings.eval_seed);
            const double n = static_cast<double>(updates);
            rec.critic1_loss = updates ? loss_sum[0] / n : kNaN;
            rec.critic2_loss = (updates && critic_count > 1) ? loss_sum[1] / n : kNaN;
            const auto& rule = agent.rule();
            switch (rule.kind) {
                case RuleKind::Swt: rec.beta_lower = rule.schedule.lower; break;
                case RuleKind::Tcd3: rec.beta_lower = kNaN; break;
                case RuleKind::Ddpg: rec.beta_lower = 0.0; break;
                case RuleKind::ClippedDouble: rec.beta_lower = 1.0; break;
                default: rec.beta_lower = rule.beta; break;
            }
            rec.beta_sampled_mean = updates ? beta_sum / n : kNaN;
            records.push_back(rec);
            std::fill(loss_sum.begin(), loss_sum.end(), 0.0);
            beta_sum = 0.0;
            updates = 0;
            if (settings.stop_at_return && rec.eval_return >= *settings.stop_at_return) {
                break;
            }
        }
    }
    return records;
}

void write_run_log(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "step,eval_return,critic1_loss,critic2_loss,beta_lower,beta_sampled_mean\n";
    for (const auto& r : records) {
        os << r.step << ',' << format_real(r.eval_return) << ',' << format_real(r.critic1_loss) << ','
           << format_real(r.critic2_loss) << ',' << format_real(r.beta_lower) << ','
           << format_real(r.beta_sampled_mean) << '\n';
    }
}

std::vector<RunRecord> read_run_log(std::istream& is) {
    const CsvTable table = read_csv(is);
    const std::vector<std::string> expected{"step", "eval_return", "critic1_loss", "critic2_loss", "beta_lower",
                                            "beta_sampled_mean"};
    if (table.header != expected) {
        throw std::runtime_error("run log has an unexpected header");
    }
    std::vector<RunRecord> out;
    for (const auto& row : table.rows) {
        RunRecord r;
        r.step = static_cast<std::uint64_t>(parse_real(row[0]));
        r.eval_return = parse_real(row[1]);
        r.critic1_loss = parse_real(row[2]);
        r.critic2_loss = parse_real(row[3]);
        r.beta_lower = parse_real(row[4]);
        r.beta_sampled_mean = parse_real(row[5]);
        out.push_back(r);
    }
    return out;
}

}  // namespace biaslab
