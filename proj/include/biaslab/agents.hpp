#pragma once

// Critic-target rules, the stochastic beta schedule and the delayed
// actor-critic learner that ties them together.

#include "biaslab/network.hpp"
#include "biaslab/pendulum.hpp"
#include "biaslab/replay.hpp"
#include "biaslab/rng.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace biaslab {

/// Sampling interval [lower, beta0] for the stochastic twin weight. The
/// lower bound falls linearly from beta0 to alpha over `horizon` advances.
struct BetaSchedule {
    double beta0 = 0.5;
    double lower = 0.5;
    double alpha = 0.05;
    std::uint64_t horizon = 1;
    std::uint64_t t = 0;

    static BetaSchedule make(std::uint64_t horizon, double alpha = 0.05, double beta0 = 0.5);
    void validate() const;
};

/// Uniform draw on [lower, beta0]. Always consumes exactly one variate.
double swt_draw_beta(const BetaSchedule& schedule, std::mt19937_64& rng);

/// lower = beta0 - (beta0 - alpha) * t / horizon after incrementing t.
/// Throws std::logic_error once t has reached the horizon.
void swt_advance(BetaSchedule& schedule);

enum class RuleKind { Ddpg, ClippedDouble, Wd3, Tadd, Tcd3, Swt };

struct TargetRule {
    RuleKind kind = RuleKind::ClippedDouble;
    double beta = 1.0;        // Wd3, Tadd
    std::size_t k = 3;        // Tadd snapshot count
    BetaSchedule schedule{};  // Swt

    static TargetRule ddpg();
    static TargetRule clipped_double();
    static TargetRule wd3(double beta);
    static TargetRule tadd(double beta, std::size_t k);
    static TargetRule tcd3();
    static TargetRule swt(BetaSchedule schedule);

    void validate() const;
    /// Number of behavioural critics the rule trains.
    std::size_t critic_count() const noexcept;
    /// Short algorithm label: ddpg, td3, wd3, tadd, tcd3, swtd3.
    std::string label() const;
};

/// Parses an algorithm label (or alias) into a rule kind.
RuleKind parse_rule_kind(const std::string& name);

/// Target actions pi'(s') plus per-entry N(0, sigma) noise clipped to
/// [-clip, clip], then clipped to [low, high].
Matrix smoothed_target_action(const NetworkParams& target_actor, const Matrix& next_states, double sigma,
                              double clip, const Vector& low, const Vector& high, std::mt19937_64& rng);

/// Networks read by compute_target. Only the entries the rule needs must
/// be present: critics[0] always, critics[1] for the twin rules, critics[2]
/// for TCD3 and tadd_snapshots for TADD.
struct TargetNetworks {
    std::vector<const NetworkParams*> critics;
    std::vector<const NetworkParams*> tadd_snapshots;
};

struct TargetResult {
    Vector y;
    double beta = 0.0;  // weight used on the minimum, NaN for TCD3
};

/// y = r + mask * gamma * V(s', a~). beta_rng is read only by the SWT rule.
TargetResult compute_target(const TargetRule& rule, const Vector& rewards, const Matrix& next_states,
                            const Vector& mask, const Matrix& target_actions, const TargetNetworks& nets,
                            double gamma, std::mt19937_64& beta_rng);

struct AgentConfig {
    int hidden = 256;
    int batch_size = 256;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    double tau = 0.005;
    int policy_delay = 2;
    // Noise scales are fractions of the action half-range.
    double exploration_noise = 0.1;
    double target_noise = 0.2;
    double noise_clip = 0.5;
    std::uint64_t warmup_steps = 1000;
    std::size_t replay_capacity = 1000000;

    void validate() const;
};

struct CriticLosses {
    std::vector<double> losses;  // one per trained critic
    double beta = 0.0;
};

class Agent {
public:
    Agent(const EnvSpec& env, AgentConfig config, TargetRule rule, const SeedStreams& streams);

    /// Deterministic policy output when explore is false. With explore set,
    /// actions are uniform over the box until warmup_steps transitions have
    /// been stored, and actor output plus Gaussian noise afterwards.
    Vector select_action(const Vector& state, bool explore);

    void store(const Transition& t);

    /// One Adam step on every trained critic toward a shared target.
    CriticLosses critic_update(const Batch& batch);

    /// On iterations where iteration % policy_delay == 0: one policy-gradient
    /// step through the first critic, then Polyak updates of every target.
    /// Returns whether the update ran.
    bool actor_update_and_sync(const Batch& batch, std::uint64_t iteration);

    /// Samples a batch and runs critic_update plus actor_update_and_sync.
    CriticLosses train_iteration();

    /// Advances the SWT schedule; a no-op for the other rules.
    void advance_schedule();

    Batch sample_batch(std::size_t k);
    Matrix target_actions(const Matrix& next_states);
    TargetResult target_for(const Batch& batch);

    const AgentConfig& config() const noexcept { return config_; }
    const TargetRule& rule() const noexcept { return rule_; }
    const EnvSpec& env_spec() const noexcept { return env_; }
    const ReplayBuffer& replay() const noexcept { return replay_; }
    std::uint64_t stored_steps() const noexcept { return stored_steps_; }
    std::uint64_t iterations() const noexcept { return iterations_; }

    NetworkParams& actor() noexcept { return actor_; }
    const NetworkParams& actor() const noexcept { return actor_; }
    const NetworkParams& actor_target() const noexcept { return actor_target_; }
    std::vector<NetworkParams>& critics() noexcept { return critics_; }
    const std::vector<NetworkParams>& critics() const noexcept { return critics_; }
    std::vector<NetworkParams>& critic_targets() noexcept { return critic_targets_; }
    const std::vector<NetworkParams>& critic_targets() const noexcept { return critic_targets_; }
    const std::deque<NetworkParams>& tadd_snapshots() const noexcept { return tadd_snapshots_; }

    /// Writes every network in save_network format, actor first.
    void save_checkpoint(std::ostream& os) const;

private:
    TargetNetworks target_networks() const;
    double action_scale() const;

    EnvSpec env_;
    AgentConfig config_;
    TargetRule rule_;
    NetworkParams actor_;
    NetworkParams actor_target_;
    std::vector<NetworkParams> critics_;
    std::vector<NetworkParams> critic_targets_;
    AdamState actor_opt_;
    std::vector<AdamState> critic_opts_;
    std::deque<NetworkParams> tadd_snapshots_;
    ReplayBuffer replay_;
    std::mt19937_64 exploration_rng_;
    std::mt19937_64 target_noise_rng_;
    std::mt19937_64 replay_rng_;
    std::mt19937_64 beta_rng_;
    std::uint64_t stored_steps_ = 0;
    std::uint64_t iterations_ = 0;
};

struct RunRecord {
    std::uint64_t step = 0;
    double eval_return = 0.0;
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    double beta_lower = 0.0;
    double beta_sampled_mean = 0.0;
};

struct TrainSettings {
    std::uint64_t total_steps = 0;
    std::uint64_t eval_every = 1000;
    int eval_episodes = 10;
    std::uint64_t eval_seed = 0;
    /// Optional stop once an evaluation reaches this return.
    std::optional<double> stop_at_return;
};

/// Called after each environment step with the 1-based step count.
using StepHook = std::function<void(std::uint64_t step, Agent& agent)>;

/// Mean noise-free return of the deterministic policy over `episodes`
/// episodes on a fresh environment seeded with `seed`. No learning.
double evaluate_policy(const NetworkParams& actor, const EnvSpec& env, int episodes, std::uint64_t seed);

/// Interact, store, sample and update for total_steps environment steps.
/// Records are emitted every eval_every steps and at the final step.
std::vector<RunRecord> train(Agent& agent, Pendulum& env, const TrainSettings& settings,
                             const StepHook& hook = {});

/// Header plus one row per record; non-finite values print as "nan".
void write_run_log(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_run_log(std::istream& is);

}  // namespace biaslab
