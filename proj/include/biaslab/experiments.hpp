#pragma once

// Experiment configuration and the train / bias / closed-form / compare
// commands. Every run derives all randomness from its seed through
// SeedStreams, so equal configurations reproduce identical artifacts.

#include "biaslab/agents.hpp"
#include "biaslab/bias_harness.hpp"
#include "biaslab/pendulum.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace biaslab {

inline constexpr const char* kVersion = "0.1.0";

/// Raised for malformed or invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RuleConfig {
    std::string name = "td3";
    std::optional<double> beta;       // wd3, tadd
    std::size_t k = 3;                // tadd
    double alpha = 0.05;              // swtd3
    double beta0 = 0.5;               // swtd3
    std::optional<std::uint64_t> horizon;  // swtd3 schedule length, default total_steps
    std::optional<std::string> task;  // look beta up in the per-task table
};

struct EnvConfig {
    std::string name = "pendulum";
    double reward_noise = 0.0;
    int max_episode_steps = 200;
    double gamma = 0.99;
};

struct BiasConfig {
    std::size_t samples = 256;
    std::uint64_t cadence = 5000;
    int horizon = 1000;
    std::vector<double> noise_sweep;  // empty: use env.reward_noise only
};

struct ClosedFormConfig {
    std::vector<double> mu{0.0};
    std::vector<double> theta{1.4142135623730951};
    std::vector<double> beta;  // empty: 21-point grid 0, 0.05, ..., 1
    double rho = 0.0;
    std::uint64_t mc_samples = 1000000;
    std::uint64_t seed = 7;

    std::vector<double> beta_grid() const;
};

struct ExperimentConfig {
    RuleConfig rule;
    EnvConfig env;
    AgentConfig agent;
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t total_steps = 30000;
    std::uint64_t eval_every = 1000;
    int eval_episodes = 10;
    std::optional<double> stop_at_return;  // end a run once an evaluation reaches this
    BiasConfig bias;
    ClosedFormConfig closed_form;
    std::string output_dir = "runs";

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    TargetRule make_rule() const;
    EnvSpec make_env_spec(double reward_noise) const;
};

/// Strict JSON parsing: unknown keys and wrong types are ConfigErrors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved JSON, indented; parse_config(to_json_string(c)) == c.
std::string to_json_string(const ExperimentConfig& config);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Per-task beta values for the fixed-weight rules.
struct TaskBeta {
    const char* task;
    double wd3;
    double tadd;
};
const std::vector<TaskBeta>& task_beta_table();
std::optional<double> task_beta(const std::string& rule, const std::string& task);

struct RunResult {
    std::filesystem::path dir;
    std::uint64_t seed = 0;
    double reward_noise = 0.0;
    std::vector<RunRecord> run_log;
    std::vector<BiasRecord> bias;
};

/// One run per seed under <output_dir>/<rule>/<seed>/ containing
/// run_log.csv, checkpoint.txt and manifest.json.
std::vector<RunResult> run_train(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// One run per (noise level, seed) under <output_dir>/<rule>/nu<noise>/<seed>/
/// with run_log.csv, bias.csv and manifest.json.
std::vector<RunResult> run_bias(const ExperimentConfig& config, std::ostream* progress = nullptr);

/// Trains a single seed in memory, optionally with bias measurement.
RunResult run_single(const ExperimentConfig& config, std::uint64_t seed, double reward_noise, bool measure_bias);

struct ClosedFormRow {
    std::string rule;
    double beta = 0.0;  // NaN for tcd3
    double mu = 0.0;
    double theta = 0.0;
    double analytic = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
};

/// Analytic expected errors for ddpg, td3, tcd3 and, per beta, wd3 and tadd,
/// next to Monte Carlo estimates. Throws ConfigError on an invalid grid.
std::vector<ClosedFormRow> closed_form_table(const ClosedFormConfig& grid);
void write_closed_form_csv(std::ostream& os, const std::vector<ClosedFormRow>& rows);
/// Writes <output_dir>/closed_form.csv and returns the rows.
std::vector<ClosedFormRow> run_closed_form(const ExperimentConfig& config);

struct CompareRow {
    std::string group;
    std::size_t seeds = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over seeds, 0 for one seed
};

/// Mean of the last (up to) 10 evaluation returns of one run log.
double last_ten_average(const std::vector<RunRecord>& log);

/// Finds every run directory (one holding run_log.csv) at or below each
/// root, groups them by the manifest's group and summarizes per group.
/// Throws std::runtime_error on missing or corrupt logs.
std::vector<CompareRow> compare_runs(const std::vector<std::filesystem::path>& roots);
void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);
std::string format_compare_table(const std::vector<CompareRow>& rows);

}  // namespace biaslab
