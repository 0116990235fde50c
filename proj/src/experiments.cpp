#include "biaslab/experiments.hpp"

#include "biaslab/csv.hpp"
#include "biaslab/gaussian_bias.hpp"
#include "biaslab/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace biaslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check(bool condition, const std::string& message) {
    if (!condition) {
        throw ConfigError(message);
    }
}

// Strict readers: every object lists its allowed keys and every value is
// type-checked, so typos surface as errors instead of silent defaults.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        check(j_.is_object(), where() + " must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& item : j_.items()) {
            check(allowed.count(item.key()) == 1, "unknown key '" + qualified(item.key()) + "'");
        }
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& at(const char* key) const { return j_.at(key); }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void real(const char* key, double& out) const {
        if (!has(key)) return;
        check(at(key).is_number(), qualified(key) + " must be a number");
        out = at(key).get<double>();
    }

    void real(const char* key, std::optional<double>& out) const {
        if (!j_.contains(key)) return;
        if (at(key).is_null()) {
            out.reset();
            return;
        }
        double v = 0.0;
        real(key, v);
        out = v;
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (!has(key)) return;
        const json& v = at(key);
        check(v.is_number_integer(), qualified(key) + " must be an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            check(v.is_number_unsigned() || v.get<std::int64_t>() >= 0, qualified(key) + " must be non-negative");
            out = static_cast<Int>(v.get<std::uint64_t>());
        } else {
            const auto x = v.get<std::int64_t>();
            check(x >= std::numeric_limits<Int>::min() && x <= std::numeric_limits<Int>::max(),
                  qualified(key) + " is out of range");
            out = static_cast<Int>(x);
        }
    }

    void text(const char* key, std::string& out) const {
        if (!has(key)) return;
        check(at(key).is_string(), qualified(key) + " must be a string");
        out = at(key).get<std::string>();
    }

    void text(const char* key, std::optional<std::string>& out) const {
        if (!j_.contains(key)) return;
        if (at(key).is_null()) {
            out.reset();
            return;
        }
        std::string v;
        text(key, v);
        out = v;
    }

    void reals(const char* key, std::vector<double>& out) const {
        if (!has(key)) return;
        check(at(key).is_array(), qualified(key) + " must be an array of numbers");
        out.clear();
        for (const auto& v : at(key)) {
            check(v.is_number(), qualified(key) + " must be an array of numbers");
            out.push_back(v.get<double>());
        }
    }

    void seeds(const char* key, std::vector<std::uint64_t>& out) const {
        if (!has(key)) return;
        check(at(key).is_array(), qualified(key) + " must be an array of integers");
        out.clear();
        for (const auto& v : at(key)) {
            check(v.is_number_unsigned(), qualified(key) + " must be an array of non-negative integers");
            out.push_back(v.get<std::uint64_t>());
        }
    }

    Reader child(const char* key) const { return Reader(at(key), qualified(key)); }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const ExperimentConfig& c) {
    json j;
    j["rule"] = {{"name", c.rule.name},
                 {"beta", optional_json(c.rule.beta)},
                 {"k", c.rule.k},
                 {"alpha", c.rule.alpha},
                 {"beta0", c.rule.beta0},
                 {"horizon", c.rule.horizon ? json(*c.rule.horizon) : json(nullptr)},
                 {"task", c.rule.task ? json(*c.rule.task) : json(nullptr)}};
    j["env"] = {{"name", c.env.name},
                {"reward_noise", c.env.reward_noise},
                {"max_episode_steps", c.env.max_episode_steps},
                {"gamma", c.env.gamma}};
    const AgentConfig& a = c.agent;
    j["agent"] = {{"hidden", a.hidden},
                  {"batch_size", a.batch_size},
                  {"actor_lr", a.actor_lr},
                  {"critic_lr", a.critic_lr},
                  {"tau", a.tau},
                  {"policy_delay", a.policy_delay},
                  {"exploration_noise", a.exploration_noise},
                  {"target_noise", a.target_noise},
                  {"noise_clip", a.noise_clip},
                  {"warmup_steps", a.warmup_steps},
                  {"replay_capacity", a.replay_capacity}};
    j["seeds"] = c.seeds;
    j["total_steps"] = c.total_steps;
    j["eval_every"] = c.eval_every;
    j["eval_episodes"] = c.eval_episodes;
    j["stop_at_return"] = optional_json(c.stop_at_return);
    j["bias"] = {{"samples", c.bias.samples},
                 {"cadence", c.bias.cadence},
                 {"horizon", c.bias.horizon},
                 {"noise_sweep", c.bias.noise_sweep}};
    const ClosedFormConfig& g = c.closed_form;
    j["closed_form"] = {{"mu", g.mu},           {"theta", g.theta},           {"beta", g.beta},
                        {"rho", g.rho},         {"mc_samples", g.mc_samples}, {"seed", g.seed}};
    j["output_dir"] = c.output_dir;
    return j;
}

std::string noise_tag(double nu) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "nu%g", nu);
    return buf;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << content;
    if (!os) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::string manifest(const ExperimentConfig& config, const std::string& command, const std::string& group,
                     std::uint64_t seed, double reward_noise) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["rule"] = config.make_rule().label();
    m["group"] = group;
    m["seed"] = seed;
    m["reward_noise"] = reward_noise;
    m["config"] = to_json(config);
    return m.dump(2) + "\n";
}

}  // namespace

std::vector<double> ClosedFormConfig::beta_grid() const {
    if (!beta.empty()) {
        return beta;
    }
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(i / 20.0);
    }
    return grid;
}

void ExperimentConfig::validate() const {
    try {
        (void)parse_rule_kind(rule.name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("rule.name: ") + e.what());
    }
    const RuleKind kind = parse_rule_kind(rule.name);
    if (rule.beta) {
        check(std::isfinite(*rule.beta) && *rule.beta >= 0.0 && *rule.beta <= 1.0, "rule.beta must lie in [0, 1]");
    }
    if (rule.task) {
        check(task_beta("wd3", *rule.task).has_value(), "rule.task '" + *rule.task + "' is not in the beta table");
    }
    if (kind == RuleKind::Wd3 || kind == RuleKind::Tadd) {
        check(rule.beta || rule.task, "rule.beta or rule.task is required for " + rule.name);
    }
    check(rule.k >= 1, "rule.k must be at least 1");
    check(rule.beta0 > 0.0 && rule.beta0 <= 1.0, "rule.beta0 must lie in (0, 1]");
    check(rule.alpha >= 0.0 && rule.alpha <= rule.beta0, "rule.alpha must lie in [0, rule.beta0]");
    if (rule.horizon) {
        check(*rule.horizon >= 1, "rule.horizon must be at least 1");
    }

    check(env.name == "pendulum", "env.name: unknown environment '" + env.name + "'");
    check(std::isfinite(env.reward_noise) && env.reward_noise >= 0.0, "env.reward_noise must be non-negative");
    check(env.max_episode_steps >= 1, "env.max_episode_steps must be at least 1");
    check(env.gamma >= 0.0 && env.gamma < 1.0, "env.gamma must lie in [0, 1)");

    try {
        agent.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("agent: ") + e.what());
    }

    check(!seeds.empty(), "seeds must not be empty");
    check(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds must be distinct");
    check(total_steps >= 1, "total_steps must be at least 1");
    check(eval_every >= 1, "eval_every must be at least 1");
    check(eval_episodes >= 1, "eval_episodes must be at least 1");
    check(!stop_at_return || std::isfinite(*stop_at_return), "stop_at_return must be finite");

    check(bias.samples >= 1, "bias.samples must be at least 1");
    check(bias.cadence >= 1, "bias.cadence must be at least 1");
    check(bias.horizon >= 1, "bias.horizon must be at least 1");
    for (double nu : bias.noise_sweep) {
        check(std::isfinite(nu) && nu >= 0.0, "bias.noise_sweep entries must be non-negative");
    }

    const ClosedFormConfig& g = closed_form;
    check(!g.mu.empty() && !g.theta.empty(), "closed_form.mu and closed_form.theta must not be empty");
    for (double m : g.mu) check(std::isfinite(m), "closed_form.mu entries must be finite");
    for (double t : g.theta) check(std::isfinite(t) && t >= 0.0, "closed_form.theta entries must be non-negative");
    for (double b : g.beta) check(b >= 0.0 && b <= 1.0, "closed_form.beta entries must lie in [0, 1]");
    check(g.rho > -0.5 && g.rho < 1.0, "closed_form.rho must lie in (-0.5, 1)");
    check(g.mc_samples >= 10000, "closed_form.mc_samples must be at least 10000");

    check(!output_dir.empty(), "output_dir must not be empty");
}

TargetRule ExperimentConfig::make_rule() const {
    const RuleKind kind = parse_rule_kind(rule.name);
    auto fixed_beta = [&]() {
        if (rule.beta) return *rule.beta;
        return *task_beta(rule.name, *rule.task);
    };
    switch (kind) {
        case RuleKind::Ddpg: return TargetRule::ddpg();
        case RuleKind::ClippedDouble: return TargetRule::clipped_double();
        case RuleKind::Wd3: return TargetRule::wd3(fixed_beta());
        case RuleKind::Tadd: return TargetRule::tadd(fixed_beta(), rule.k);
        case RuleKind::Tcd3: return TargetRule::tcd3();
        case RuleKind::Swt:
            return TargetRule::swt(BetaSchedule::make(rule.horizon.value_or(total_steps), rule.alpha, rule.beta0));
    }
    throw ConfigError("rule.name: unsupported rule");
}

EnvSpec ExperimentConfig::make_env_spec(double reward_noise) const {
    return EnvSpec::pendulum(reward_noise, env.max_episode_steps, env.gamma);
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    ExperimentConfig c;
    const Reader root(j, "");
    root.allow({"rule", "env", "agent", "seeds", "total_steps", "eval_every", "eval_episodes", "stop_at_return", "bias",
                "closed_form", "output_dir"});
    if (root.has("rule")) {
        const Reader r = root.child("rule");
        r.allow({"name", "beta", "k", "alpha", "beta0", "horizon", "task"});
        r.text("name", c.rule.name);
        r.real("beta", c.rule.beta);
        r.integer("k", c.rule.k);
        r.real("alpha", c.rule.alpha);
        r.real("beta0", c.rule.beta0);
        if (r.has("horizon")) {
            std::uint64_t h = 0;
            r.integer("horizon", h);
            c.rule.horizon = h;
        }
        r.text("task", c.rule.task);
    }
    if (root.has("env")) {
        const Reader r = root.child("env");
        r.allow({"name", "reward_noise", "max_episode_steps", "gamma"});
        r.text("name", c.env.name);
        r.real("reward_noise", c.env.reward_noise);
        r.integer("max_episode_steps", c.env.max_episode_steps);
        r.real("gamma", c.env.gamma);
    }
    if (root.has("agent")) {
        const Reader r = root.child("agent");
        r.allow({"hidden", "batch_size", "actor_lr", "critic_lr", "tau", "policy_delay", "exploration_noise",
                 "target_noise", "noise_clip", "warmup_steps", "replay_capacity"});
        AgentConfig& a = c.agent;
        r.integer("hidden", a.hidden);
        r.integer("batch_size", a.batch_size);
        r.real("actor_lr", a.actor_lr);
        r.real("critic_lr", a.critic_lr);
        r.real("tau", a.tau);
        r.integer("policy_delay", a.policy_delay);
        r.real("exploration_noise", a.exploration_noise);
        r.real("target_noise", a.target_noise);
        r.real("noise_clip", a.noise_clip);
        r.integer("warmup_steps", a.warmup_steps);
        r.integer("replay_capacity", a.replay_capacity);
    }
    root.seeds("seeds", c.seeds);
    root.integer("total_steps", c.total_steps);
    root.integer("eval_every", c.eval_every);
    root.integer("eval_episodes", c.eval_episodes);
    root.real("stop_at_return", c.stop_at_return);
    if (root.has("bias")) {
        const Reader r = root.child("bias");
        r.allow({"samples", "cadence", "horizon", "noise_sweep"});
        r.integer("samples", c.bias.samples);
        r.integer("cadence", c.bias.cadence);
        r.integer("horizon", c.bias.horizon);
        r.reals("noise_sweep", c.bias.noise_sweep);
    }
    if (root.has("closed_form")) {
        const Reader r = root.child("closed_form");
        r.allow({"mu", "theta", "beta", "rho", "mc_samples", "seed"});
        r.reals("mu", c.closed_form.mu);
        r.reals("theta", c.closed_form.theta);
        r.reals("beta", c.closed_form.beta);
        r.real("rho", c.closed_form.rho);
        r.integer("mc_samples", c.closed_form.mc_samples);
        r.integer("seed", c.closed_form.seed);
    }
    root.text("output_dir", c.output_dir);
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string to_json_string(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

const std::vector<TaskBeta>& task_beta_table() {
    static const std::vector<TaskBeta> table{
        {"Ant-v2", 0.75, 0.95},
        {"BipedalWalker-v3", 0.5, 0.5},
        {"HalfCheetah-v2", 0.45, 0.95},
        {"Hopper-v2", 0.50, 0.95},
        {"HumanoidStandup-v2", 0.30, 0.30},
        {"Humanoid-v2", 0.30, 0.30},
        {"InvertedDoublePendulum-v2", 0.75, 0.95},
        {"InvertedPendulum-v2", 0.75, 0.95},
        {"LunarLanderContinuous-v2", 0.45, 0.45},
        {"Reacher-v2", 0.15, 0.95},
        {"Swimmer-v2", 0.45, 0.20},
        {"Walker2d-v2", 0.45, 0.95},
    };
    return table;
}

std::optional<double> task_beta(const std::string& rule, const std::string& task) {
    for (const auto& row : task_beta_table()) {
        if (task == row.task) {
            if (rule == "wd3") return row.wd3;
            if (rule == "tadd") return row.tadd;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

namespace {

struct TrainedRun {
    RunResult result;
    std::unique_ptr<Agent> agent;
};

TrainedRun train_one(const ExperimentConfig& config, std::uint64_t seed, double reward_noise, bool measure_bias) {
    config.validate();
    const EnvSpec spec = config.make_env_spec(reward_noise);
    const SeedStreams streams(seed);
    auto agent = std::make_unique<Agent>(spec, config.agent, config.make_rule(), streams);
    Pendulum env(spec, streams.stream("env")());

    TrainSettings settings;
    settings.total_steps = config.total_steps;
    settings.eval_every = config.eval_every;
    settings.eval_episodes = config.eval_episodes;
    settings.eval_seed = streams.stream("eval")();
    settings.stop_at_return = config.stop_at_return;

    TrainedRun run;
    run.result.seed = seed;
    run.result.reward_noise = reward_noise;
    if (measure_bias) {
        BiasSettings bias;
        bias.samples = config.bias.samples;
        bias.cadence = config.bias.cadence;
        bias.horizon = config.bias.horizon;
        std::mt19937_64 bias_rng = streams.stream("bias");
        BiasRun measured = train_with_bias(*agent, env, settings, bias, bias_rng);
        run.result.run_log = std::move(measured.run_log);
        run.result.bias = std::move(measured.bias);
    } else {
        run.result.run_log = train(*agent, env, settings);
    }
    run.agent = std::move(agent);
    return run;
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, std::uint64_t seed, double reward_noise, bool measure_bias) {
    return train_one(config, seed, reward_noise, measure_bias).result;
}

std::vector<RunResult> run_train(const ExperimentConfig& config, std::ostream* progress) {
    config.validate();
    const std::string label = config.make_rule().label();
    std::vector<RunResult> results;
    for (std::uint64_t seed : config.seeds) {
        const fs::path dir = fs::path(config.output_dir) / label / std::to_string(seed);
        fs::create_directories(dir);
        TrainedRun run = train_one(config, seed, config.env.reward_noise, false);
        run.result.dir = dir;

        std::ostringstream log;
        write_run_log(log, run.result.run_log);
        write_text(dir / "run_log.csv", log.str());
        std::ostringstream ckpt;
        run.agent->save_checkpoint(ckpt);
        write_text(dir / "checkpoint.txt", ckpt.str());
        write_text(dir / "manifest.json", manifest(config, "train", label, seed, config.env.reward_noise));

        if (progress) {
            *progress << "train " << label << " seed " << seed << ": final return "
                      << format_real(run.result.run_log.back().eval_return) << " -> " << dir.string() << "\n";
        }
        results.push_back(std::move(run.result));
    }
    return results;
}

std::vector<RunResult> run_bias(const ExperimentConfig& config, std::ostream* progress) {
    config.validate();
    const std::string label = config.make_rule().label();
    std::vector<double> noises = config.bias.noise_sweep;
    if (noises.empty()) {
        noises.push_back(config.env.reward_noise);
    }
    std::vector<RunResult> results;
    for (double nu : noises) {
        const std::string group = label + "/" + noise_tag(nu);
        for (std::uint64_t seed : config.seeds) {
            const fs::path dir = fs::path(config.output_dir) / label / noise_tag(nu) / std::to_string(seed);
            fs::create_directories(dir);
            RunResult result = run_single(config, seed, nu, true);
            result.dir = dir;

            std::ostringstream log;
            write_run_log(log, result.run_log);
            write_text(dir / "run_log.csv", log.str());
            std::ostringstream bias;
            write_bias_log(bias, result.bias);
            write_text(dir / "bias.csv", bias.str());
            write_text(dir / "manifest.json", manifest(config, "bias", group, seed, nu));

            if (progress) {
                *progress << "bias " << group << " seed " << seed << ": " << result.bias.size() << " records -> "
                          << dir.string() << "\n";
            }
            results.push_back(std::move(result));
        }
    }
    return results;
}

std::vector<ClosedFormRow> closed_form_table(const ClosedFormConfig& grid) {
    ExperimentConfig probe;
    probe.closed_form = grid;
    probe.validate();

    const std::vector<double> betas = grid.beta_grid();
    std::vector<StatisticRequest> stats{{OrderStatistic::Single, 0.0},
                                        {OrderStatistic::Min2, 0.0},
                                        {OrderStatistic::MinMax, 0.0}};
    for (double b : betas) {
        stats.push_back({OrderStatistic::WeightedTwin, b});
        stats.push_back({OrderStatistic::WeightedThird, b});
    }

    const SeedStreams streams(grid.seed);
    std::vector<ClosedFormRow> rows;
    std::size_t cell = 0;
    for (double mu : grid.mu) {
        for (double theta : grid.theta) {
            // Equal means and a common correlation; sigma chosen so the
            // pairwise deviation equals theta.
            double sigma = 1.0;
            double rho = 1.0;
            if (theta > 0.0) {
                rho = grid.rho;
                sigma = theta / std::sqrt(2.0 * (1.0 - rho));
            }
            const auto spec = CorrelatedGaussianSpec::make({mu, mu, mu}, {sigma, sigma, sigma}, rho);
            const std::uint64_t seed = streams.stream("closed_form/" + std::to_string(cell++))();
            const std::vector<McEstimate> mc = mc_order_stat_oracle(spec, stats, grid.mc_samples, seed);

            auto add = [&](const char* rule, double beta, double analytic, const McEstimate& est) {
                rows.push_back({rule, beta, mu, theta, analytic, est.mean, est.standard_error});
            };
            add("ddpg", 0.0, mu, mc[0]);
            add("td3", 1.0, expected_min2_equal_means(mu, theta), mc[1]);
            add("tcd3", kNaN, expected_tcu_error(mu, theta), mc[2]);
            for (std::size_t i = 0; i < betas.size(); ++i) {
                const double analytic = expected_weighted_error(betas[i], mu, theta);
                add("wd3", betas[i], analytic, mc[3 + 2 * i]);
                add("tadd", betas[i], analytic, mc[4 + 2 * i]);
            }
        }
    }
    return rows;
}

void write_closed_form_csv(std::ostream& os, const std::vector<ClosedFormRow>& rows) {
    os << "rule,beta,mu,theta,analytic,mc_mean,mc_se\n";
    for (const auto& r : rows) {
        os << r.rule << ',' << format_real(r.beta) << ',' << format_real(r.mu) << ',' << format_real(r.theta) << ','
           << format_real(r.analytic) << ',' << format_real(r.mc_mean) << ',' << format_real(r.mc_se) << '\n';
    }
}

std::vector<ClosedFormRow> run_closed_form(const ExperimentConfig& config) {
    config.validate();
    std::vector<ClosedFormRow> rows = closed_form_table(config.closed_form);
    fs::create_directories(config.output_dir);
    std::ostringstream os;
    write_closed_form_csv(os, rows);
    write_text(fs::path(config.output_dir) / "closed_form.csv", os.str());
    return rows;
}

double last_ten_average(const std::vector<RunRecord>& log) {
    if (log.empty()) {
        throw std::runtime_error("run log has no evaluation records");
    }
    const std::size_t n = std::min<std::size_t>(10, log.size());
    double sum = 0.0;
    for (std::size_t i = log.size() - n; i < log.size(); ++i) {
        sum += log[i].eval_return;
    }
    return sum / static_cast<double>(n);
}

std::vector<CompareRow> compare_runs(const std::vector<fs::path>& roots) {
    if (roots.empty()) {
        throw std::runtime_error("compare needs at least one run directory");
    }
    std::vector<fs::path> run_dirs;
    for (const auto& root : roots) {
        if (!fs::is_directory(root)) {
            throw std::runtime_error("not a directory: " + root.string());
        }
        if (fs::exists(root / "run_log.csv")) {
            run_dirs.push_back(root);
        }
        for (const auto& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_directory() && fs::exists(entry.path() / "run_log.csv")) {
                run_dirs.push_back(entry.path());
            }
        }
    }
    if (run_dirs.empty()) {
        throw std::runtime_error("no run_log.csv found under the given directories");
    }
    std::sort(run_dirs.begin(), run_dirs.end());
    run_dirs.erase(std::unique(run_dirs.begin(), run_dirs.end()), run_dirs.end());

    std::map<std::string, std::vector<double>> groups;
    for (const auto& dir : run_dirs) {
        std::string group = dir.parent_path().filename().string();
        const fs::path manifest_path = dir / "manifest.json";
        if (fs::exists(manifest_path)) {
            std::ifstream ms(manifest_path);
            try {
                const json m = json::parse(ms);
                if (m.contains("group") && m.at("group").is_string()) {
                    group = m.at("group").get<std::string>();
                }
            } catch (const json::exception& e) {
                throw std::runtime_error("corrupt manifest " + manifest_path.string() + ": " + e.what());
            }
        }
        std::ifstream is(dir / "run_log.csv");
        std::vector<RunRecord> log;
        try {
            log = read_run_log(is);
        } catch (const std::exception& e) {
            throw std::runtime_error("corrupt run log in " + dir.string() + ": " + e.what());
        }
        if (log.empty()) {
            throw std::runtime_error("empty run log in " + dir.string());
        }
        groups[group].push_back(last_ten_average(log));
    }

    std::vector<CompareRow> rows;
    for (const auto& [group, values] : groups) {
        CompareRow row;
        row.group = group;
        row.seeds = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
    os << "rule,seeds,mean,std\n";
    for (const auto& r : rows) {
        os << r.group << ',' << r.seeds << ',' << format_real(r.mean) << ',' << format_real(r.stddev) << '\n';
    }
}

std::string format_compare_table(const std::vector<CompareRow>& rows) {
    std::size_t width = 4;
    for (const auto& r : rows) width = std::max(width, r.group.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width)) << "rule" << std::right << std::setw(7) << "seeds"
       << std::setw(14) << "mean" << std::setw(12) << "std" << '\n';
    os << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(width)) << r.group << std::right << std::setw(7) << r.seeds
           << std::setw(14) << r.mean << std::setw(12) << r.stddev << '\n';
    }
    return os.str();
}

}  // namespace biaslab
