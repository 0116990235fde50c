#include "biaslab/biaslab.h"

#include "biaslab/experiments.hpp"
#include "biaslab/gaussian_bias.hpp"
#include "biaslab/pendulum.hpp"

#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

struct biaslab_config {
    biaslab::ExperimentConfig value;
};

struct biaslab_env {
    biaslab::Pendulum value;
};

namespace {

thread_local std::string last_error;

biaslab_status fail(biaslab_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <typename F>
biaslab_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return BIASLAB_OK;
    } catch (const biaslab::ConfigError& e) {
        return fail(BIASLAB_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BIASLAB_ERR_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(BIASLAB_ERR_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(BIASLAB_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(BIASLAB_ERR_RUNTIME, "unknown error");
    }
}

char* duplicate(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

biaslab::OrderStatistic parse_statistic(const std::string& name) {
    using biaslab::OrderStatistic;
    if (name == "single") return OrderStatistic::Single;
    if (name == "min2") return OrderStatistic::Min2;
    if (name == "max2") return OrderStatistic::Max2;
    if (name == "max3") return OrderStatistic::Max3;
    if (name == "minmax") return OrderStatistic::MinMax;
    if (name == "weighted_twin") return OrderStatistic::WeightedTwin;
    if (name == "weighted_third") return OrderStatistic::WeightedThird;
    throw std::invalid_argument("unknown statistic '" + name + "'");
}

// Commands report configuration problems as config errors even when they
// surface from a lower layer's argument checks.
template <typename F>
biaslab_status command(F&& f) {
    return guarded([&] {
        try {
            f();
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(e.what());
        }
    });
}

}  // namespace

extern "C" {

const char* biaslab_version(void) { return biaslab::kVersion; }

const char* biaslab_last_error(void) { return last_error.c_str(); }

void biaslab_string_free(char* s) { delete[] s; }

biaslab_status biaslab_expected_error(const char* rule, double beta, double mu, double theta, double* out) {
    if (!rule || !out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const std::string name = rule;
        if (!(theta >= 0.0)) throw std::invalid_argument("theta must be non-negative");
        if (name == "ddpg") {
            *out = mu;
        } else if (name == "td3" || name == "clipped_double") {
            *out = biaslab::expected_min2_equal_means(mu, theta);
        } else if (name == "tcd3") {
            *out = biaslab::expected_tcu_error(mu, theta);
        } else if (name == "wd3" || name == "tadd") {
            if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
            *out = biaslab::expected_weighted_error(beta, mu, theta);
        } else {
            throw std::invalid_argument("unknown rule '" + name + "'");
        }
    });
}

biaslab_status biaslab_expected_min2(double mu1, double mu2, double sigma1, double sigma2, double rho, double* out) {
    if (!out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = biaslab::expected_min2(biaslab::CorrelatedGaussianSpec::make({mu1, mu2}, {sigma1, sigma2}, rho));
    });
}

biaslab_status biaslab_mc_oracle(const double* mu, const double* sigma, size_t n_vars, double rho,
                                 const char* statistic, double beta, uint64_t n, uint64_t seed, double* mean,
                                 double* standard_error) {
    if (!mu || !sigma || !statistic || !mean || !standard_error) {
        return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    }
    return guarded([&] {
        const auto spec = biaslab::CorrelatedGaussianSpec::make(std::vector<double>(mu, mu + n_vars),
                                                                std::vector<double>(sigma, sigma + n_vars), rho);
        const auto est = biaslab::mc_order_stat_oracle(spec, {parse_statistic(statistic), beta}, n, seed);
        *mean = est.mean;
        *standard_error = est.standard_error;
    });
}

biaslab_status biaslab_config_load(const char* path, biaslab_config** out) {
    if (!path || !out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = new biaslab_config{biaslab::load_config(path)}; });
}

biaslab_status biaslab_config_parse(const char* json_text, biaslab_config** out) {
    if (!json_text || !out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = new biaslab_config{biaslab::parse_config(json_text)}; });
}

biaslab_status biaslab_config_default(biaslab_config** out) {
    if (!out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = new biaslab_config{}; });
}

biaslab_status biaslab_config_set_seed(biaslab_config* config, uint64_t seed) {
    if (!config) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { config->value.seeds = {seed}; });
}

biaslab_status biaslab_config_set_output_dir(biaslab_config* config, const char* dir) {
    if (!config || !dir) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    if (*dir == '\0') return fail(BIASLAB_ERR_CONFIG, "output directory must not be empty");
    return guarded([&] { config->value.output_dir = dir; });
}

biaslab_status biaslab_config_output_dir(const biaslab_config* config, char** out) {
    if (!config || !out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = duplicate(config->value.output_dir); });
}

biaslab_status biaslab_config_to_json(const biaslab_config* config, char** out) {
    if (!config || !out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] { *out = duplicate(biaslab::to_json_string(config->value)); });
}

void biaslab_config_free(biaslab_config* config) { delete config; }

biaslab_status biaslab_run_train(const biaslab_config* config, int verbose) {
    if (!config) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return command([&] {
        config->value.validate();
        biaslab::run_train(config->value, verbose ? &std::cerr : nullptr);
    });
}

biaslab_status biaslab_run_bias(const biaslab_config* config, int verbose) {
    if (!config) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return command([&] {
        config->value.validate();
        biaslab::run_bias(config->value, verbose ? &std::cerr : nullptr);
    });
}

biaslab_status biaslab_run_closed_form(const biaslab_config* config, int verbose) {
    if (!config) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return command([&] {
        const auto rows = biaslab::run_closed_form(config->value);
        if (verbose) {
            std::cerr << "closed-form: " << rows.size() << " rows -> " << config->value.output_dir
                      << "/closed_form.csv\n";
        }
    });
}

biaslab_status biaslab_run_compare(const char* const* dirs, size_t n_dirs, char** csv_out, char** table_out) {
    if (!dirs || n_dirs == 0) return fail(BIASLAB_ERR_ARGUMENT, "no directories given");
    return command([&] {
        std::vector<std::filesystem::path> roots;
        for (size_t i = 0; i < n_dirs; ++i) {
            if (!dirs[i]) throw std::runtime_error("null directory");
            roots.emplace_back(dirs[i]);
        }
        const auto rows = biaslab::compare_runs(roots);
        if (csv_out) {
            std::ostringstream os;
            biaslab::write_compare_csv(os, rows);
            *csv_out = duplicate(os.str());
        }
        if (table_out) {
            *table_out = duplicate(biaslab::format_compare_table(rows));
        }
    });
}

biaslab_status biaslab_env_create(double reward_noise, int max_episode_steps, uint64_t seed, biaslab_env** out) {
    if (!out) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new biaslab_env{biaslab::Pendulum(biaslab::EnvSpec::pendulum(reward_noise, max_episode_steps), seed)};
    });
}

biaslab_status biaslab_env_reset(biaslab_env* env, double observation[3]) {
    if (!env || !observation) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const biaslab::Vector obs = env->value.reset();
        for (int i = 0; i < 3; ++i) observation[i] = obs(i);
    });
}

biaslab_status biaslab_env_step(biaslab_env* env, double action, double observation[3], double* reward,
                                int* terminal) {
    if (!env || !observation || !reward || !terminal) return fail(BIASLAB_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const biaslab::StepResult r = env->value.step(biaslab::Vector::Constant(1, action));
        for (int i = 0; i < 3; ++i) observation[i] = r.observation(i);
        *reward = r.reward;
        *terminal = r.terminal ? 1 : 0;
    });
}

void biaslab_env_free(biaslab_env* env) { delete env; }

}  // extern "C"
