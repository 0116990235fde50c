// biaslab train|bias|closed-form|compare
//
// Exit codes: 0 success, 2 configuration or usage error, 1 runtime error.

#include "biaslab/biaslab.h"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

int exit_code(biaslab_status status) {
    switch (status) {
        case BIASLAB_OK: return kExitOk;
        case BIASLAB_ERR_CONFIG: return kExitConfig;
        default: return kExitRuntime;
    }
}

int report(biaslab_status status) {
    if (status != BIASLAB_OK) {
        std::cerr << "biaslab: " << biaslab_last_error() << "\n";
    }
    return exit_code(status);
}

struct ConfigDeleter {
    void operator()(biaslab_config* c) const { biaslab_config_free(c); }
};
using ConfigPtr = std::unique_ptr<biaslab_config, ConfigDeleter>;

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool quiet = false;
};

// Output root precedence: --out, then BIASLAB_OUTPUT_ROOT, then the config.
int load(const RunOptions& opts, ConfigPtr& config) {
    biaslab_config* raw = nullptr;
    biaslab_status status = biaslab_config_load(opts.config_path.c_str(), &raw);
    if (status != BIASLAB_OK) return report(status);
    config.reset(raw);
    if (opts.seed) {
        status = biaslab_config_set_seed(config.get(), *opts.seed);
        if (status != BIASLAB_OK) return report(status);
    }
    std::optional<std::string> out = opts.out;
    if (!out) {
        if (const char* env = std::getenv("BIASLAB_OUTPUT_ROOT"); env && *env) out = env;
    }
    if (out) {
        status = biaslab_config_set_output_dir(config.get(), out->c_str());
        if (status != BIASLAB_OK) return report(status);
    }
    return kExitOk;
}

void add_run_options(CLI::App* cmd, RunOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--seed", opts.seed, "Run this single seed instead of the config's list");
    cmd->add_option("--out", opts.out, "Output root (overrides BIASLAB_OUTPUT_ROOT and the config)");
    cmd->add_flag("--quiet", opts.quiet, "No progress lines");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimation-bias laboratory for deterministic policy gradients"};
    app.require_subcommand(1);
    app.set_version_flag("--version", biaslab_version());

    RunOptions train_opts;
    RunOptions bias_opts;
    RunOptions closed_opts;
    CLI::App* train = app.add_subcommand("train", "Train every configured seed and write run logs");
    CLI::App* bias = app.add_subcommand("bias", "Train with interleaved true-versus-estimated Q measurement");
    CLI::App* closed = app.add_subcommand("closed-form", "Tabulate analytic and Monte Carlo expected errors");
    add_run_options(train, train_opts);
    add_run_options(bias, bias_opts);
    add_run_options(closed, closed_opts);

    std::vector<std::string> compare_dirs;
    std::string compare_csv;
    CLI::App* compare = app.add_subcommand("compare", "Summarize last-10 evaluation returns per rule");
    compare->add_option("dirs", compare_dirs, "Run directories or roots to scan")->required();
    compare->add_option("--csv", compare_csv, "Also write the summary CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    auto run = [](const RunOptions& opts, biaslab_status (*fn)(const biaslab_config*, int)) {
        ConfigPtr config;
        if (const int rc = load(opts, config); rc != kExitOk) return rc;
        return report(fn(config.get(), opts.quiet ? 0 : 1));
    };

    if (train->parsed()) return run(train_opts, biaslab_run_train);
    if (bias->parsed()) return run(bias_opts, biaslab_run_bias);
    if (closed->parsed()) return run(closed_opts, biaslab_run_closed_form);

    std::vector<const char*> dirs;
    for (const auto& d : compare_dirs) dirs.push_back(d.c_str());
    char* csv = nullptr;
    char* table = nullptr;
    const biaslab_status status = biaslab_run_compare(dirs.data(), dirs.size(), &csv, &table);
    if (status != BIASLAB_OK) return report(status);
    std::cout << table;
    int rc = kExitOk;
    if (!compare_csv.empty()) {
        if (FILE* f = std::fopen(compare_csv.c_str(), "wb")) {
            std::fputs(csv, f);
            std::fclose(f);
        } else {
            std::cerr << "biaslab: cannot write " << compare_csv << "\n";
            rc = kExitRuntime;
        }
    } else {
        std::cout << "\n" << csv;
    }
    biaslab_string_free(csv);
    biaslab_string_free(table);
    return rc;
}
