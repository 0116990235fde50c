#include "biaslab/biaslab.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

std::string take(char* s) {
    std::string out(s ? s : "");
    biaslab_string_free(s);
    return out;
}

}  // namespace

TEST(CApi, Version) { EXPECT_STREQ(biaslab_version(), "0.1.0"); }

TEST(CApi, ExpectedErrors) {
    double v = 0.0;
    ASSERT_EQ(biaslab_expected_error("td3", 0.0, 1.0, 2.0, &v), BIASLAB_OK);
    EXPECT_NEAR(v, 1.0 - 2.0 / kSqrt2Pi, 1e-15);
    ASSERT_EQ(biaslab_expected_error("ddpg", 0.0, 1.0, 2.0, &v), BIASLAB_OK);
    EXPECT_EQ(v, 1.0);
    ASSERT_EQ(biaslab_expected_error("tcd3", 0.0, 0.0, 2.0, &v), BIASLAB_OK);
    EXPECT_NEAR(v, -1.0 / kSqrt2Pi, 1e-15);
    ASSERT_EQ(biaslab_expected_error("wd3", 0.25, 0.0, 2.0, &v), BIASLAB_OK);
    EXPECT_NEAR(v, -0.5 / kSqrt2Pi, 1e-15);
    ASSERT_EQ(biaslab_expected_min2(1.0, 0.0, 1.0, 1.0, 0.0, &v), BIASLAB_OK);
    EXPECT_LT(v, 0.0);
}

TEST(CApi, ArgumentErrors) {
    double v = 0.0;
    EXPECT_EQ(biaslab_expected_error("sac", 0.0, 0.0, 1.0, &v), BIASLAB_ERR_ARGUMENT);
    EXPECT_NE(std::string(biaslab_last_error()).find("sac"), std::string::npos);
    EXPECT_EQ(biaslab_expected_error("wd3", 2.0, 0.0, 1.0, &v), BIASLAB_ERR_ARGUMENT);
    EXPECT_EQ(biaslab_expected_error(nullptr, 0.0, 0.0, 1.0, &v), BIASLAB_ERR_ARGUMENT);
    EXPECT_EQ(biaslab_expected_error("td3", 0.0, 0.0, 1.0, nullptr), BIASLAB_ERR_ARGUMENT);
    EXPECT_EQ(biaslab_expected_min2(0.0, 0.0, -1.0, 1.0, 0.0, &v), BIASLAB_ERR_ARGUMENT);
}

TEST(CApi, MonteCarloOracle) {
    const double mu[2] = {0.0, 0.0};
    const double sigma[2] = {1.0, 1.0};
    double mean = 0.0, se = 0.0;
    ASSERT_EQ(biaslab_mc_oracle(mu, sigma, 2, 0.0, "min2", 0.0, 1000000, 3, &mean, &se), BIASLAB_OK);
    EXPECT_LE(std::abs(mean + std::sqrt(2.0) / kSqrt2Pi), 4.0 * se);
    double again = 0.0;
    ASSERT_EQ(biaslab_mc_oracle(mu, sigma, 2, 0.0, "min2", 0.0, 1000000, 3, &again, &se), BIASLAB_OK);
    EXPECT_EQ(mean, again);
    EXPECT_EQ(biaslab_mc_oracle(mu, sigma, 2, 0.0, "median", 0.0, 100000, 3, &mean, &se), BIASLAB_ERR_ARGUMENT);
    EXPECT_EQ(biaslab_mc_oracle(mu, sigma, 2, 0.0, "min2", 0.0, 10, 3, &mean, &se), BIASLAB_ERR_ARGUMENT);
    const double mu3[3] = {0.0, 0.0, 0.0};
    const double sigma3[3] = {1.0, 1.0, 1.0};
    EXPECT_EQ(biaslab_mc_oracle(mu3, sigma3, 3, -0.9, "max3", 0.0, 100000, 3, &mean, &se), BIASLAB_ERR_ARGUMENT);
}

TEST(CApi, ConfigLifecycle) {
    biaslab_config* c = nullptr;
    ASSERT_EQ(biaslab_config_parse(R"({"rule": {"name": "swtd3"}, "seeds": [3, 4]})", &c), BIASLAB_OK);
    ASSERT_EQ(biaslab_config_set_seed(c, 9), BIASLAB_OK);
    ASSERT_EQ(biaslab_config_set_output_dir(c, "elsewhere"), BIASLAB_OK);
    char* dir = nullptr;
    ASSERT_EQ(biaslab_config_output_dir(c, &dir), BIASLAB_OK);
    EXPECT_EQ(take(dir), "elsewhere");
    char* json = nullptr;
    ASSERT_EQ(biaslab_config_to_json(c, &json), BIASLAB_OK);
    const std::string text = take(json);
    biaslab_config_free(c);

    biaslab_config* back = nullptr;
    ASSERT_EQ(biaslab_config_parse(text.c_str(), &back), BIASLAB_OK);
    ASSERT_EQ(biaslab_config_to_json(back, &json), BIASLAB_OK);
    EXPECT_EQ(take(json), text);
    biaslab_config_free(back);
    biaslab_config_free(nullptr);
}

TEST(CApi, ConfigErrors) {
    biaslab_config* c = nullptr;
    EXPECT_EQ(biaslab_config_parse(R"({"rule": {"nmae": "td3"}})", &c), BIASLAB_ERR_CONFIG);
    EXPECT_EQ(c, nullptr);
    EXPECT_NE(std::string(biaslab_last_error()).find("rule.nmae"), std::string::npos);
    EXPECT_EQ(biaslab_config_load("/nonexistent/biaslab.json", &c), BIASLAB_ERR_CONFIG);
    ASSERT_EQ(biaslab_config_default(&c), BIASLAB_OK);
    EXPECT_EQ(biaslab_run_compare(nullptr, 0, nullptr, nullptr), BIASLAB_ERR_ARGUMENT);
    biaslab_config_free(c);
}

TEST(CApi, ClosedFormAndCompareCommands) {
    const fs::path root = fs::temp_directory_path() / ("biaslab_capi_" + std::to_string(::getpid()));
    fs::remove_all(root);
    biaslab_config* c = nullptr;
    ASSERT_EQ(biaslab_config_parse(R"({"closed_form": {"beta": [0.5], "mc_samples": 10000}})", &c), BIASLAB_OK);
    ASSERT_EQ(biaslab_config_set_output_dir(c, root.c_str()), BIASLAB_OK);
    ASSERT_EQ(biaslab_run_closed_form(c, 0), BIASLAB_OK);
    EXPECT_TRUE(fs::exists(root / "closed_form.csv"));
    biaslab_config_free(c);

    ASSERT_EQ(biaslab_config_parse(R"({"total_steps": 200, "eval_every": 100, "eval_episodes": 1,
        "agent": {"hidden": 8, "batch_size": 8, "warmup_steps": 50}})", &c), BIASLAB_OK);
    const std::string runs = (root / "runs").string();
    ASSERT_EQ(biaslab_config_set_output_dir(c, runs.c_str()), BIASLAB_OK);
    ASSERT_EQ(biaslab_run_train(c, 0), BIASLAB_OK);
    biaslab_config_free(c);
    const char* dirs[1] = {runs.c_str()};
    char* csv = nullptr;
    char* table = nullptr;
    ASSERT_EQ(biaslab_run_compare(dirs, 1, &csv, &table), BIASLAB_OK);
    EXPECT_EQ(take(csv).rfind("rule,seeds,mean,std\ntd3,1,", 0), 0u);
    EXPECT_NE(take(table).find("td3"), std::string::npos);
    const char* missing[1] = {"/nonexistent/runs"};
    EXPECT_EQ(biaslab_run_compare(missing, 1, nullptr, nullptr), BIASLAB_ERR_RUNTIME);
    fs::remove_all(root);
}

TEST(CApi, EnvHandle) {
    biaslab_env* a = nullptr;
    biaslab_env* b = nullptr;
    ASSERT_EQ(biaslab_env_create(0.0, 3, 11, &a), BIASLAB_OK);
    ASSERT_EQ(biaslab_env_create(0.0, 3, 11, &b), BIASLAB_OK);
    double oa[3], ob[3];
    ASSERT_EQ(biaslab_env_reset(a, oa), BIASLAB_OK);
    ASSERT_EQ(biaslab_env_reset(b, ob), BIASLAB_OK);
    EXPECT_NEAR(oa[0] * oa[0] + oa[1] * oa[1], 1.0, 1e-15);
    for (int i = 1; i <= 3; ++i) {
        double ra = 0.0, rb = 0.0;
        int ta = 0, tb = 0;
        ASSERT_EQ(biaslab_env_step(a, 0.5, oa, &ra, &ta), BIASLAB_OK);
        ASSERT_EQ(biaslab_env_step(b, 0.5, ob, &rb, &tb), BIASLAB_OK);
        EXPECT_EQ(ra, rb);
        EXPECT_LE(ra, 0.0);
        EXPECT_EQ(ta, i == 3 ? 1 : 0);
        for (int j = 0; j < 3; ++j) EXPECT_EQ(oa[j], ob[j]);
    }
    double r = 0.0;
    int t = 0;
    EXPECT_EQ(biaslab_env_step(a, std::nan(""), oa, &r, &t), BIASLAB_ERR_ARGUMENT);
    biaslab_env_free(a);
    biaslab_env_free(b);
    biaslab_env* bad = nullptr;
    EXPECT_EQ(biaslab_env_create(-1.0, 3, 1, &bad), BIASLAB_ERR_ARGUMENT);
    EXPECT_EQ(bad, nullptr);
    biaslab_env_free(nullptr);
}
