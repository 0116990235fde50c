#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("biaslab_cli_" + std::to_string(::getpid()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
        write(root_ / "tiny.json", R"({
  "rule": {"name": "td3"},
  "agent": {"hidden": 8, "batch_size": 8, "warmup_steps": 50},
  "seeds": [1, 2],
  "total_steps": 300,
  "eval_every": 100,
  "eval_episodes": 1,
  "bias": {"samples": 8, "cadence": 150, "horizon": 20},
  "closed_form": {"beta": [0.5], "mc_samples": 10000},
  "output_dir": ")" + (root_ / "from_config").string() + R"("
})");
    }
    void TearDown() override { fs::remove_all(root_); }

    static void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

    static std::string slurp(const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    int run(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + " '" + std::string(BIASLAB_CLI) + "' " + args + " >'" +
                                (root_ / "stdout.txt").string() + "' 2>'" + (root_ / "stderr.txt").string() + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string config() const { return "--config '" + (root_ / "tiny.json").string() + "'"; }
    std::string out(const std::string& name) const { return "--out '" + (root_ / name).string() + "'"; }

    fs::path root_;
};

}  // namespace

TEST_F(Cli, VersionAndUsage) {
    EXPECT_EQ(run("--version"), 0);
    EXPECT_NE(slurp(root_ / "stdout.txt").find("0.1.0"), std::string::npos);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("train"), 2);
    EXPECT_EQ(run("fly --config x"), 2);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(run("train --config '" + (root_ / "missing.json").string() + "'"), 2);
    write(root_ / "bad.json", R"({"rule": {"nmae": "td3"}})");
    EXPECT_EQ(run("train --config '" + (root_ / "bad.json").string() + "'"), 2);
    EXPECT_NE(slurp(root_ / "stderr.txt").find("rule.nmae"), std::string::npos);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
    EXPECT_EQ(run("compare '" + (root_ / "nothing_here").string() + "'"), 1);
    EXPECT_FALSE(slurp(root_ / "stderr.txt").empty());
}

TEST_F(Cli, TrainIsReproducible) {
    ASSERT_EQ(run("train --quiet " + config() + " " + out("a")), 0);
    ASSERT_EQ(run("train --quiet " + config() + " " + out("b")), 0);
    for (const char* seed : {"1", "2"}) {
        const std::string a = slurp(root_ / "a" / "td3" / seed / "run_log.csv");
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(root_ / "b" / "td3" / seed / "run_log.csv"));
        EXPECT_EQ(slurp(root_ / "a" / "td3" / seed / "checkpoint.txt"),
                  slurp(root_ / "b" / "td3" / seed / "checkpoint.txt"));
    }
}

TEST_F(Cli, SeedOverride) {
    ASSERT_EQ(run("train --quiet --seed 7 " + config() + " " + out("s")), 0);
    EXPECT_TRUE(fs::exists(root_ / "s" / "td3" / "7" / "run_log.csv"));
    EXPECT_FALSE(fs::exists(root_ / "s" / "td3" / "1"));
}

TEST_F(Cli, OutputRootPrecedence) {
    const std::string env = "BIASLAB_OUTPUT_ROOT='" + (root_ / "from_env").string() + "'";
    ASSERT_EQ(run("train --quiet --seed 1 " + config() + " " + out("from_flag"), env), 0);
    EXPECT_TRUE(fs::exists(root_ / "from_flag" / "td3" / "1" / "run_log.csv"));
    EXPECT_FALSE(fs::exists(root_ / "from_env"));
    ASSERT_EQ(run("train --quiet --seed 1 " + config(), env), 0);
    EXPECT_TRUE(fs::exists(root_ / "from_env" / "td3" / "1" / "run_log.csv"));
    EXPECT_FALSE(fs::exists(root_ / "from_config"));
    ASSERT_EQ(run("train --quiet --seed 1 " + config(), "env -u BIASLAB_OUTPUT_ROOT"), 0);
    EXPECT_TRUE(fs::exists(root_ / "from_config" / "td3" / "1" / "run_log.csv"));
}

TEST_F(Cli, BiasClosedFormAndCompare) {
    ASSERT_EQ(run("bias --quiet " + config() + " " + out("r")), 0);
    EXPECT_TRUE(fs::exists(root_ / "r" / "td3" / "nu0" / "2" / "bias.csv"));
    ASSERT_EQ(run("closed-form --quiet " + config() + " " + out("cf")), 0);
    EXPECT_TRUE(fs::exists(root_ / "cf" / "closed_form.csv"));
    const fs::path csv = root_ / "summary.csv";
    ASSERT_EQ(run("compare '" + (root_ / "r").string() + "' --csv '" + csv.string() + "'"), 0);
    EXPECT_EQ(slurp(csv).rfind("rule,seeds,mean,std\ntd3/nu0,2,", 0), 0u);
    EXPECT_NE(slurp(root_ / "stdout.txt").find("td3/nu0"), std::string::npos);
}
