#include "mfopt/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mfopt;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mfopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string first_line(const std::string& name) const {
    const auto s = slurp(name);
    return s.substr(0, s.find('\n'));
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(Config, ParsesKnownKeys) {
  const auto cfg = parse_config(R"({"model": "benyahia", "a": 2, "horizon": 10, "n_t": 101})");
  EXPECT_EQ(cfg.model, "benyahia");
  EXPECT_EQ(cfg.params.at("a"), 2.0);
  EXPECT_EQ(cfg.params.at("b"), 1.0);
  EXPECT_EQ(cfg.horizon, 10.0);
  EXPECT_EQ(cfg.grid.n_t, 101u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"modle": "cogan"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"a": "one"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"horizon": -1})"), ConfigError);
}

TEST(Schedule, ParsesRowsAndHeader) {
  const auto s = parse_schedule("t_start,u\n0,-1\n2.5, 0.5\n\n# note\n7,1\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1].t_start, 2.5);
  EXPECT_EQ(s[1].u, 0.5);
}

TEST(Schedule, RejectsBadRows) {
  EXPECT_THROW(parse_schedule(""), ConfigError);
  EXPECT_THROW(parse_schedule("0,1.5\n"), ConfigError);
  EXPECT_THROW(parse_schedule("0,1\n0,-1\n"), ConfigError);
  EXPECT_THROW(parse_schedule("0,1\nx,1\n"), ConfigError);
  EXPECT_THROW(parse_schedule("0 1\n"), ConfigError);
}

TEST_F(CliTest, SynthWritesFiles) {
  ASSERT_EQ(run({"--out", dir_.string(), "synth"}), 0) << err_.str();
  EXPECT_EQ(first_line("summary.csv"), "m_bar,u_bar,lambda_bar,m_bar_T,T_bar,branch");
  EXPECT_EQ(first_line("curve.csv"), "m,Ttilde,mT,dTtilde,kind");
  EXPECT_NE(slurp("curve.csv").find(",dispersal"), std::string::npos);
  EXPECT_NE(slurp("synthesis.svg").find("<svg"), std::string::npos);
  EXPECT_NE(out_.str().find("singular"), std::string::npos);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  ASSERT_EQ(run({"--out", dir_.string(), "synth"}), 0);
  const auto a = slurp("curve.csv"), b = slurp("synthesis.svg");
  ASSERT_EQ(run({"--out", dir_.string(), "synth"}), 0);
  EXPECT_EQ(a, slurp("curve.csv"));
  EXPECT_EQ(b, slurp("synthesis.svg"));
}

TEST_F(CliTest, SimulateFeedbackWithAdjoint) {
  ASSERT_EQ(run({"--out", dir_.string(), "--format", "csv", "simulate", "--m0", "8"}), 0)
      << err_.str();
  EXPECT_EQ(first_line("trajectory.csv"), "t,m,u,lambda,phi,H,J");
  EXPECT_EQ(first_line("events.csv"), "t,kind,m");
  EXPECT_NE(slurp("events.csv").find("hit_singular"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("trajectory.svg")));
}

TEST_F(CliTest, SimulateSchedule) {
  write("sched.csv", "t_start,u\n0,-1\n5,1\n");
  ASSERT_EQ(run({"--out", dir_.string(), "simulate", "--m0", "8", "--schedule", path("sched.csv")}),
            0)
      << err_.str();
  EXPECT_NE(slurp("events.csv").find("switch_up"), std::string::npos);
}

TEST_F(CliTest, BenyahiaDispersalIsEmpty) {
  write("cfg.json", R"({"model": "benyahia", "horizon": 10})");
  ASSERT_EQ(run({"--config", path("cfg.json"), "--out", dir_.string(), "dispersal"}), 0)
      << err_.str();
  EXPECT_NE(out_.str().find("C_d empty"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  write("bad.json", R"({"model": "cogan", "a": -1})");
  EXPECT_EQ(run({"--config", path("bad.json"), "--out", dir_.string(), "synth"}), 1);
  EXPECT_NE(err_.str().find("parameter a must be positive"), std::string::npos);
  EXPECT_EQ(run({"--out", dir_.string(), "simulate"}), 1);  // --m0 missing
  EXPECT_EQ(run({"--out", dir_.string(), "--format", "png", "synth"}), 1);
  EXPECT_EQ(run({"--out", dir_.string(), "simulate", "--m0", "8", "--control", "bogus"}), 1);
  EXPECT_EQ(run({}), 1);
}

TEST_F(CliTest, StrictAcceptsBuiltin) {
  EXPECT_EQ(run({"--out", dir_.string(), "--strict", "synth"}), 0);
  EXPECT_TRUE(err_.str().empty());
}
