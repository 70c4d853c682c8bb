#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "loader_rl/cli/commands.hpp"
#include "loader_rl/cli/plot.hpp"
#include "loader_rl/errors.hpp"
#include "loader_rl/trace.hpp"

namespace loader_rl::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("loader_rl_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  static std::string read(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  fs::path small_config() {
    return write("run.cfg",
                 "version = 1\n"
                 "train.n_steps = 512\n"
                 "train.batch_size = 128\n"
                 "train.n_epochs = 2\n"
                 "train.eval_every = 1\n"
                 "train.eval_episodes = 2\n");
  }

  fs::path dir_;
};

int data_rows(const std::string& csv) {
  int n = 0;
  std::istringstream is(csv);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

TEST_F(CliTest, TrainWritesMetricsAndCheckpoints) {
  TrainOptions o;
  o.config = small_config();
  o.out = dir_ / "out";
  o.total_timesteps = 1024;
  ASSERT_EQ(cmd_train(o), kExitOk);
  EXPECT_EQ(data_rows(read(dir_ / "out" / "metrics.csv")), 2);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "best.ckpt"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "final.ckpt"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "config.txt"));
}

TEST_F(CliTest, MissingVersionNamesTheKey) {
  TrainOptions o;
  o.config = write("bad.cfg", "seed = 1\n");
  o.out = dir_ / "out";
  try {
    load_run_config(o.config);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'version'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bad.cfg"), std::string::npos);
  }
  EXPECT_EQ(cmd_train(o), kExitValidation);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "metrics.csv"));
}

TEST_F(CliTest, MissingConfigFileIsIoError) {
  TrainOptions o;
  o.config = dir_ / "nope.cfg";
  EXPECT_EQ(cmd_train(o), kExitIo);
}

TEST_F(CliTest, EvalRejectsNonPositiveEpisodes) {
  EvalOptions o;
  o.source.oracle = true;
  o.episodes = 0;
  o.report = dir_ / "r.json";
  EXPECT_EQ(cmd_eval(o), kExitValidation);
  EXPECT_FALSE(fs::exists(o.report));
}

TEST_F(CliTest, EvalNeedsExactlyOnePolicySource) {
  EvalOptions o;
  o.report = dir_ / "r.json";
  EXPECT_EQ(cmd_eval(o), kExitValidation);
}

TEST_F(CliTest, OracleEvalReportsFullSuccess) {
  EvalOptions o;
  o.source.oracle = true;
  o.episodes = 100;
  o.seed = 5;
  o.report = dir_ / "r.json";
  ASSERT_EQ(cmd_eval(o), kExitOk);
  const auto j = nlohmann::json::parse(read(o.report));
  EXPECT_EQ(j["format"], "loader_rl-eval v1");
  EXPECT_EQ(j["policy"], "oracle");
  EXPECT_EQ(j["all"]["episodes"], 100);
  EXPECT_EQ(j["all"]["success_rate"], 1.0);
  EXPECT_EQ(j["episodes"].size(), 100u);
  const int regular = j["regular"]["episodes"], degenerate = j["degenerate"]["episodes"];
  EXPECT_EQ(regular + degenerate, 100);
  // byte-identical on a rerun
  const std::string first = read(o.report);
  ASSERT_EQ(cmd_eval(o), kExitOk);
  EXPECT_EQ(read(o.report), first);
}

TEST_F(CliTest, EvalChecksConfigAgainstCheckpoint) {
  TrainOptions t;
  t.config = small_config();
  t.out = dir_ / "out";
  t.total_timesteps = 512;
  ASSERT_EQ(cmd_train(t), kExitOk);
  EvalOptions o;
  o.source.checkpoint = dir_ / "out" / "final.ckpt";
  o.episodes = 3;
  o.report = dir_ / "r.json";
  ASSERT_EQ(cmd_eval(o), kExitOk);
  EXPECT_EQ(nlohmann::json::parse(read(o.report))["policy"], "checkpoint");
  o.source.config = write("other.cfg", "version = 1\nenv.vicinity = 2.0\n");
  EXPECT_EQ(cmd_eval(o), kExitValidation);
  // a corrupted checkpoint is a format error
  std::string bytes = read(dir_ / "out" / "final.ckpt");
  bytes[bytes.size() / 2] ^= 1;
  std::ofstream(dir_ / "bad.ckpt", std::ios::binary) << bytes;
  o.source.config.reset();
  o.source.checkpoint = dir_ / "bad.ckpt";
  EXPECT_EQ(cmd_eval(o), kExitIo);
}

TEST_F(CliTest, ReplayWritesOneRowPerStep) {
  ReplayOptions o;
  o.source.oracle = true;
  o.seed = 4;
  o.trace = dir_ / "t.csv";
  ASSERT_EQ(cmd_replay(o), kExitOk);
  std::ifstream is(o.trace);
  const EpisodeTrace t = read_trace_csv(is);
  ASSERT_FALSE(t.rows.empty());
  EXPECT_EQ(t.rows.back().step, static_cast<long>(t.rows.size()));
  EXPECT_EQ(t.rows.back().outcome, Outcome::Success);
}

TEST_F(CliTest, DegenerateEmulationMatchesReplay) {
  ReplayOptions r;
  r.source.oracle = true;
  r.seed = 6;
  r.trace = dir_ / "replay.csv";
  ASSERT_EQ(cmd_replay(r), kExitOk);
  EmulateOptions e;
  e.source.oracle = true;
  e.seed = 6;
  e.trace = dir_ / "emu.csv";
  e.delay = 0.0;
  e.rate_scale = 1.0;
  e.brake = BrakeModel::Ideal;
  e.pid = false;
  ASSERT_EQ(cmd_emulate(e), kExitOk);
  std::ifstream a(r.trace), b(e.trace);
  const EpisodeTrace ta = read_trace_csv(a), tb = read_trace_csv(b);
  ASSERT_EQ(ta.rows.size(), tb.rows.size());
  for (std::size_t i = 0; i < ta.rows.size(); ++i) {
    ASSERT_EQ(ta.rows[i].x, tb.rows[i].x);
    ASSERT_EQ(ta.rows[i].y, tb.rows[i].y);
    ASSERT_EQ(ta.rows[i].speed, tb.rows[i].speed);
    ASSERT_EQ(ta.rows[i].reward_total, tb.rows[i].reward_total);
  }
}

double meta_value(const std::string& csv, const std::string& key) {
  const std::string tag = "# " + key + "=";
  const auto pos = csv.find(tag);
  if (pos == std::string::npos) return std::nan("");
  return std::stod(csv.substr(pos + tag.size()));
}

TEST_F(CliTest, DelayIncreasesOvershoot) {
  EmulateOptions e;
  e.source.oracle = true;
  e.seed = 1;
  e.trace = dir_ / "d0.csv";
  e.delay = 0.0;
  ASSERT_EQ(cmd_emulate(e), kExitOk);
  e.trace = dir_ / "d3.csv";
  e.delay = 3.0;
  ASSERT_EQ(cmd_emulate(e), kExitOk);
  const double o0 = meta_value(read(dir_ / "d0.csv"), "rest_overshoot");
  const double o3 = meta_value(read(dir_ / "d3.csv"), "rest_overshoot");
  ASSERT_FALSE(std::isnan(o0));
  EXPECT_GT(o3, o0);
}

TEST_F(CliTest, NegativeDelayRejected) {
  EmulateOptions e;
  e.source.oracle = true;
  e.trace = dir_ / "x.csv";
  e.delay = -1.0;
  EXPECT_EQ(cmd_emulate(e), kExitValidation);
  EXPECT_FALSE(fs::exists(e.trace));
}

TEST_F(CliTest, PlotRendersPolyline) {
  const fs::path m = write("metrics.csv",
                           "# loader_rl-metrics v1\n# config_digest=abc\n"
                           "timestep,updates,ep_reward_mean\n"
                           "512,1,-0.5\n1024,2,1.5\n");
  PlotOptions o{m, dir_ / "plot.svg"};
  ASSERT_EQ(cmd_plot(o), kExitOk);
  const std::string svg = read(o.out);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  const auto poly = svg.find("<polyline");
  ASSERT_NE(poly, std::string::npos);
  const auto pts_start = svg.find("points=\"", poly) + 8;
  const std::string pts = svg.substr(pts_start, svg.find('"', pts_start) - pts_start);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 2);
  EXPECT_NE(svg.find("abc"), std::string::npos);
  // byte-identical on a rerun
  ASSERT_EQ(cmd_plot(o), kExitOk);
  EXPECT_EQ(read(o.out), svg);
}

TEST_F(CliTest, PlotRejectsEmptyAndMalformedMetrics) {
  PlotOptions o{write("empty.csv", ""), dir_ / "plot.svg"};
  EXPECT_EQ(cmd_plot(o), kExitIo);
  std::istringstream bad("timestep,ep_reward_mean\n512,abc\n");
  try {
    read_metrics_csv(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST_F(CliTest, PlotSkipsNanPoints) {
  std::istringstream is("timestep,ep_reward_mean\n512,nan\n1024,1\n1536,2\n");
  const MetricsFile m = read_metrics_csv(is);
  ASSERT_EQ(m.points.size(), 3u);
  EXPECT_TRUE(std::isnan(m.points[0].ep_reward_mean));
  const std::string svg = render_reward_svg(m);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

}  // namespace
}  // namespace loader_rl::cli
