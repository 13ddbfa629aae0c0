#include <cstdlib>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/fixture.hpp"
#include "synthpop/pipeline.hpp"

using namespace synthpop;
namespace fs = std::filesystem;

namespace {

FixtureOptions small_city() {
  FixtureOptions o;
  o.census_persons = 80;
  o.survey_persons = 600;
  return o;
}

PipelineConfig small_config(const FixturePaths& paths, const fs::path& out) {
  auto c = load_config(paths.config);
  c.output_dir = out;
  c.cohorts = 2;
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SYNTHPOP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ResolvesRelativePathsAndRejectsUnknownKeys) {
  testing_util::TempDir dir("config");
  testing_util::write_text(dir / "sub/c.json",
                           R"({"trip_table": "t.csv", "census_dir": "census", "fraction": 0.5,
                               "bandwidths": {"mode": 900}, "day": "weekend"})");
  const auto c = load_config(dir / "sub/c.json");
  EXPECT_EQ(c.trip_table, dir / "sub/t.csv");
  EXPECT_EQ(c.census_dir, dir / "sub/census");
  EXPECT_DOUBLE_EQ(c.fraction, 0.5);
  EXPECT_DOUBLE_EQ(c.bandwidths.mode, 900);
  EXPECT_EQ(c.day, DayFilter::Weekend);

  testing_util::write_text(dir / "bad.json", R"({"fracton": 0.5})");
  try {
    load_config(dir / "bad.json");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fracton"), std::string::npos);
  }
  testing_util::write_text(dir / "bad2.json", R"({"bandwidths": {"mood": 1}})");
  EXPECT_THROW(load_config(dir / "bad2.json"), ConfigError);
  EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Config, ValidatesRanges) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.fraction = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.fraction = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c.fraction = 1.0;
  c.bins = 7;
  EXPECT_THROW(c.validate(), ConfigError);
  c.bins = 96;
  c.bandwidths.park = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Stages, ParseNamesAndLists) {
  EXPECT_EQ(parse_stage("assign"), Stage::Assign);
  EXPECT_FALSE(parse_stage("assignment").has_value());
  EXPECT_EQ(parse_stages("all").size(), kAllStages.size());
  EXPECT_EQ(parse_stages("plans,ingest"), (std::set<Stage>{Stage::Ingest, Stage::Plans}));
  EXPECT_THROW(parse_stages("ingest,nope"), ConfigError);
  EXPECT_NE(artifact_schemas().find("diary.csv"), std::string::npos);
}

TEST(Stages, MissingUpstreamArtifactNamesTheStage) {
  testing_util::TempDir dir("missing");
  const auto paths = write_fixture(dir / "city", small_city());
  const auto c = small_config(paths, dir / "out");
  try {
    run_stage(c, Stage::Plans);
    FAIL() << "plans ran without inputs";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run stage 'ingest' first"), std::string::npos) << e.what();
  }
}

TEST(Stages, FailingStageRemovesItsArtifacts) {
  testing_util::TempDir dir("cleanup");
  const auto paths = write_fixture(dir / "city", small_city());
  auto c = small_config(paths, dir / "out");
  run_stage(c, Stage::Ingest);
  run_stage(c, Stage::Cohorts);
  testing_util::write_text(dir / "out/sampled_persons.csv", "stale\n");
  c.census_dir = dir / "nowhere";
  EXPECT_THROW(run_stage(c, Stage::Sample), ConfigError);
  EXPECT_FALSE(fs::exists(dir / "out/sampled_persons.csv"));
  EXPECT_TRUE(fs::exists(dir / "out/cohorts.csv"));
}

TEST(Pipeline, SameSeedGivesIdenticalDiary) {
  testing_util::TempDir dir("determinism");
  const auto paths = write_fixture(dir / "city", small_city());
  const auto a = small_config(paths, dir / "a");
  auto b = small_config(paths, dir / "b");
  run_pipeline(a, parse_stages("all"));
  run_pipeline(b, parse_stages("all"));
  const auto da = testing_util::read_text(dir / "a/diary.csv");
  EXPECT_FALSE(da.empty());
  EXPECT_EQ(da, testing_util::read_text(dir / "b/diary.csv"));
  EXPECT_EQ(testing_util::read_text(dir / "a/plans.csv"), testing_util::read_text(dir / "b/plans.csv"));
  for (const auto& rel : stage_artifacts(Stage::Validate)) EXPECT_TRUE(fs::exists(dir / "a" / rel)) << rel;

  // Rerunning a single stage from existing artifacts reproduces it.
  run_stage(b, Stage::Assign);
  EXPECT_EQ(da, testing_util::read_text(dir / "b/diary.csv"));
}

TEST(Cli, ExitCodes) {
  testing_util::TempDir dir("cli");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("fixture " + (dir / "city").string() + " --census-persons 40 --survey-persons 300", log), 0);
  ASSERT_TRUE(fs::exists(dir / "city/config.json"));
  EXPECT_EQ(run_cli("run", log), 2);
  EXPECT_EQ(run_cli("run -c " + (dir / "nope.json").string(), log), 2);
  EXPECT_EQ(run_cli("bogus", log), 2);
  EXPECT_EQ(run_cli("assign -c " + (dir / "city/config.json").string(), log), 2);
  EXPECT_NE(testing_util::read_text(log).find("run stage 'plans' first"), std::string::npos);
  EXPECT_EQ(run_cli("ingest -c " + (dir / "city/config.json").string() + " --fraction 2", log), 2);
  testing_util::write_text(dir / "city/trips.csv", "PERSID\nx\n");
  EXPECT_EQ(run_cli("ingest -c " + (dir / "city/config.json").string(), log), 3);
  EXPECT_EQ(run_cli("info", log), 0);
  EXPECT_NE(testing_util::read_text(log).find("diary.csv"), std::string::npos);
}
