#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "synthpop/common.hpp"
#include "synthpop/fixture.hpp"
#include "synthpop/pipeline.hpp"

namespace {

using namespace synthpop;

struct Overrides {
  std::string config;
  std::optional<double> fraction;
  std::optional<int> bins;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cohorts;
  std::optional<double> bw_mode, bw_work, bw_park, bw_education, bw_commercial;
  std::optional<double> w_dist, w_attr;
  std::optional<std::string> output;
  bool with_replacement = false;
};

void add_config_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON config file");
  cmd->add_option("--fraction", o.fraction, "Census sample fraction in (0, 1]");
  cmd->add_option("--bins", o.bins, "Time bins per day (must divide 1440)");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--cohorts", o.cohorts, "Fixed cohort count (skips the gap statistic)");
  cmd->add_option("--bandwidth-mode", o.bw_mode, "Mode surface bandwidth (m)");
  cmd->add_option("--bandwidth-work", o.bw_work, "Work attraction bandwidth (m)");
  cmd->add_option("--bandwidth-park", o.bw_park, "Park attraction bandwidth (m)");
  cmd->add_option("--bandwidth-education", o.bw_education, "Education attraction bandwidth (m)");
  cmd->add_option("--bandwidth-commercial", o.bw_commercial,
                  "Commercial attraction bandwidth (m)");
  cmd->add_option("--w-dist", o.w_dist, "Distance weight in region choice");
  cmd->add_option("--w-attr", o.w_attr, "Attraction weight in region choice");
  cmd->add_option("-o,--output", o.output, "Output directory");
  cmd->add_flag("--with-replacement", o.with_replacement,
                "Reuse chains when a cohort has more persons than chains");
}

PipelineConfig resolve(const Overrides& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  PipelineConfig c = load_config(o.config);
  if (o.fraction) c.fraction = *o.fraction;
  if (o.bins) c.bins = *o.bins;
  if (o.seed) c.seed = *o.seed;
  if (o.cohorts) c.cohorts = *o.cohorts;
  if (o.bw_mode) c.bandwidths.mode = *o.bw_mode;
  if (o.bw_work) c.bandwidths.work = *o.bw_work;
  if (o.bw_park) c.bandwidths.park = *o.bw_park;
  if (o.bw_education) c.bandwidths.education = *o.bw_education;
  if (o.bw_commercial) c.bandwidths.commercial = *o.bw_commercial;
  if (o.w_dist) c.weights.w_dist = *o.w_dist;
  if (o.w_attr) c.weights.w_attr = *o.w_attr;
  if (o.output) c.output_dir = *o.output;
  if (o.with_replacement) c.with_replacement = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("synthpop"));
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  CLI::App app{"Synthetic population and activity plan generator"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  Overrides o;
  std::string stages = "all";
  auto* run = app.add_subcommand("run", "Run pipeline stages");
  add_config_options(run, o);
  run->add_option("--stages", stages, "Comma separated stages, or 'all'");

  std::vector<CLI::App*> aliases;
  for (Stage s : kAllStages) {
    if (s == Stage::Validate) continue;
    auto* cmd = app.add_subcommand(std::string(to_string(s)), fmt::format("Run the {} stage", to_string(s)));
    add_config_options(cmd, o);
    aliases.push_back(cmd);
  }

  std::vector<double> fractions;
  std::size_t repeats = 3;
  auto* validate = app.add_subcommand(
      "validate", "Compare the diary with the survey; --fractions adds a sample-size study");
  add_config_options(validate, o);
  validate->add_option("--fractions", fractions, "Sample fractions for the study")
      ->delimiter(',');
  validate->add_option("--repeats", repeats, "Seeds averaged per fraction")
      ->check(CLI::PositiveNumber);

  std::vector<double> mode_bws{250, 500, 750, 1000, 1500, 2000};
  std::vector<double> attr_bws{100, 200, 300, 500, 1000, 2000, 3200, 5000, 10000, 20000};
  auto* calibrate = app.add_subcommand("calibrate", "Sweep KDE bandwidths against the survey");
  add_config_options(calibrate, o);
  calibrate->add_option("--mode-bandwidths", mode_bws)->delimiter(',');
  calibrate->add_option("--attraction-bandwidths", attr_bws)->delimiter(',');

  auto* info = app.add_subcommand("info", "Print artifact schemas");

  std::string fixture_dir;
  FixtureOptions fopts;
  auto* fixture = app.add_subcommand("fixture", "Write the synthetic test city");
  fixture->add_option("dir", fixture_dir, "Target directory")->required();
  fixture->add_option("--census-persons", fopts.census_persons);
  fixture->add_option("--survey-persons", fopts.survey_persons);
  fixture->add_option("--fixture-seed", fopts.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    Diagnostics diag;
    if (info->parsed()) {
      std::cout << artifact_schemas();
    } else if (fixture->parsed()) {
      const auto paths = write_fixture(fixture_dir, fopts);
      std::cout << paths.config.string() << '\n';
    } else if (run->parsed()) {
      run_pipeline(resolve(o), parse_stages(stages), &diag);
    } else if (validate->parsed()) {
      const auto config = resolve(o);
      run_stage(config, Stage::Validate, &diag);
      if (!fractions.empty()) {
        const auto rows = sample_size_study(config, fractions, repeats, &diag);
        write_error_table(config.output_dir / "report" / "sample_size.csv", fractions, rows);
        spdlog::info("stage=validate wrote {}",
                     (config.output_dir / "report" / "sample_size.csv").string());
      }
    } else if (calibrate->parsed()) {
      const auto config = resolve(o);
      const auto rows = calibrate_bandwidths(config, mode_bws, attr_bws, &diag);
      write_calibration(config.output_dir / "report" / "calibration.csv", rows);
      for (const auto& r : rows) {
        std::cout << fmt::format("{},{},{},{:.6g}\n", r.kind, r.category, r.bandwidth,
                                 r.mean_abs_error);
      }
    } else {
      for (std::size_t i = 0; i < aliases.size(); ++i) {
        if (aliases[i]->parsed()) run_stage(resolve(o), *parse_stage(aliases[i]->get_name()), &diag);
      }
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 4;
  }
  return 0;
}
