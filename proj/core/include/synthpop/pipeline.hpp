#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "synthpop/assignment.hpp"
#include "synthpop/common.hpp"
#include "synthpop/population.hpp"
#include "synthpop/spatial.hpp"
#include "synthpop/survey.hpp"
#include "synthpop/validation.hpp"

namespace synthpop {

struct PipelineConfig {
  std::filesystem::path trip_table;
  std::filesystem::path census_dir;
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path meshblocks;
  std::optional<std::filesystem::path> addresses;
  std::filesystem::path output_dir = "synthpop-out";

  double fraction = 0.1;
  int bins = 48;
  std::optional<std::size_t> cohorts;  // fixed cohort count, skips the gap statistic
  std::size_t k_max = 10;
  std::size_t gap_references = 50;
  std::uint64_t seed = 1;
  DayFilter day = DayFilter::Weekday;
  Bandwidths bandwidths;
  AssignmentOptions weights;
  std::size_t nearest_trips = kNearestTrips;
  bool with_replacement = false;

  TripSchema trip_schema;
  CensusSchema census_schema;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Reads a JSON config. Relative paths are resolved against the file's
/// directory; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);

enum class Stage { Ingest, Cohorts, Sample, Plans, Spatial, Assign, Validate };

inline constexpr std::array<Stage, 7> kAllStages = {Stage::Ingest, Stage::Cohorts, Stage::Sample,
                                                    Stage::Plans,  Stage::Spatial, Stage::Assign,
                                                    Stage::Validate};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view name);
/// Comma separated stage list; "all" selects every stage.
std::set<Stage> parse_stages(std::string_view list);

/// Files a stage writes, relative to the output directory.
std::vector<std::filesystem::path> stage_artifacts(Stage s);

/// Runs the selected stages in dependency order. A stage whose inputs are
/// missing fails with "run stage '<name>' first". Artifacts of a failing
/// stage are removed.
void run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages,
                  Diagnostics* diag = nullptr);

void run_stage(const PipelineConfig& config, Stage stage, Diagnostics* diag = nullptr);

/// Mean absolute SA3 error per metric at several sample fractions, re-running
/// sample, plans and assign in memory from the existing ingest, cohort and
/// spatial artifacts. Each fraction is averaged over `repeats` seeds.
std::vector<ErrorRow> sample_size_study(const PipelineConfig& config,
                                        const std::vector<double>& fractions,
                                        std::size_t repeats = 1, Diagnostics* diag = nullptr);

struct CalibrationRow {
  std::string kind;      // "mode" or "attraction"
  std::string category;  // category name, or "all" for modes
  double bandwidth = 0.0;
  double mean_abs_error = 0.0;
};

/// Bandwidth sweep against survey SA3 aggregates, using the spatial artifacts.
std::vector<CalibrationRow> calibrate_bandwidths(const PipelineConfig& config,
                                                 const std::vector<double>& mode_bandwidths,
                                                 const std::vector<double>& attraction_bandwidths,
                                                 Diagnostics* diag = nullptr);

void write_calibration(const std::filesystem::path& path, std::span<const CalibrationRow> rows);

/// Human-readable description of every artifact and its columns.
std::string artifact_schemas();

}  // namespace synthpop
