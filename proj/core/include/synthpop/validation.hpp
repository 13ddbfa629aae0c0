#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "synthpop/assignment.hpp"
#include "synthpop/common.hpp"
#include "synthpop/spatial.hpp"

namespace synthpop {

struct ObservedTrip {
  std::size_t origin = 0;
  std::size_t destination = 0;
  Mode mode = Mode::Walk;
  double weight = 1.0;
  double distance = 0.0;  // OD matrix value between the two SA1s
};

struct ObservedDestination {
  std::size_t region = 0;
  Category category = Category::Work;
  double weight = 1.0;
};

/// Trips and destinations on the SA1 grid, from either the survey or a
/// generated diary.
struct Observations {
  std::vector<ObservedTrip> trips;
  std::vector<ObservedDestination> destinations;
};

Observations observations_from_survey(std::span<const LocatedTrip> trips);

/// Diary rows must be grouped by agent in item order. Rows in SA1s outside
/// the hierarchy are skipped and counted.
Observations observations_from_diary(std::span<const DiaryRow> rows, const RegionHierarchy& hierarchy,
                                     const ODMatrix& od, Diagnostics* diag = nullptr);

Observations observations_from_plans(std::span<const AssignedPlan> plans, const ODMatrix& od);

enum class Metric { LogMean, LogSd, AttractionShare, ModeShare };

std::string_view to_string(Metric m);

struct Sa3Comparison {
  std::string sa3;
  Metric metric = Metric::ModeShare;
  std::string key;  // mode or category name
  double expected = 0.0;
  double actual = 0.0;
  double abs_diff() const { return expected > actual ? expected - actual : actual - expected; }
};

/// Per SA3 expected (first argument) versus actual values of one metric.
/// Trips are attributed to the SA3 of their origin, destinations to their
/// own SA3. SA3s where either side has no data are left out and counted.
std::vector<Sa3Comparison> compare_sa3(const Observations& expected, const Observations& actual,
                                       const RegionHierarchy& hierarchy, Metric metric,
                                       Diagnostics* diag = nullptr);

struct ErrorRow {
  Metric metric = Metric::ModeShare;
  std::string key;
  std::vector<double> mean_abs_diff;  // one per fraction, in input order
};

/// Mean over SA3s of |expected - actual| per (metric, key) and fraction.
std::vector<ErrorRow> error_table(
    const std::vector<std::pair<double, std::vector<Sa3Comparison>>>& by_fraction);

void write_error_table(const std::filesystem::path& path, std::span<const double> fractions,
                       std::span<const ErrorRow> rows);

/// Weighted share of trips per 500 m distance bin for one mode.
std::vector<double> distance_histogram(const Observations& obs, Mode mode);

/// Writes distance_hist_<mode>.csv, sa3_distance_<mode>.csv,
/// sa3_attraction_<category>.csv and sa3_mode.csv into `dir`.
void write_report(const std::filesystem::path& dir, const Observations& expected,
                  const Observations& actual, const RegionHierarchy& hierarchy,
                  Diagnostics* diag = nullptr);

}  // namespace synthpop
