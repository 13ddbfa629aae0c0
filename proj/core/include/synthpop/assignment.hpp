#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthpop/chains.hpp"
#include "synthpop/common.hpp"
#include "synthpop/population.hpp"
#include "synthpop/rng.hpp"
#include "synthpop/spatial.hpp"

namespace synthpop {

struct AssignmentOptions {
  double w_dist = 0.4;
  double w_attr = 0.6;
};

/// Realised SA3 counts of assigned destinations and trip distances.
class GlobalTallies {
 public:
  GlobalTallies() = default;
  explicit GlobalTallies(const RegionHierarchy& hierarchy);

  void add_destination(std::size_t sa3, Category c);
  void add_trip(std::size_t origin_sa3, Mode m, double distance);

  /// Realised share of category c destinations in `sa3` (0 when empty).
  double attraction_share(Category c, std::size_t sa3) const;
  /// Realised share of trips from `sa3` by mode m in 500 m bin `bin`.
  double distance_share(std::size_t sa3, Mode m, std::size_t bin) const;

 private:
  std::array<std::vector<double>, kNumCategories> attraction_;
  std::array<double, kNumCategories> attraction_total_{};
  std::vector<std::array<std::vector<double>, kNumModes>> distance_;
  std::vector<std::array<double, kNumModes>> distance_total_;
};

/// Location category of an activity. Activities listed under several
/// categories draw one uniformly. Mode Change has no category of its own and
/// maps to nullopt.
std::optional<Category> map_activity_to_location_type(Activity a, Rng& rng);

/// Modes a person may pick given their primary mode and whether the vehicle
/// was left behind at an anchor region.
std::vector<Mode> allowed_modes(std::optional<Mode> primary, bool anchored);

/// Draws a mode from the region's surface restricted to allowed_modes().
Mode get_mode(const SpatialModel& model, std::size_t region, std::optional<Mode> primary,
              bool anchored, Rng& rng, Diagnostics* diag = nullptr);

/// Regions r with od[r, home] <= hops * p95 of the current region's model
/// for `mode`, ascending. If none survive, the region nearest to home.
std::vector<std::size_t> hop_filter(const SpatialModel& model, std::size_t current, Mode mode,
                                    int hops, std::size_t home, Diagnostics* diag = nullptr);

struct HopConstraint {
  int hops = 1;
  std::size_t target = 0;  // home, or the vehicle's anchor region
};

/// Step-by-step destination probabilities over the candidate set.
struct RegionProbabilities {
  std::vector<std::size_t> regions;  // in band with attraction > 0, ascending
  std::vector<double> local_distance;
  std::vector<double> local_attraction;
  std::vector<double> global_distance;
  std::vector<double> global_attraction;
  std::vector<char> within_hops;
  std::vector<double> combined;  // sums to 1 unless no region survives
};

RegionProbabilities region_probabilities(const SpatialModel& model, const GlobalTallies& tallies,
                                         std::size_t current, Category category, Mode mode,
                                         std::optional<HopConstraint> hop,
                                         const AssignmentOptions& options);

struct RegionChoice {
  std::size_t region = 0;
  bool relaxed_band = false;
  bool relaxed_hops = false;
};

RegionChoice get_region(const SpatialModel& model, const GlobalTallies& tallies,
                        std::size_t current, Category category, Mode mode,
                        std::optional<HopConstraint> hop, const AssignmentOptions& options,
                        Rng& rng, Diagnostics* diag = nullptr);

struct AssignedItem {
  Activity activity = Activity::Home;
  int start_bin = 1;
  int end_bin = 1;
  std::size_t region = 0;
  Category location_type = Category::Home;
  std::optional<Mode> mode;       // arriving mode; none on the first item
  double distance = 0.0;          // od from the previous item's region
  Point coord;
  int start_seconds = 0;
  int end_seconds = 0;
  // How the item was placed.
  bool selected = false;          // region drawn by get_region
  bool transfer = false;          // Mode Change item inheriting the region
  bool relaxed = false;           // a fallback was used when selecting
  std::optional<HopConstraint> hop;
  std::optional<std::size_t> copy_coord_from;  // anchor return or transfer
};

struct AssignedPlan {
  std::string agent_id;
  int plan_id = 0;
  std::size_t home_region = 0;
  Point home;
  std::optional<Mode> primary_mode;
  std::vector<AssignedItem> items;
};

/// Mode and region for every item of one chain.
AssignedPlan assign_plan(const SynPerson& person, const ActivityChain& chain,
                         const SpatialModel& model, const GlobalTallies& tallies,
                         const AssignmentOptions& options, Rng& rng,
                         Diagnostics* diag = nullptr);

/// Adds the plan's trips and destinations to the tallies.
void record_plan(const AssignedPlan& plan, const SpatialModel& model, GlobalTallies& tallies);

void assign_coordinates(AssignedPlan& plan, const SpatialModel& model, Rng& rng,
                        Diagnostics* diag = nullptr);

struct TimeAssignment {
  std::vector<int> raw;     // flattened start/end seconds before sorting
  std::vector<int> sorted;  // the same values ascending
};

/// Noisy clock times: each bin edge becomes a uniform second inside the bin,
/// the flattened vector is sorted and read back as start/end pairs.
TimeAssignment assign_times(const AssignedPlan& plan, int bins, Rng& rng);
TimeAssignment assign_times(const Chain& chain, int bins, Rng& rng);

/// hh:mm:ss for seconds past midnight.
std::string format_clock(int seconds);

/// Runs assignment for every person with a plan, in agent id order.
std::vector<AssignedPlan> assign_population(std::span<const SynPerson> persons,
                                            std::span<const ActivityChain> plans,
                                            const SpatialModel& model,
                                            const AssignmentOptions& options, std::uint64_t seed,
                                            int bins, Diagnostics* diag = nullptr);

inline constexpr std::array<std::string_view, 13> kDiaryColumns = {
    "PlanId", "Activity", "StartBin", "EndBin", "AgentId", "SA1",      "LocationType",
    "Mode",   "Distance", "X",        "Y",      "StartTime", "EndTime"};

void write_diary(const std::filesystem::path& path, std::span<const AssignedPlan> plans,
                 const RegionHierarchy& hierarchy);

/// One diary row as read back from disk.
struct DiaryRow {
  int plan_id = 0;
  Activity activity = Activity::Home;
  int start_bin = 1;
  int end_bin = 1;
  std::string agent_id;
  std::string sa1;
  Category location_type = Category::Home;
  std::optional<Mode> mode;
  std::optional<double> distance;
  Point coord;
  std::string start_time;
  std::string end_time;
};

std::vector<DiaryRow> read_diary(const std::filesystem::path& path);

}  // namespace synthpop
