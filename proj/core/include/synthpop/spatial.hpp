#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "synthpop/common.hpp"
#include "synthpop/geometry.hpp"
#include "synthpop/network.hpp"
#include "synthpop/survey.hpp"

namespace synthpop {

// ---------------------------------------------------------------------------
// Meshblocks

struct Meshblock {
  std::string id;
  std::string category;  // raw land-use label
  double population = 0.0;
  std::string sa1;
  std::string sa2;
  std::string sa3;
  Polygon shape;
};

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features with properties
/// category, population, sa1, sa2, sa3 (and optionally id).
std::vector<Meshblock> read_meshblocks(const std::filesystem::path& path);
std::vector<Meshblock> parse_meshblocks(std::string_view geojson, const std::string& source);

/// Location categories a meshblock land-use label maps to (possibly several).
/// Unknown labels map to none.
std::vector<Category> location_categories(std::string_view meshblock_category);

/// Bucket grid over polygon bounding boxes.
class PolygonIndex {
 public:
  PolygonIndex() = default;
  explicit PolygonIndex(std::span<const Polygon> polygons);
  /// Lowest polygon id whose half-open inside test succeeds.
  std::optional<std::size_t> locate(Point p) const;

 private:
  std::vector<const Polygon*> polygons_;
  std::vector<BBox> bounds_;
  std::vector<std::vector<std::size_t>> cells_;
  BBox extent_;
  double cell_ = 1.0;
  long nx_ = 0;
  long ny_ = 0;
};

// ---------------------------------------------------------------------------
// Region hierarchy

struct RegionInfo {
  std::string sa1;
  std::string sa2;
  std::string sa3;
  Point centroid;  // population weighted
  std::size_t node = 0;
  std::string node_id;
  Point node_coord;  // centroid snapped to the nearest local node
};

/// SA1 regions in ascending code order with their SA2/SA3 parents.
class RegionHierarchy {
 public:
  RegionHierarchy() = default;
  explicit RegionHierarchy(std::vector<RegionInfo> regions);

  std::size_t size() const { return regions_.size(); }
  const RegionInfo& operator[](std::size_t r) const { return regions_[r]; }
  const std::vector<RegionInfo>& regions() const { return regions_; }
  std::optional<std::size_t> find(const std::string& sa1) const;
  std::size_t sa3_count() const { return sa3_codes_.size(); }
  const std::string& sa3_code(std::size_t s) const { return sa3_codes_[s]; }
  std::size_t sa3_of(std::size_t region) const { return sa3_of_[region]; }

  void write(const std::filesystem::path& path) const;
  static RegionHierarchy read(const std::filesystem::path& path);

 private:
  std::vector<RegionInfo> regions_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> sa3_codes_;
  std::vector<std::size_t> sa3_of_;
};

/// Population-weighted centroid of each SA1 over its meshblock centroids (the
/// plain mean when the SA1 has no population), snapped to the nearest local
/// network node.
RegionHierarchy build_hierarchy(std::span<const Meshblock> meshblocks, const Network& network,
                                Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Candidate locations

struct CandidateLocation {
  std::size_t node = 0;
  std::string node_id;
  Point coord;
  Category category = Category::Home;
  std::size_t region = 0;
  double address_weight = 0.0;
};

/// Local network nodes classified by the meshblock they fall in. A node in a
/// meshblock with several location categories yields one candidate per
/// category. Nodes outside every meshblock are dropped and counted.
std::vector<CandidateLocation> build_candidate_locations(const Network& network,
                                                         std::span<const Meshblock> meshblocks,
                                                         const PolygonIndex& index,
                                                         const RegionHierarchy& hierarchy,
                                                         Diagnostics* diag = nullptr);

/// Snaps addresses to the nearest candidate of the same category in the same
/// SA1 and normalises the counts per (SA1, category). Meshblocks without any
/// address contribute one address at their centroid.
void assign_address_weights(std::vector<CandidateLocation>& candidates,
                            std::span<const Meshblock> meshblocks, const PolygonIndex& index,
                            const RegionHierarchy& hierarchy, std::span<const Point> addresses,
                            Diagnostics* diag = nullptr);

std::vector<Point> read_addresses(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Kernel density surfaces

struct WeightedPoint {
  Point p;
  double w = 1.0;
};

/// sum_i w_i exp(-|c - p_i|^2 / (2 h^2)) at each query point. Points further
/// than 10h are skipped.
std::vector<double> kde_at(std::span<const Point> queries, std::span<const WeightedPoint> points,
                           double bandwidth);

struct Bandwidths {
  double mode = 750.0;
  double work = 3200.0;
  double park = 300.0;
  double education = 200.0;
  double commercial = 20000.0;
  double for_category(Category c) const;
};

/// Per-SA1 mode choice and destination attraction probabilities.
struct Surfaces {
  std::array<std::vector<double>, kNumModes> mode;            // [mode][region]
  std::array<std::vector<double>, kNumCategories> attraction;  // [category][region]
  Bandwidths bandwidths;
};

/// Location categories a survey destination activity counts towards.
std::vector<Category> attraction_categories(Activity a);

/// A survey trip with both ends inside the study area and an SA1-to-SA1
/// network distance.
struct LocatedTrip {
  std::size_t orig_region = 0;
  std::size_t dest_region = 0;
  Point origin;
  Point destination;
  Mode mode = Mode::Walk;
  double weight = 0.0;
  Activity dest_activity = Activity::Other;
  double distance = 0.0;
};

std::vector<LocatedTrip> locate_survey_trips(std::span<const SurveyTrip> trips,
                                             std::span<const Meshblock> meshblocks,
                                             const PolygonIndex& index,
                                             const RegionHierarchy& hierarchy, const ODMatrix& od,
                                             Diagnostics* diag = nullptr);

/// Mode surface: KDE of trip origins per mode at every candidate node, summed
/// to SA1 and normalised across modes within each SA1.
std::array<std::vector<double>, kNumModes> mode_surfaces(
    std::span<const LocatedTrip> trips, std::span<const CandidateLocation> candidates,
    std::size_t regions, const RegionHierarchy& hierarchy, double bandwidth,
    Diagnostics* diag = nullptr);

/// Attraction surface for one category: KDE of trip destinations counting
/// towards the category, at candidates of that category, summed to SA1 and
/// normalised over all SA1s.
std::vector<double> attraction_surface(std::span<const LocatedTrip> trips,
                                       std::span<const CandidateLocation> candidates,
                                       std::size_t regions, Category category, double bandwidth,
                                       Diagnostics* diag = nullptr);

Surfaces build_surfaces(std::span<const LocatedTrip> trips,
                        std::span<const CandidateLocation> candidates,
                        const RegionHierarchy& hierarchy, const Bandwidths& bandwidths,
                        Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Distance models

inline constexpr double kMinLogSd = 0.01;
inline constexpr double kZ95 = 1.6449;
inline constexpr std::size_t kNearestTrips = 500;

struct LogNormal {
  double mu = 0.0;
  double sigma = kMinLogSd;
  std::size_t trips = 0;
  double p5() const;
  double p95() const;
  double pdf(double x) const;
};

/// Weighted mean and population standard deviation of ln(d), sigma clamped.
LogNormal fit_weighted_lognormal(std::span<const double> distances,
                                 std::span<const double> weights);

struct DistanceModel {
  std::vector<std::array<LogNormal, kNumModes>> by_region;
  const LogNormal& get(std::size_t region, Mode m) const {
    return by_region[region][static_cast<std::size_t>(index_of(m))];
  }
};

/// For every SA1 centroid and mode, fits the k trips of that mode whose
/// origins lie nearest the centroid. Trips with zero distance are ignored.
DistanceModel fit_local_lognormal(std::span<const LocatedTrip> trips,
                                  const RegionHierarchy& hierarchy,
                                  std::size_t k = kNearestTrips, Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Global (SA3) targets

inline constexpr double kDistanceBin = 500.0;

inline std::size_t distance_bin(double meters) {
  return static_cast<std::size_t>(meters / kDistanceBin);
}

struct GlobalTargets {
  // [category][sa3] destination share; sums to 1 over SA3s per category.
  std::array<std::vector<double>, kNumCategories> attraction;
  // [sa3][mode] distance histogram shares (500 m bins) of trips leaving the SA3.
  std::vector<std::array<std::vector<double>, kNumModes>> distance;
};

GlobalTargets build_global_targets(std::span<const LocatedTrip> trips,
                                   const RegionHierarchy& hierarchy);

// ---------------------------------------------------------------------------
// Bundle of everything the assignment stage reads

struct SpatialInputs {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path meshblocks;
  std::optional<std::filesystem::path> addresses;
  Bandwidths bandwidths;
  std::size_t nearest_trips = kNearestTrips;
};

struct SpatialModel {
  RegionHierarchy hierarchy;
  ODMatrix od;
  std::vector<CandidateLocation> candidates;
  Surfaces surfaces;
  DistanceModel distances;
  GlobalTargets targets;
  std::vector<LocatedTrip> survey_trips;

  /// Candidate indices per (region, category), built by index().
  const std::vector<std::size_t>& candidates_in(std::size_t region, Category c) const;
  void index();

  void write(const std::filesystem::path& dir) const;
  static SpatialModel read(const std::filesystem::path& dir);

 private:
  std::vector<std::array<std::vector<std::size_t>, kNumCategories>> by_region_;
};

/// Full spatial build: network, meshblocks, hierarchy, OD matrix, candidates,
/// address weights, surfaces, distance models and global targets.
SpatialModel build_spatial_model(const SpatialInputs& inputs, std::span<const SurveyTrip> trips,
                                 Diagnostics* diag = nullptr);

/// Rebuilds the KDE surfaces of an existing model with new bandwidths.
void rebuild_surfaces(SpatialModel& model, const Bandwidths& bandwidths,
                      Diagnostics* diag = nullptr);

}  // namespace synthpop
