#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "synthpop/common.hpp"
#include "synthpop/survey.hpp"

namespace synthpop {

struct DemographicBand {
  Gender gender = Gender::Female;
  int age_lo = 0;
  int age_hi = 0;  // inclusive
  friend bool operator==(const DemographicBand&, const DemographicBand&) = default;
};

// 0-14, then five-year bands 15-19 .. 60-64, then 65 and over.
inline constexpr int kBandsPerGender = 12;
inline constexpr int kNumBands = 2 * kBandsPerGender;
inline constexpr int kMaxAge = 120;

/// All 24 bands, females first, ascending age.
const std::array<DemographicBand, kNumBands>& demographic_bands();

/// Band of a person. Ages above the top band clamp into 65+ (counted as a
/// diagnostic); negative ages are a DataError.
int band_index(Gender gender, int age, Diagnostics* diag = nullptr);

/// Activities whose weighted shares characterise a band.
inline constexpr std::array<Activity, 5> kRateActivities = {
    Activity::Work, Activity::Study, Activity::Shop, Activity::Personal,
    Activity::SocialRecreational};

using RateRow = std::array<double, kRateActivities.size()>;
using RateMatrix = std::array<RateRow, kNumBands>;

/// Row r holds, for band r, the weighted share of all its activity instances
/// that are each of kRateActivities. Activities must carry canonical labels.
RateMatrix build_cohort_rates(std::span<const ActivityRecord> activities,
                              std::span<const SurveyPerson> persons,
                              Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Ward agglomerative clustering

/// One agglomeration step. Clusters are identified by the smallest original
/// row index they contain.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double cost = 0.0;  // Lance-Williams Ward distance (2x the SSE increase)
};

using Points = std::vector<std::vector<double>>;

/// Ward linkage over Euclidean distance. Ties pick the lowest (left, right)
/// pair of cluster ids.
std::vector<Merge> ward_linkage(const Points& points);

/// Cluster labels after n-k merges; labels are numbered in order of first
/// appearance when scanning rows 0..n-1.
std::vector<int> cut_tree(std::span<const Merge> merges, std::size_t n, std::size_t k);

/// Sum over clusters of squared distances to the cluster centroid.
double within_cluster_dispersion(const Points& points, std::span<const int> labels);

struct GapResult {
  std::size_t k = 1;
  std::vector<double> gap;  // gap[k-1]
  std::vector<double> s;    // s[k-1] = sd_k * sqrt(1 + 1/B)
};

/// Gap statistic with `references` uniform reference sets drawn from the
/// bounding box of the data. Picks the first k with gap(k) >= gap(k+1) - s(k+1).
GapResult gap_statistic(const Points& points, std::size_t k_max, std::size_t references,
                        std::uint64_t seed);

struct ClusterOptions {
  std::size_t k_max = 10;
  std::size_t references = 50;
  std::uint64_t seed = 1;
  std::optional<std::size_t> fixed_k;  // bypasses the gap statistic
};

struct Cohort {
  int id = 0;
  std::vector<DemographicBand> members;
};

/// Total lookup from (gender, age) to cohort id.
class CohortTable {
 public:
  CohortTable();
  explicit CohortTable(std::array<int, kNumBands> band_to_cohort);

  int cohort_of(Gender gender, int age, Diagnostics* diag = nullptr) const;
  int cohort_of_band(int band) const { return band_to_cohort_[band]; }
  std::size_t size() const;
  std::vector<Cohort> cohorts() const;

  void write(const std::filesystem::path& path) const;
  static CohortTable read(const std::filesystem::path& path);

 private:
  std::array<int, kNumBands> band_to_cohort_{};
};

CohortTable cluster_cohorts(const RateMatrix& rates, const ClusterOptions& options,
                            Diagnostics* diag = nullptr);

void write_cohort_rates(const std::filesystem::path& path, const RateMatrix& rates);

}  // namespace synthpop
