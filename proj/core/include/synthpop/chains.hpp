#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "synthpop/common.hpp"
#include "synthpop/survey.hpp"

namespace synthpop {

inline constexpr int kDefaultBins = 48;
inline constexpr int kMinutesPerDay = 1440;

/// Time bin (1..bins) containing `minute` (0..1439). bins must divide 1440.
int bin_index(int minute, int bins = kDefaultBins);

/// |A| x T weighted counts (or shares) of activities per time bin. Bins are
/// addressed 1..T.
class DistributionMatrix {
 public:
  explicit DistributionMatrix(int bins = kDefaultBins);

  int bins() const { return bins_; }
  double at(Activity a, int bin) const { return cells_[offset(a, bin)]; }
  double& at(Activity a, int bin) { return cells_[offset(a, bin)]; }

  double total() const;
  double bin_total(int bin) const;
  double activity_total(Activity a) const;
  const std::vector<double>& cells() const { return cells_; }

  friend bool operator==(const DistributionMatrix&, const DistributionMatrix&) = default;

 private:
  std::size_t offset(Activity a, int bin) const {
    return static_cast<std::size_t>(index_of(a)) * static_cast<std::size_t>(bins_) +
           static_cast<std::size_t>(bin - 1);
  }

  int bins_;
  std::vector<double> cells_;
};

/// Target start-time matrix plus one end-time matrix per start bin.
struct TimeDistributions {
  DistributionMatrix start;
  std::vector<DistributionMatrix> end_by_start;  // [start_bin - 1]

  explicit TimeDistributions(int bins = kDefaultBins);
  int bins() const { return start.bins(); }
  const DistributionMatrix& end(int start_bin) const { return end_by_start[start_bin - 1]; }
  DistributionMatrix& end(int start_bin) { return end_by_start[start_bin - 1]; }
};

/// Accumulates activity weights into the start matrix and, keyed by the
/// start bin, into the end matrices. Labels must be canonical.
TimeDistributions build_distribution_matrices(std::span<const ActivityRecord> activities,
                                              int bins = kDefaultBins);

struct ChainItem {
  Activity activity = Activity::Home;
  int start_bin = 1;
  int end_bin = 1;
  friend bool operator==(const ChainItem&, const ChainItem&) = default;
};

using Chain = std::vector<ChainItem>;

/// Merges maximal runs of the same activity into one item spanning the first
/// start to the last end.
Chain collapse_chain(Chain items);

/// Ordered, collapsed, and inside 1..bins.
bool is_valid_chain(const Chain& chain, int bins);

struct GenerationResult {
  std::vector<Chain> chains;
  DistributionMatrix achieved_start;  // start counts of the generated chains
};

/// Generates `count` chains whose pooled start/end bins track the targets,
/// correcting on the fly towards under-represented (activity, bin) cells.
/// Deterministic for a given seed. Throws DataError if the start matrix is
/// all zero.
GenerationResult generate_chains(const TimeDistributions& targets, std::size_t count,
                                 std::uint64_t seed);

/// Sum over cells of |target share - achieved share| of start counts.
double start_distribution_l1(const DistributionMatrix& target,
                             const DistributionMatrix& achieved);

struct ActivityChain {
  int plan_id = 0;
  int cohort_id = 0;
  Chain items;
};

void write_plans(const std::filesystem::path& path, std::span<const ActivityChain> chains);
std::vector<ActivityChain> read_plans(const std::filesystem::path& path);

/// Long-format dump of per-cohort targets: cohort_id, kind, start_bin,
/// activity, bin, value (start_bin is 0 for the start matrix).
void write_distributions(const std::filesystem::path& path,
                         const std::map<int, TimeDistributions>& by_cohort);

}  // namespace synthpop
