#include <algorithm>
#include <limits>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/cohort.hpp"
#include "synthpop/rng.hpp"

using namespace synthpop;

namespace {

double sse(const Points& pts, const std::vector<std::size_t>& members) {
  std::vector<double> c(pts[0].size(), 0.0);
  for (auto m : members) {
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += pts[m][d];
  }
  for (auto& v : c) v /= static_cast<double>(members.size());
  double s = 0.0;
  for (auto m : members) {
    for (std::size_t d = 0; d < c.size(); ++d) s += (pts[m][d] - c[d]) * (pts[m][d] - c[d]);
  }
  return s;
}

// Greedy Ward from first principles: merge the pair with the smallest SSE increase.
std::vector<Merge> brute_ward(const Points& pts) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < pts.size(); ++i) clusters.push_back({i});
  std::vector<Merge> out;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        auto merged = clusters[i];
        merged.insert(merged.end(), clusters[j].begin(), clusters[j].end());
        const double inc = sse(pts, merged) - sse(pts, clusters[i]) - sse(pts, clusters[j]);
        if (inc < best - 1e-12) {
          best = inc;
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t a = *std::min_element(clusters[bi].begin(), clusters[bi].end());
    const std::size_t b = *std::min_element(clusters[bj].begin(), clusters[bj].end());
    out.push_back({std::min(a, b), std::max(a, b), 2.0 * best});
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<long>(bj));
  }
  return out;
}

Points random_points(std::size_t n, std::size_t dims, std::uint64_t seed) {
  Rng rng(seed);
  Points pts(n, std::vector<double>(dims));
  for (auto& p : pts) {
    for (auto& v : p) v = rng.uniform();
  }
  return pts;
}

}  // namespace

TEST(Ward, MatchesBruteForceOnRandomData) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto pts = random_points(9, 3, seed);
    const auto got = ward_linkage(pts);
    const auto want = brute_ward(pts);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].left, want[k].left) << "seed " << seed << " step " << k;
      EXPECT_EQ(got[k].right, want[k].right) << "seed " << seed << " step " << k;
      EXPECT_NEAR(got[k].cost, want[k].cost, 1e-9);
    }
  }
}

TEST(Ward, CutTreeAndDispersion) {
  const Points pts = {{0, 0}, {0, 1}, {10, 10}, {10, 11}, {0, 0.5}};
  const auto merges = ward_linkage(pts);
  const auto labels = cut_tree(merges, pts.size(), 2);
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 1, 1, 0}));
  EXPECT_NEAR(within_cluster_dispersion(pts, labels), 0.5 + 0.5, 1e-12);
  EXPECT_EQ(cut_tree(merges, pts.size(), 5), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(cut_tree(merges, pts.size(), 1), (std::vector<int>(5, 0)));
}

TEST(GapStatistic, FindsSeparatedGroups) {
  Rng rng(4);
  Points pts;
  for (auto [cx, cy] : {std::pair{0.0, 0.0}, {5.0, 5.0}, {0.0, 5.0}}) {
    for (int i = 0; i < 8; ++i) pts.push_back({cx + 0.1 * rng.uniform(), cy + 0.1 * rng.uniform()});
  }
  const auto g = gap_statistic(pts, 6, 30, 9);
  EXPECT_EQ(g.k, 3u);
  EXPECT_EQ(g.gap.size(), 6u);
  EXPECT_EQ(gap_statistic(pts, 6, 30, 9).gap, g.gap);
}

TEST(Bands, Layout) {
  EXPECT_EQ(band_index(Gender::Female, 0), 0);
  EXPECT_EQ(band_index(Gender::Female, 14), 0);
  EXPECT_EQ(band_index(Gender::Female, 15), 1);
  EXPECT_EQ(band_index(Gender::Female, 64), 10);
  EXPECT_EQ(band_index(Gender::Female, 65), 11);
  EXPECT_EQ(band_index(Gender::Male, 30), 12 + 4);
  Diagnostics diag;
  EXPECT_EQ(band_index(Gender::Male, 130, &diag), 23);
  EXPECT_EQ(diag.get("cohorts.ages_clamped"), 1);
  EXPECT_THROW(band_index(Gender::Male, -1), DataError);
}

TEST(CohortRates, WeightedShares) {
  const std::vector<SurveyPerson> persons = {{"a", Gender::Female, 30}, {"b", Gender::Female, 31}};
  const std::vector<ActivityRecord> acts = {{"a", "Home", 0, 10, 1.0},
                                            {"a", "Work", 10, 20, 1.0},
                                            {"b", "Home", 0, 10, 3.0},
                                            {"b", "Shop", 10, 20, 3.0}};
  const auto rates = build_cohort_rates(acts, persons);
  const int band = band_index(Gender::Female, 30);
  EXPECT_DOUBLE_EQ(rates[band][0], 1.0 / 8.0);  // Work
  EXPECT_DOUBLE_EQ(rates[band][2], 3.0 / 8.0);  // Shop
  EXPECT_DOUBLE_EQ(rates[band][1], 0.0);
  EXPECT_DOUBLE_EQ(rates[0][0], 0.0);
}

TEST(Cohorts, FixedKAndTotalLookup) {
  RateMatrix rates{};
  for (int b = 0; b < kNumBands; ++b) rates[b][0] = (b % kBandsPerGender) < 6 ? 0.1 : 0.9;
  ClusterOptions opts;
  opts.fixed_k = 2;
  const auto table = cluster_cohorts(rates, opts);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.cohort_of(Gender::Female, 20), table.cohort_of(Gender::Male, 20));
  EXPECT_NE(table.cohort_of(Gender::Female, 20), table.cohort_of(Gender::Female, 70));
  std::size_t members = 0;
  for (const auto& c : table.cohorts()) members += c.members.size();
  EXPECT_EQ(members, static_cast<std::size_t>(kNumBands));

  testing_util::TempDir dir("cohorts");
  table.write(dir / "cohorts.csv");
  const auto back = CohortTable::read(dir / "cohorts.csv");
  for (int b = 0; b < kNumBands; ++b) EXPECT_EQ(back.cohort_of_band(b), table.cohort_of_band(b));
}
