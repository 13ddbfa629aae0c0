#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/validation.hpp"

using namespace synthpop;

namespace {

// Four SA1s, two per SA3.
RegionHierarchy four_regions() {
  std::vector<RegionInfo> info;
  const char* codes[] = {"1010101", "1010102", "1020101", "1020102"};
  for (std::size_t r = 0; r < 4; ++r) {
    const std::string sa1 = codes[r];
    info.push_back({sa1, sa1.substr(0, 5), sa1.substr(0, 3), {1000.0 * r, 0}, r, "n", {1000.0 * r, 0}});
  }
  return RegionHierarchy(info);
}

const Sa3Comparison* find(const std::vector<Sa3Comparison>& v, const std::string& sa3,
                          const std::string& key) {
  for (const auto& c : v) {
    if (c.sa3 == sa3 && c.key == key) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(CompareSa3, ModeSharesPerOriginSa3) {
  const auto h = four_regions();
  Observations e, a;
  e.trips = {{0, 2, Mode::Car, 3.0, 2000}, {1, 0, Mode::Walk, 1.0, 1000}, {2, 3, Mode::Pt, 2.0, 1000}};
  a.trips = {{0, 1, Mode::Car, 1.0, 1000}, {1, 1, Mode::Car, 1.0, 0}};
  Diagnostics diag;
  const auto rows = compare_sa3(e, a, h, Metric::ModeShare, &diag);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_DOUBLE_EQ(find(rows, "101", "car")->expected, 0.75);
  EXPECT_DOUBLE_EQ(find(rows, "101", "car")->actual, 1.0);
  EXPECT_DOUBLE_EQ(find(rows, "101", "walk")->abs_diff(), 0.25);
  EXPECT_EQ(diag.get("validate.sa3_without_trips"), 1);
}

TEST(CompareSa3, AttractionSharesAcrossSa3s) {
  const auto h = four_regions();
  Observations e, a;
  e.destinations = {{0, Category::Work, 1.0}, {2, Category::Work, 3.0}, {3, Category::Park, 1.0}};
  a.destinations = {{1, Category::Work, 1.0}, {1, Category::Work, 1.0}, {3, Category::Work, 2.0}};
  Diagnostics diag;
  const auto rows = compare_sa3(e, a, h, Metric::AttractionShare, &diag);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(find(rows, "101", "work")->expected, 0.25);
  EXPECT_DOUBLE_EQ(find(rows, "101", "work")->actual, 0.5);
  EXPECT_DOUBLE_EQ(find(rows, "102", "work")->expected, 0.75);
  EXPECT_EQ(diag.get("validate.category_without_destinations"), 3);
}

TEST(CompareSa3, LogDistanceMoments) {
  const auto h = four_regions();
  Observations e, a;
  e.trips = {{0, 1, Mode::Car, 1.0, 1000}, {0, 2, Mode::Car, 3.0, 4000}, {1, 1, Mode::Car, 5.0, 0}};
  a.trips = {{1, 3, Mode::Car, 1.0, 2000}};
  const double mean = (std::log(1000.0) + 3 * std::log(4000.0)) / 4;
  const double sd = std::sqrt((std::pow(std::log(1000.0) - mean, 2) + 3 * std::pow(std::log(4000.0) - mean, 2)) / 4);
  const auto means = compare_sa3(e, a, h, Metric::LogMean);
  const auto sds = compare_sa3(e, a, h, Metric::LogSd);
  ASSERT_EQ(means.size(), 1u);
  EXPECT_NEAR(means[0].expected, mean, 1e-12);
  EXPECT_NEAR(means[0].actual, std::log(2000.0), 1e-12);
  EXPECT_NEAR(sds[0].expected, sd, 1e-12);
  EXPECT_NEAR(sds[0].actual, 0.0, 1e-12);
}

TEST(ErrorTable, MeanAbsoluteDifferencePerFraction) {
  std::vector<Sa3Comparison> f1 = {{"101", Metric::ModeShare, "car", 0.5, 0.3},
                                   {"102", Metric::ModeShare, "car", 0.5, 0.9}};
  std::vector<Sa3Comparison> f2 = {{"101", Metric::ModeShare, "car", 0.5, 0.45}};
  const auto rows = error_table({{0.1, f1}, {1.0, f2}});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].key, "car");
  ASSERT_EQ(rows[0].mean_abs_diff.size(), 2u);
  EXPECT_NEAR(rows[0].mean_abs_diff[0], 0.3, 1e-12);
  EXPECT_NEAR(rows[0].mean_abs_diff[1], 0.05, 1e-12);
  testing_util::TempDir dir("errors");
  const std::vector<double> fractions = {0.1, 1.0};
  write_error_table(dir / "e.csv", fractions, rows);
  const auto text = testing_util::read_text(dir / "e.csv");
  EXPECT_EQ(text.rfind("metric,key,fraction_0.1,fraction_1\nmode_share,car,", 0), 0u) << text;
}

TEST(Observations, DiaryRowsFormTripsPerAgent) {
  const auto h = four_regions();
  ODMatrix od(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) od.at(i, j) = 1000.0 * std::abs(double(i) - double(j));
  }
  auto row = [](std::string agent, Activity a, std::string sa1, Category c, std::optional<Mode> m) {
    DiaryRow r;
    r.agent_id = std::move(agent);
    r.activity = a;
    r.sa1 = std::move(sa1);
    r.location_type = c;
    r.mode = m;
    return r;
  };
  const std::vector<DiaryRow> rows = {
      row("A", Activity::Home, "1010101", Category::Home, std::nullopt),
      row("A", Activity::Work, "1020102", Category::Work, Mode::Car),
      row("A", Activity::Home, "1010101", Category::Home, Mode::Car),
      row("B", Activity::Home, "1010102", Category::Home, std::nullopt),
      row("B", Activity::ModeChange, "9999999", Category::Work, Mode::Walk),
      row("B", Activity::Shop, "1020101", Category::Commercial, Mode::Pt)};
  Diagnostics diag;
  const auto obs = observations_from_diary(rows, h, od, &diag);
  ASSERT_EQ(obs.trips.size(), 2u);
  EXPECT_DOUBLE_EQ(obs.trips[0].distance, 3000.0);
  EXPECT_EQ(obs.trips[1].origin, 3u);
  EXPECT_EQ(obs.destinations.size(), 2u);
  EXPECT_EQ(diag.get("validate.diary_rows_outside_area"), 1);
}

TEST(Report, HistogramsAndFiles) {
  Observations o;
  o.trips = {{0, 1, Mode::Walk, 1.0, 200}, {0, 1, Mode::Walk, 3.0, 1200}, {0, 1, Mode::Walk, 9.0, 0}};
  const auto hist = distance_histogram(o, Mode::Walk);
  EXPECT_EQ(hist, (std::vector<double>{0.25, 0, 0.75}));
  EXPECT_TRUE(distance_histogram(o, Mode::Car).empty());
  testing_util::TempDir dir("report");
  o.destinations = {{1, Category::Park, 1.0}};
  write_report(dir.path(), o, o, four_regions());
  for (const char* f : {"distance_hist_walk.csv", "sa3_distance_car.csv", "sa3_attraction_park.csv",
                        "sa3_mode.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
}
