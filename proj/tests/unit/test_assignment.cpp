#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/assignment.hpp"

using namespace synthpop;

namespace {

constexpr std::size_t ci(Category c) { return static_cast<std::size_t>(index_of(c)); }
constexpr std::size_t mi(Mode m) { return static_cast<std::size_t>(index_of(m)); }

std::string fmt_two(std::size_t r) {
  return r < 10 ? "0" + std::to_string(r) : std::to_string(r);
}

LogNormal lognormal(double median, double sigma) {
  LogNormal f;
  f.mu = std::log(median);
  f.sigma = sigma;
  return f;
}

// Regions at the given points with Euclidean OD distances. Regions listed in
// `second_sa3` belong to SA3 302, the rest to 301. Every region gets one
// candidate per category and a uniform attraction surface.
SpatialModel toy_model(const std::vector<Point>& at, const std::vector<std::size_t>& second_sa3 = {}) {
  const std::size_t n = at.size();
  std::vector<RegionInfo> info;
  for (std::size_t r = 0; r < n; ++r) {
    const bool b = std::find(second_sa3.begin(), second_sa3.end(), r) != second_sa3.end();
    const std::string sa3 = b ? "302" : "301";
    info.push_back({"S" + fmt_two(r), sa3 + "01", sa3, at[r], r, "n" + std::to_string(r), at[r]});
  }
  SpatialModel m;
  m.hierarchy = RegionHierarchy(info);
  m.od = ODMatrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m.od.at(i, j) = distance(at[i], at[j]);
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (Category c : kAllCategories) {
      m.candidates.push_back({r, "n" + std::to_string(r), at[r], c, r, 1.0});
    }
  }
  for (auto& v : m.surfaces.mode) v.assign(n, 0.25);
  for (auto& v : m.surfaces.attraction) v.assign(n, 1.0 / static_cast<double>(n));
  m.distances.by_region.assign(n, {});
  for (auto& row : m.distances.by_region) row.fill(lognormal(1500, 0.5));
  for (auto& v : m.targets.attraction) v.assign(m.hierarchy.sa3_count(), 0.0);
  m.targets.distance.resize(m.hierarchy.sa3_count());
  m.index();
  return m;
}

SynPerson person_in(const SpatialModel& m, std::size_t region) {
  SynPerson p;
  p.agent_id = "A1";
  p.sa1 = m.hierarchy[region].sa1;
  p.sa2 = m.hierarchy[region].sa2;
  p.home = {m.hierarchy[region].centroid.x + 7, m.hierarchy[region].centroid.y - 3};
  return p;
}

void only_mode(SpatialModel& m, std::size_t region, Mode mode) {
  for (Mode x : kAllModes) m.surfaces.mode[mi(x)][region] = x == mode ? 1.0 : 0.0;
}

}  // namespace

TEST(LocationType, FixedAndAmbiguousActivities) {
  Rng rng(3);
  EXPECT_EQ(map_activity_to_location_type(Activity::Home, rng), Category::Home);
  EXPECT_EQ(map_activity_to_location_type(Activity::Work, rng), Category::Work);
  EXPECT_EQ(map_activity_to_location_type(Activity::Study, rng), Category::Education);
  EXPECT_EQ(map_activity_to_location_type(Activity::Shop, rng), Category::Commercial);
  EXPECT_EQ(map_activity_to_location_type(Activity::Personal, rng), Category::Commercial);
  EXPECT_FALSE(map_activity_to_location_type(Activity::ModeChange, rng).has_value());
  std::map<Category, int> social, other;
  for (int i = 0; i < 8000; ++i) {
    ++social[*map_activity_to_location_type(Activity::SocialRecreational, rng)];
    ++other[*map_activity_to_location_type(Activity::Other, rng)];
  }
  EXPECT_EQ(social.size(), 2u);
  EXPECT_NEAR(social[Category::Park] / 8000.0, 0.5, 0.03);
  EXPECT_EQ(other.size(), 4u);
  EXPECT_EQ(other.count(Category::Home), 0u);
  for (const auto& [c, k] : other) EXPECT_NEAR(k / 8000.0, 0.25, 0.03);
}

TEST(ModeChoice, SharesFollowSurfaceAndRestrictions) {
  auto m = toy_model({{0, 0}, {1000, 0}});
  m.surfaces.mode[mi(Mode::Walk)][0] = 0.1;
  m.surfaces.mode[mi(Mode::Cycle)][0] = 0.2;
  m.surfaces.mode[mi(Mode::Pt)][0] = 0.3;
  m.surfaces.mode[mi(Mode::Car)][0] = 0.4;
  Rng rng(11);
  constexpr int kDraws = 10000;
  std::array<int, kNumModes> free{}, walk{}, car{}, anchored{};
  for (int i = 0; i < kDraws; ++i) {
    ++free[mi(get_mode(m, 0, std::nullopt, false, rng))];
    ++walk[mi(get_mode(m, 0, Mode::Walk, false, rng))];
    ++car[mi(get_mode(m, 0, Mode::Car, false, rng))];
    ++anchored[mi(get_mode(m, 0, Mode::Car, true, rng))];
  }
  const std::array<double, kNumModes> want = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t k = 0; k < kNumModes; ++k) EXPECT_NEAR(free[k] / double(kDraws), want[k], 0.02);
  EXPECT_EQ(walk[mi(Mode::Car)], 0);
  EXPECT_EQ(walk[mi(Mode::Cycle)], 0);
  EXPECT_NEAR(walk[mi(Mode::Pt)] / double(kDraws), 0.75, 0.02);
  EXPECT_EQ(car[mi(Mode::Cycle)], 0);
  EXPECT_NEAR(car[mi(Mode::Car)] / double(kDraws), 0.5, 0.02);
  EXPECT_EQ(anchored[mi(Mode::Car)], 0);
  EXPECT_EQ(anchored[mi(Mode::Cycle)], 0);
}

TEST(ModeChoice, FallsBackToSa3ThenUniform) {
  auto m = toy_model({{0, 0}, {1000, 0}, {5000, 0}}, {2});
  for (auto& v : m.surfaces.mode) v[0] = 0.0;
  only_mode(m, 1, Mode::Cycle);
  Diagnostics diag;
  Rng rng(5);
  EXPECT_EQ(get_mode(m, 0, std::nullopt, false, rng, &diag), Mode::Cycle);
  EXPECT_EQ(diag.get("assign.mode_sa3_fallback"), 1);
  for (auto& v : m.surfaces.mode) v[2] = 0.0;
  get_mode(m, 2, std::nullopt, false, rng, &diag);
  EXPECT_EQ(diag.get("assign.mode_uniform_fallback"), 1);
}

TEST(HopFilter, MatchesBruteForce) {
  std::vector<Point> line;
  for (int i = 0; i < 6; ++i) line.push_back({100.0 * i, 0});
  auto m = toy_model(line);
  const double sigma = 0.2;
  const auto fit = lognormal(260.0 / std::exp(kZ95 * sigma), sigma);
  for (auto& row : m.distances.by_region) row[mi(Mode::Walk)] = fit;
  ASSERT_NEAR(fit.p95(), 260.0, 1e-9);
  for (std::size_t home = 0; home < 6; ++home) {
    for (int hops = 1; hops <= 3; ++hops) {
      std::vector<std::size_t> want;
      for (std::size_t r = 0; r < 6; ++r) {
        if (100.0 * std::abs(static_cast<double>(r) - static_cast<double>(home)) <= hops * 260.0) {
          want.push_back(r);
        }
      }
      EXPECT_EQ(hop_filter(m, 3, Mode::Walk, hops, home), want) << home << " " << hops;
    }
  }
  EXPECT_EQ(hop_filter(m, 0, Mode::Walk, 1, 0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(HopFilter, RelaxesToNearestRegion) {
  auto m = toy_model({{0, 0}, {400, 0}, {900, 0}});
  for (std::size_t r = 0; r < 3; ++r) m.od.at(r, r) = 150.0;
  for (auto& row : m.distances.by_region) row[mi(Mode::Car)] = lognormal(10, 0.01);
  Diagnostics diag;
  EXPECT_EQ(hop_filter(m, 1, Mode::Car, 2, 2, &diag), std::vector<std::size_t>{2});
  EXPECT_EQ(diag.get("assign.relaxed_hop_filter"), 1);
}

TEST(RegionProbabilities, MatchesStepOracle) {
  // Region 0 is the origin; regions 1 and 2, and 4 and 5, share 500 m bins.
  const std::vector<Point> at = {{0, 0},     {1000, 0}, {0, 1100},  {-2500, 0},
                                 {3000, 0},  {0, -3100}, {1500, 0}};
  auto m = toy_model(at, {3, 4, 5});
  const auto fit = lognormal(1800, 0.4);
  for (auto& row : m.distances.by_region) row[mi(Mode::Car)] = fit;
  auto& attr = m.surfaces.attraction[ci(Category::Work)];
  attr = {0.05, 0.1, 0.3, 0.15, 0.25, 0.15, 0.0};
  const std::size_t s0 = 0, s1 = 1;
  m.targets.attraction[ci(Category::Work)] = {0.6, 0.4};
  m.targets.distance[s0][mi(Mode::Car)] = {0, 0, 0.2, 0, 0, 0.5, 0.3};
  GlobalTallies tallies(m.hierarchy);
  tallies.add_trip(s0, Mode::Car, 1000);
  tallies.add_trip(s0, Mode::Car, 1050);
  tallies.add_trip(s0, Mode::Car, 2600);
  tallies.add_destination(s0, Category::Work);
  for (int i = 0; i < 3; ++i) tallies.add_destination(s1, Category::Work);
  const AssignmentOptions opt{0.4, 0.6};

  const double lo = 1800 * std::exp(-1.6449 * 0.4);
  const double hi = 1800 * std::exp(1.6449 * 0.4);
  const double hop_limit = 1 * hi;
  std::vector<std::size_t> regions;
  for (std::size_t r = 0; r < at.size(); ++r) {
    const double d = distance(at[0], at[r]);
    if (d >= lo && d <= hi && attr[r] > 0) regions.push_back(r);
  }
  ASSERT_EQ(regions, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  const std::size_t k = regions.size();
  auto norm = [](std::vector<double> v) {
    double s = 0;
    for (double x : v) s += x;
    if (s > 0) for (double& x : v) x /= s;
    return v;
  };
  auto bin = [&](std::size_t r) { return static_cast<std::size_t>(distance(at[0], at[r]) / 500.0); };
  std::map<std::size_t, int> per_bin;
  for (auto r : regions) ++per_bin[bin(r)];

  std::vector<double> ld(k), la(k), gd(k), ga(k), comb(k);
  const double s = 0.4, mu = std::log(1800.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double d = distance(at[0], at[regions[i]]);
    ld[i] = std::exp(-std::pow(std::log(d) - mu, 2) / (2 * s * s)) / (d * s * std::sqrt(2 * M_PI));
    la[i] = attr[regions[i]];
  }
  ld = norm(ld);
  for (std::size_t i = 0; i < k; ++i) ld[i] /= per_bin[bin(regions[i])];
  ld = norm(ld);
  la = norm(la);
  // Realised distance shares: bin 2 has 2 of 3 trips, bin 5 has 1.
  const std::map<std::size_t, double> realised = {{2, 2.0 / 3}, {5, 1.0 / 3}};
  const std::vector<double> target = {0, 0, 0.2, 0, 0, 0.5, 0.3};
  for (std::size_t i = 0; i < k; ++i) {
    const auto b = bin(regions[i]);
    const double got = realised.count(b) ? realised.at(b) : 0.0;
    gd[i] = std::max(0.0, (b < target.size() ? target[b] : 0.0) - got) / per_bin[b];
  }
  gd = norm(gd);
  // SA3 301 holds 1 of 4 work destinations against a 0.6 target, SA3 302 holds 3 of 4.
  const double deficit301 = 0.6 - 0.25;
  double la301 = 0;
  for (std::size_t i = 0; i < k; ++i) if (regions[i] <= 2) la301 += la[i];
  for (std::size_t i = 0; i < k; ++i) ga[i] = regions[i] <= 2 ? deficit301 * la[i] / la301 : 0.0;
  ga = norm(ga);
  const std::size_t hop_target = 4;
  std::vector<char> within(k);
  for (std::size_t i = 0; i < k; ++i) {
    within[i] = distance(at[regions[i]], at[hop_target]) <= hop_limit;
    comb[i] = within[i] ? 0.4 * (ld[i] + gd[i]) + 0.6 * (la[i] + ga[i]) : 0.0;
  }
  comb = norm(comb);
  EXPECT_EQ(within, (std::vector<char>{1, 1, 0, 1, 0}));

  const auto p = region_probabilities(m, tallies, 0, Category::Work, Mode::Car,
                                      HopConstraint{1, hop_target}, opt);
  ASSERT_EQ(p.regions, regions);
  EXPECT_EQ(p.within_hops, within);
  for (std::size_t i = 0; i < k; ++i) {
    EXPECT_NEAR(p.local_distance[i], ld[i], 1e-12);
    EXPECT_NEAR(p.local_attraction[i], la[i], 1e-12);
    EXPECT_NEAR(p.global_distance[i], gd[i], 1e-12);
    EXPECT_NEAR(p.global_attraction[i], ga[i], 1e-12);
    EXPECT_NEAR(p.combined[i], comb[i], 1e-12);
  }
  double total = 0;
  for (double x : p.combined) total += x;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(RegionChoice, RelaxesWhenBandIsEmpty) {
  auto m = toy_model({{0, 0}, {200, 0}, {9000, 0}});
  for (auto& row : m.distances.by_region) row[mi(Mode::Car)] = lognormal(3000, 0.1);
  GlobalTallies tallies(m.hierarchy);
  Rng rng(1);
  Diagnostics diag;
  const auto c = get_region(m, tallies, 0, Category::Work, Mode::Car, std::nullopt, {}, rng, &diag);
  EXPECT_TRUE(c.relaxed_band);
  EXPECT_EQ(c.region, 1u);
  EXPECT_EQ(diag.get("assign.relaxed_band"), 1);
}

TEST(AssignPlan, CarTourToWork) {
  auto m = toy_model({{0, 0}, {1500, 0}, {3000, 0}});
  only_mode(m, 0, Mode::Car);
  const auto person = person_in(m, 0);
  const ActivityChain chain{1, 0, {{Activity::Home, 1, 16}, {Activity::Work, 18, 34}, {Activity::Home, 36, 48}}};
  GlobalTallies tallies(m.hierarchy);
  Rng rng(9);
  const auto plan = assign_plan(person, chain, m, tallies, {}, rng);
  ASSERT_EQ(plan.items.size(), 3u);
  EXPECT_EQ(plan.primary_mode, Mode::Car);
  EXPECT_FALSE(plan.items[0].mode.has_value());
  EXPECT_EQ(plan.items[1].mode, Mode::Car);
  EXPECT_EQ(plan.items[2].mode, Mode::Car);
  EXPECT_EQ(plan.items[1].location_type, Category::Work);
  EXPECT_TRUE(plan.items[1].selected);
  EXPECT_EQ(plan.items[0].region, 0u);
  EXPECT_EQ(plan.items[2].region, 0u);
  EXPECT_DOUBLE_EQ(plan.items[1].distance, m.od.at(0, plan.items[1].region));
  EXPECT_DOUBLE_EQ(plan.items[2].distance, m.od.at(plan.items[1].region, 0));
}

TEST(AssignPlan, VehicleLeftAtWorkIsCollectedBeforeHome) {
  // Car from home; walking is the only option once away from home.
  std::vector<Point> at;
  for (int i = 0; i < 5; ++i) at.push_back({800.0 * i, 0});
  auto m = toy_model(at);
  only_mode(m, 0, Mode::Car);
  for (std::size_t r = 1; r < at.size(); ++r) only_mode(m, r, Mode::Walk);
  for (auto& row : m.distances.by_region) row[mi(Mode::Walk)] = lognormal(800, 0.3);
  const auto person = person_in(m, 0);
  const ActivityChain chain{7, 0,
                            {{Activity::Home, 1, 14},
                             {Activity::Work, 16, 30},
                             {Activity::Shop, 31, 33},
                             {Activity::Other, 34, 35},
                             {Activity::Home, 37, 48}}};
  GlobalTallies tallies(m.hierarchy);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    auto plan = assign_plan(person, chain, m, tallies, {}, rng);
    ASSERT_EQ(plan.items.size(), 5u);
    const auto& w = plan.items[1];
    const auto& s = plan.items[2];
    const auto& x = plan.items[3];
    EXPECT_EQ(w.mode, Mode::Car);
    EXPECT_EQ(s.mode, Mode::Walk);
    EXPECT_EQ(x.mode, Mode::Walk);
    EXPECT_EQ(plan.items[4].mode, Mode::Car);
    EXPECT_EQ(x.region, w.region);
    EXPECT_EQ(x.location_type, w.location_type);
    ASSERT_TRUE(s.hop.has_value());
    EXPECT_EQ(s.hop->target, w.region);
    EXPECT_EQ(s.hop->hops, 1);
    Rng place(seed + 100);
    assign_coordinates(plan, m, place);
    EXPECT_EQ(x.coord, w.coord);
    EXPECT_EQ(plan.items[0].coord, person.home);
    EXPECT_EQ(plan.items[4].coord, person.home);
  }
}

TEST(AssignPlan, HomeOnlyChain) {
  auto m = toy_model({{0, 0}, {1000, 0}});
  const auto person = person_in(m, 1);
  GlobalTallies tallies(m.hierarchy);
  Rng rng(2);
  auto plan = assign_plan(person, {3, 0, {{Activity::Home, 1, 48}}}, m, tallies, {}, rng);
  ASSERT_EQ(plan.items.size(), 1u);
  EXPECT_EQ(plan.items[0].region, 1u);
  EXPECT_FALSE(plan.items[0].mode.has_value());
  EXPECT_FALSE(plan.primary_mode.has_value());
  assign_coordinates(plan, m, rng);
  EXPECT_EQ(plan.items[0].coord, person.home);
}

TEST(AssignPlan, ChainWithoutHomeGetsVirtualHomes) {
  auto m = toy_model({{0, 0}, {1500, 0}});
  only_mode(m, 0, Mode::Walk);
  GlobalTallies tallies(m.hierarchy);
  Rng rng(4);
  const auto plan =
      assign_plan(person_in(m, 0), {4, 0, {{Activity::Work, 1, 48}}}, m, tallies, {}, rng);
  ASSERT_EQ(plan.items.size(), 1u);
  EXPECT_EQ(plan.items[0].location_type, Category::Work);
  EXPECT_FALSE(plan.items[0].mode.has_value());
}

TEST(Coordinates, FollowAddressWeights) {
  auto m = toy_model({{0, 0}, {1000, 0}});
  m.candidates.push_back({1, "extra", {1100, 50}, Category::Work, 1, 0.25});
  for (auto& c : m.candidates) {
    if (c.region == 1 && c.category == Category::Work && c.node_id != "extra") c.address_weight = 0.75;
  }
  m.index();
  AssignedPlan plan;
  plan.home = {3, 4};
  AssignedItem home;
  AssignedItem work;
  work.activity = Activity::Work;
  work.location_type = Category::Work;
  work.region = 1;
  plan.items = {home, work};
  Rng rng(21);
  int extra = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    assign_coordinates(plan, m, rng);
    EXPECT_EQ(plan.items[0].coord, plan.home);
    if (plan.items[1].coord == Point{1100, 50}) ++extra;
  }
  EXPECT_NEAR(extra / double(kDraws), 0.25, 0.02);
}

TEST(Times, StayInsideBinsAndAreSorted) {
  const Chain chain = {{Activity::Home, 1, 16}, {Activity::Work, 16, 34}, {Activity::Home, 35, 48}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto t = assign_times(chain, 48, rng);
    ASSERT_EQ(t.raw.size(), 6u);
    std::size_t k = 0;
    for (const auto& item : chain) {
      for (int bin : {item.start_bin, item.end_bin}) {
        EXPECT_GE(t.raw[k], (bin - 1) * 1800);
        EXPECT_LT(t.raw[k], bin * 1800);
        ++k;
      }
    }
    EXPECT_TRUE(std::is_sorted(t.sorted.begin(), t.sorted.end()));
    EXPECT_TRUE(std::is_permutation(t.sorted.begin(), t.sorted.end(), t.raw.begin()));
  }
  Rng rng(1);
  EXPECT_THROW(assign_times(chain, 7, rng), ConfigError);
  EXPECT_EQ(format_clock(0), "00:00:00");
  EXPECT_EQ(format_clock(3661), "01:01:01");
  EXPECT_EQ(format_clock(86399), "23:59:59");
}

TEST(Diary, SchemaAndRoundTrip) {
  auto m = toy_model({{0, 0}, {1000, 0}});
  only_mode(m, 0, Mode::Walk);
  SynPerson p = person_in(m, 0);
  p.plan_id = 1;
  const ActivityChain chain{1, 0, {{Activity::Home, 1, 16}, {Activity::Shop, 18, 20}, {Activity::Home, 21, 48}}};
  Diagnostics diag;
  const auto plans = assign_population(std::vector<SynPerson>{p}, std::vector<ActivityChain>{chain},
                                       m, {}, 5, 48, &diag);
  ASSERT_EQ(plans.size(), 1u);
  testing_util::TempDir dir("diary");
  write_diary(dir / "diary.csv", plans, m.hierarchy);
  const auto text = testing_util::read_text(dir / "diary.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "PlanId,Activity,StartBin,EndBin,AgentId,SA1,LocationType,Mode,Distance,X,Y,StartTime,EndTime");
  const auto rows = read_diary(dir / "diary.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].mode.has_value());
  EXPECT_FALSE(rows[0].distance.has_value());
  EXPECT_EQ(rows[1].mode, Mode::Walk);
  EXPECT_EQ(*rows[1].distance, std::llround(m.od.at(0, plans[0].items[1].region)));
  EXPECT_EQ(rows[2].coord, p.home);
  EXPECT_LE(rows[0].start_time, rows[0].end_time);
  EXPECT_LE(rows[0].end_time, rows[1].start_time);
  EXPECT_EQ(diag.get("assign.selected_trips"), 1);
}
