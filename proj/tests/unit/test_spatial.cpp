#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "synthpop/fixture.hpp"
#include "synthpop/rng.hpp"
#include "synthpop/spatial.hpp"

using namespace synthpop;

namespace {

std::string square_feature(double x, double y, double size, const std::string& cat, double pop,
                           const std::string& sa1) {
  return "{\"type\":\"Feature\",\"properties\":{\"category\":\"" + cat +
         "\",\"population\":" + std::to_string(pop) + ",\"sa1\":\"" + sa1 +
         "\",\"sa2\":\"" + sa1.substr(0, 5) + "\",\"sa3\":\"" + sa1.substr(0, 3) +
         "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" + std::to_string(x) + "," +
         std::to_string(y) + "],[" + std::to_string(x + size) + "," + std::to_string(y) + "],[" +
         std::to_string(x + size) + "," + std::to_string(y + size) + "],[" +
         std::to_string(x) + "," + std::to_string(y + size) + "],[" + std::to_string(x) + "," +
         std::to_string(y) + "]]]}}";
}

// Two SA1s side by side, each made of a residential and a commercial block.
std::vector<Meshblock> two_region_blocks() {
  const std::string doc = "{\"type\":\"FeatureCollection\",\"features\":[" +
                          square_feature(0, 0, 100, "Residential", 30, "3010101") + "," +
                          square_feature(0, 100, 100, "Commercial", 0, "3010101") + "," +
                          square_feature(100, 0, 100, "Residential", 10, "3010102") + "," +
                          square_feature(100, 100, 100, "Parkland", 0, "3010102") + "]}";
  return parse_meshblocks(doc, "test");
}

Network grid_network(int side, double step) {
  Network net;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      net.add_node("n" + std::to_string(x) + "_" + std::to_string(y),
                   {step / 2 + x * step, step / 2 + y * step});
    }
  }
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const auto i = static_cast<std::size_t>(y * side + x);
      if (x + 1 < side) net.add_edge(i, i + 1, step, 50, true);
      if (y + 1 < side) net.add_edge(i, i + static_cast<std::size_t>(side), step, 50, true);
    }
  }
  return net;
}

double direct_kde(Point q, const std::vector<WeightedPoint>& pts, double h) {
  double s = 0.0;
  for (const auto& p : pts) s += p.w * std::exp(-squared_distance(q, p.p) / (2 * h * h));
  return s;
}

}  // namespace

TEST(Geometry, HalfOpenPointInPolygon) {
  Polygon sq{{{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}}}};
  EXPECT_TRUE(point_in_polygon(sq, {5, 5}));
  EXPECT_TRUE(point_in_polygon(sq, {0, 5}));
  EXPECT_TRUE(point_in_polygon(sq, {5, 0}));
  EXPECT_FALSE(point_in_polygon(sq, {10, 5}));
  EXPECT_FALSE(point_in_polygon(sq, {5, 10}));
  EXPECT_FALSE(point_in_polygon(sq, {-1, 5}));
  Polygon holed{{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {{4, 4}, {4, 6}, {6, 6}, {6, 4}}}};
  EXPECT_FALSE(point_in_polygon(holed, {5, 5}));
  EXPECT_TRUE(point_in_polygon(holed, {2, 2}));
  EXPECT_DOUBLE_EQ(holed.area(), 96.0);
}

TEST(Meshblocks, ParseAndCategories) {
  const auto mbs = two_region_blocks();
  ASSERT_EQ(mbs.size(), 4u);
  EXPECT_EQ(mbs[1].category, "Commercial");
  EXPECT_EQ(mbs[0].sa2, "30101");
  EXPECT_EQ(location_categories("Commercial"), (std::vector<Category>{Category::Work, Category::Commercial}));
  EXPECT_EQ(location_categories("Parkland"), (std::vector<Category>{Category::Park}));
  EXPECT_TRUE(location_categories("Transport").empty());
  EXPECT_THROW(parse_meshblocks("{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\","
                                "\"properties\":{\"category\":\"x\"},\"geometry\":null}]}",
                                "bad"),
               DataError);
  const auto multi = parse_meshblocks(
      "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\",\"properties\":{"
      "\"category\":\"Water\",\"sa1\":\"1\",\"sa2\":\"1\",\"sa3\":\"1\"},\"geometry\":{\"type\":"
      "\"MultiPolygon\",\"coordinates\":[[[[0,0],[1,0],[1,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,5]]]]}}]}",
      "multi");
  ASSERT_EQ(multi.size(), 1u);
  EXPECT_EQ(multi[0].shape.rings.size(), 2u);
}

TEST(Hierarchy, PopulationWeightedCentroidSnappedToLocalNode) {
  const auto mbs = two_region_blocks();
  const auto net = grid_network(4, 50.0);
  const auto h = build_hierarchy(mbs, net);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].sa1, "3010101");
  // All population of 3010101 sits in its residential block centred at (50, 50).
  EXPECT_DOUBLE_EQ(h[0].centroid.x, 50.0);
  EXPECT_DOUBLE_EQ(h[0].centroid.y, 50.0);
  EXPECT_EQ(h.sa3_count(), 1u);
  EXPECT_DOUBLE_EQ(distance(h[0].node_coord, h[0].centroid), std::sqrt(2.0) * 25.0);
}

TEST(Candidates, OnePerCategoryAndNormalisedAddressWeights) {
  const auto mbs = two_region_blocks();
  const auto net = grid_network(4, 50.0);
  std::vector<Polygon> shapes;
  for (const auto& m : mbs) shapes.push_back(m.shape);
  const PolygonIndex index(shapes);
  const auto h = build_hierarchy(mbs, net);
  auto cands = build_candidate_locations(net, mbs, index, h);
  // 16 nodes, 4 per block; commercial nodes yield work and commercial candidates.
  EXPECT_EQ(cands.size(), 20u);
  const std::vector<Point> addresses = {{10, 10}, {12, 12}, {90, 90}, {140, 20}};
  assign_address_weights(cands, mbs, index, h, addresses);
  std::map<std::pair<std::size_t, Category>, double> sums;
  for (const auto& c : cands) sums[{c.region, c.category}] += c.address_weight;
  for (const auto& [key, s] : sums) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Kde, MatchesDirectSummation) {
  Rng rng(12);
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({{rng.uniform() * 5000, rng.uniform() * 5000}, 0.5 + rng.uniform()});
  }
  std::vector<Point> queries;
  for (int i = 0; i < 80; ++i) queries.push_back({rng.uniform() * 6000 - 500, rng.uniform() * 6000 - 500});
  for (double h : {50.0, 300.0, 750.0, 5000.0}) {
    const auto got = kde_at(queries, pts, h);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      EXPECT_NEAR(got[q], direct_kde(queries[q], pts, h), 1e-12) << "h=" << h;
    }
  }
  EXPECT_THROW(kde_at(queries, pts, 0.0), ConfigError);
}

TEST(LogNormal, MatchesWeightedMomentsOracle) {
  const std::vector<double> d = {120, 850, 1500, 2300, 9100};
  const std::vector<double> w = {1, 2.5, 0.5, 3, 1};
  double sw = 0, m = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sw += w[i];
    m += w[i] * std::log(d[i]);
  }
  m /= sw;
  double v = 0;
  for (std::size_t i = 0; i < d.size(); ++i) v += w[i] * (std::log(d[i]) - m) * (std::log(d[i]) - m);
  const double s = std::sqrt(v / sw);
  const auto fit = fit_weighted_lognormal(d, w);
  EXPECT_NEAR(fit.mu, m, 1e-12);
  EXPECT_NEAR(fit.sigma, s, 1e-12);
  EXPECT_NEAR(fit.p95(), std::exp(m + 1.6449 * s), 1e-9);
  EXPECT_NEAR(fit.p5(), std::exp(m - 1.6449 * s), 1e-9);
  const double x = 1000;
  EXPECT_NEAR(fit.pdf(x),
              std::exp(-0.5 * std::pow((std::log(x) - m) / s, 2)) / (x * s * std::sqrt(2 * std::numbers::pi)),
              1e-15);
  EXPECT_EQ(fit_weighted_lognormal(std::vector<double>{500, 500}, std::vector<double>{1, 1}).sigma,
            kMinLogSd);
}

TEST(LogNormal, LocalFitUsesNearestOrigins) {
  std::vector<RegionInfo> info(2);
  info[0] = {"1000101", "10001", "100", {0, 0}, 0, "a", {0, 0}};
  info[1] = {"1000102", "10001", "100", {10000, 0}, 1, "b", {10000, 0}};
  const RegionHierarchy h(info);
  std::vector<LocatedTrip> trips;
  for (int i = 0; i < 6; ++i) {
    LocatedTrip t;
    t.origin = {i * 2000.0, 0};
    t.mode = Mode::Car;
    t.weight = 1.0 + i;
    t.distance = 1000.0 * (i + 1);
    trips.push_back(t);
  }
  LocatedTrip zero;
  zero.mode = Mode::Car;
  zero.distance = 0.0;
  trips.push_back(zero);
  Diagnostics diag;
  const auto model = fit_local_lognormal(trips, h, 3, &diag);
  const auto near0 = fit_weighted_lognormal(std::vector<double>{1000, 2000, 3000},
                                            std::vector<double>{1, 2, 3});
  const auto near1 = fit_weighted_lognormal(std::vector<double>{6000, 5000, 4000},
                                            std::vector<double>{6, 5, 4});
  EXPECT_NEAR(model.get(0, Mode::Car).mu, near0.mu, 1e-12);
  EXPECT_NEAR(model.get(1, Mode::Car).mu, near1.mu, 1e-12);
  EXPECT_NEAR(model.get(1, Mode::Car).sigma, near1.sigma, 1e-12);
  // Walk has no trips, so it falls back to the pooled fit.
  EXPECT_NEAR(model.get(0, Mode::Walk).mu, near0.mu, 1e-12);
  EXPECT_EQ(diag.get("spatial.lognormal_zero_distance_trips"), 1);
  EXPECT_EQ(diag.get("spatial.lognormal_pooled_fallback"), 3);
}

TEST(Surfaces, FixtureModelIsNormalisedAndRoundTrips) {
  testing_util::TempDir dir("spatial");
  const auto paths = write_fixture(dir.path());
  const auto table = parse_trip_table(paths.trips, DayFilter::Weekday);
  const auto trips = extract_survey_trips(table);
  SpatialInputs in{paths.nodes, paths.edges, paths.meshblocks, paths.addresses, {}, kNearestTrips};
  const auto model = build_spatial_model(in, trips);
  ASSERT_EQ(model.hierarchy.size(), 144u);
  EXPECT_EQ(model.hierarchy.sa3_count(), 9u);
  for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
    double s = 0;
    for (const auto& v : model.surfaces.mode) s += v[r];
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  for (Category c : kDestinationCategories) {
    double s = 0;
    for (double v : model.surfaces.attraction[static_cast<std::size_t>(index_of(c))]) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
    double t = 0;
    for (double v : model.targets.attraction[static_cast<std::size_t>(index_of(c))]) t += v;
    EXPECT_NEAR(t, 1.0, 1e-9);
  }
  model.write(dir / "model");
  const auto back = SpatialModel::read(dir / "model");
  EXPECT_EQ(back.od, model.od);
  EXPECT_EQ(back.candidates.size(), model.candidates.size());
  for (std::size_t m = 0; m < kNumModes; ++m) EXPECT_EQ(back.surfaces.mode[m], model.surfaces.mode[m]);
  for (std::size_t r = 0; r < model.hierarchy.size(); ++r) {
    EXPECT_EQ(back.distances.get(r, Mode::Car).mu, model.distances.get(r, Mode::Car).mu);
  }
  EXPECT_EQ(back.targets.attraction, model.targets.attraction);
  // Rebuilding surfaces from the loaded survey trips reproduces them exactly.
  auto rebuilt = back;
  rebuild_surfaces(rebuilt, model.surfaces.bandwidths);
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    EXPECT_EQ(rebuilt.surfaces.attraction[c], model.surfaces.attraction[c]);
  }
}
