#include "synthpop/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthpop/common.hpp"
#include "synthpop/csv.hpp"
#include "synthpop/geometry.hpp"
#include "synthpop/rng.hpp"
#include "synthpop/spatial.hpp"

namespace synthpop {
namespace {

namespace fs = std::filesystem;

constexpr double kOriginX = 320000.0;
constexpr double kOriginY = 5810000.0;
constexpr int kBlocks = 24;       // meshblocks per side
constexpr double kBlock = 500.0;  // meshblock edge
constexpr int kGrid = 48;         // street nodes per side
constexpr double kStreet = 250.0;
constexpr double kCentre = kBlocks * kBlock / 2.0;

struct Block {
  std::string id;
  std::string category;
  double population = 0.0;
  std::string sa1, sa2, sa3;
  int mx = 0, my = 0;
  std::vector<Category> categories;
  double weight = 1.0;  // destination attractiveness
  std::vector<Point> addresses;

  Point corner() const { return {kOriginX + mx * kBlock, kOriginY + my * kBlock}; }
  Point centre() const { return {corner().x + kBlock / 2, corner().y + kBlock / 2}; }
};

double centrality(Point p) {
  const double dx = p.x - kOriginX - kCentre, dy = p.y - kOriginY - kCentre;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * 3500.0 * 3500.0));
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

Point inside(const Block& b, Rng& rng, double inset) {
  const Point c = b.corner();
  return {round1(c.x + inset + rng.uniform() * (kBlock - 2 * inset)),
          round1(c.y + inset + rng.uniform() * (kBlock - 2 * inset))};
}

std::vector<Block> make_blocks(std::uint64_t seed) {
  static const std::array<const char*, 5> kSide = {"Commercial", "Commercial", "Industrial",
                                                   "Education", "Residential"};
  static const std::array<const char*, 6> kCorner = {"Parkland",  "Commercial", "Residential",
                                                     "Parkland",  "Education",
                                                     "Hospital/Medical"};
  Rng rng(derive_seed(seed, "blocks"));
  std::vector<Block> out;
  for (int my = 0; my < kBlocks; ++my) {
    for (int mx = 0; mx < kBlocks; ++mx) {
      Block b;
      b.mx = mx;
      b.my = my;
      const int i = mx / 2, j = my / 2;  // SA1 cell
      const int s3 = 3 * (j / 4) + (i / 4) + 1;
      const int s2 = 2 * ((j / 2) % 2) + (i / 2) % 2 + 1;
      const int s1 = 2 * (j % 2) + i % 2 + 1;
      b.sa3 = fmt::format("3{:02d}", s3);
      b.sa2 = fmt::format("{}{:02d}", b.sa3, s2);
      b.sa1 = fmt::format("{}{:02d}", b.sa2, s1);
      b.id = fmt::format("MB{:03d}{:02d}", my * kBlocks + mx, s1);
      const std::uint64_t h = splitmix64(derive_seed(seed, static_cast<std::uint64_t>(i * 12 + j)));
      const double c = centrality(b.centre());
      const int qx = mx % 2, qy = my % 2;
      if (qx == 0) {
        b.category = "Residential";
      } else if (qy == 0) {
        b.category = c > 0.6 ? "Commercial" : kSide[h % kSide.size()];
      } else {
        b.category = kCorner[(h >> 8) % kCorner.size()];
      }
      b.categories = location_categories(b.category);
      if (b.category == "Residential") {
        b.population = std::round(40.0 + 160.0 * c * (0.6 + 0.8 * rng.uniform()));
      }
      b.weight = b.category == "Commercial" ? 1.0 + 3.0 * c : 1.0;
      out.push_back(std::move(b));
    }
  }
  return out;
}

void write_meshblocks(const fs::path& path, const std::vector<Block>& blocks) {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& b : blocks) {
    const Point c = b.corner();
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    for (auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}) {
      ring.push_back({c.x + dx * kBlock, c.y + dy * kBlock});
    }
    features.push_back({{"type", "Feature"},
                        {"properties",
                         {{"id", b.id},
                          {"category", b.category},
                          {"population", b.population},
                          {"sa1", b.sa1},
                          {"sa2", b.sa2},
                          {"sa3", b.sa3}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
  }
  nlohmann::ordered_json doc = {{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream(path) << doc.dump(1) << '\n';
}

void write_network(const fs::path& nodes, const fs::path& edges) {
  auto id = [](int x, int y) { return fmt::format("n{:02d}{:02d}", x, y); };
  {
    std::ofstream out(nodes);
    csv::Writer w(out);
    w.row({"node_id", "x", "y"});
    for (int y = 0; y < kGrid; ++y) {
      for (int x = 0; x < kGrid; ++x) {
        w.row({id(x, y), csv::format_double(kOriginX + 125.0 + x * kStreet),
               csv::format_double(kOriginY + 125.0 + y * kStreet)});
      }
    }
  }
  std::ofstream out(edges);
  csv::Writer w(out);
  w.row({"from", "to", "length_m", "speed_kmh", "modes"});
  // Arterials run along every eighth street (2 km apart).
  auto speed = [](int line) { return line % 8 == 3 ? "80" : "50"; };
  for (int y = 0; y < kGrid; ++y) {
    for (int x = 0; x < kGrid; ++x) {
      if (x + 1 < kGrid) w.row({id(x, y), id(x + 1, y), "250", speed(y), "walk;cycle;car"});
      if (y + 1 < kGrid) w.row({id(x, y), id(x, y + 1), "250", speed(x), "walk;cycle;car"});
    }
  }
}

void place_addresses(std::vector<Block>& blocks, Rng& rng) {
  for (auto& b : blocks) {
    std::size_t n = 0;
    if (b.category == "Residential") {
      n = std::max<std::size_t>(1, static_cast<std::size_t>(b.population / 8.0));
    } else if (b.category != "Parkland") {
      n = 3;
    }
    for (std::size_t k = 0; k < n; ++k) b.addresses.push_back(inside(b, rng, 5.0));
  }
}

void write_addresses(const fs::path& path, const std::vector<Block>& blocks) {
  std::ofstream out(path);
  csv::Writer w(out);
  w.row({"x", "y"});
  for (const auto& b : blocks) {
    for (const auto& p : b.addresses) w.row({csv::format_double(p.x), csv::format_double(p.y)});
  }
}

std::size_t pick_home_block(const std::vector<Block>& blocks, Rng& rng) {
  std::vector<double> w;
  w.reserve(blocks.size());
  for (const auto& b : blocks) w.push_back(b.population);
  return rng.weighted_index(w);
}

int draw_age(Rng& rng, bool child) {
  if (child) return static_cast<int>(rng.below(18));
  const double u = rng.uniform();
  if (u < 0.75) return 18 + static_cast<int>(rng.below(47));
  return 65 + static_cast<int>(rng.below(26));
}

void write_census(const fs::path& dir, std::vector<Block>& blocks, std::size_t persons,
                  Rng& rng) {
  fs::create_directories(dir);
  std::ofstream pout(dir / "persons.csv");
  std::ofstream hout(dir / "households.csv");
  csv::Writer pw(pout), hw(hout);
  pw.row({"person_id", "household_id", "gender", "age", "sa2"});
  hw.row({"household_id", "sa1", "address_x", "address_y"});
  std::size_t written = 0;
  for (int h = 0; written < persons; ++h) {
    const Block& b = blocks[pick_home_block(blocks, rng)];
    const Point addr = b.addresses[rng.below(b.addresses.size())];
    const std::string hid = fmt::format("H{:05d}", h);
    hw.row({hid, b.sa1, csv::format_double(addr.x), csv::format_double(addr.y)});
    const std::size_t size = 1 + rng.weighted_index(std::array{0.25, 0.35, 0.2, 0.2});
    for (std::size_t k = 0; k < size && written < persons; ++k, ++written) {
      const bool child = k >= 2 && rng.uniform() < 0.7;
      pw.row({fmt::format("P{:06d}", written), hid, rng.uniform() < 0.5 ? "F" : "M",
              std::to_string(draw_age(rng, child)), b.sa2});
    }
  }
}

// --- travel survey ---------------------------------------------------------

struct Stop {
  const char* purpose;
  int duration;  // minutes spent at the stop
};

struct SurveyRow {
  std::string orig, dest;
  int start = 0, arrive = 0;
  Point from, to;
  const char* mode = "";
};

struct ModeSpec {
  const char* label;
  double median;  // metres, destination kernel
  double speed;   // metres per minute
};

constexpr std::array<ModeSpec, 4> kModes = {ModeSpec{"Walking", 900.0, 80.0},
                                            ModeSpec{"Bicycle", 2500.0, 250.0},
                                            ModeSpec{"Train", 4000.0, 350.0},
                                            ModeSpec{"Vehicle Driver", 4500.0, 500.0}};

bool block_serves(const Block& b, std::string_view purpose) {
  auto has = [&](Category c) {
    return std::find(b.categories.begin(), b.categories.end(), c) != b.categories.end();
  };
  const std::string_view p = purpose;
  if (p == "Work Related") return has(Category::Work);
  if (p == "Education") return has(Category::Education);
  if (p == "Buy Something" || p == "Personal Business" || p == "Accompany Someone") {
    return has(Category::Commercial);
  }
  if (p == "Social") return has(Category::Commercial) || b.category == "Residential";
  if (p == "Recreational") return has(Category::Park) || has(Category::Commercial);
  if (p == "Pick-up or Drop-off Someone") return has(Category::Education) || has(Category::Home);
  return !b.categories.empty();
}

Point choose_destination(const std::vector<Block>& blocks, Point from, std::string_view purpose,
                         std::size_t mode, Rng& rng) {
  const double mu = std::log(kModes[mode].median);
  std::vector<double> w(blocks.size(), 0.0);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (!block_serves(blocks[i], purpose)) continue;
    const double d = distance(from, blocks[i].centre());
    if (d < 400.0) continue;
    const double z = (std::log(d) - mu) / 0.55;
    w[i] = blocks[i].weight * std::exp(-0.5 * z * z) / d;
  }
  const std::size_t k = rng.weighted_index(w);
  if (k == w.size()) return from;
  return inside(blocks[k], rng, 20.0);
}

std::size_t tour_mode(int age, Point home, Rng& rng) {
  const double c = centrality(home);
  std::array<double, 4> w{};
  if (age < 18) {
    w = {0.5, 0.15, 0.1, 0.25};
  } else if (age >= 65) {
    w = {0.25 + 0.1 * c, 0.03, 0.12 + 0.1 * c, 0.6};
  } else {
    w = {0.12 + 0.15 * c, 0.08, 0.1 + 0.2 * c, 0.55};
  }
  return rng.weighted_index(w);
}

const char* mode_label(std::size_t mode, Rng& rng) {
  if (mode == 2) return rng.uniform() < 0.5 ? "Train" : "Public Bus";
  if (mode == 3) return rng.uniform() < 0.8 ? "Vehicle Driver" : "Vehicle Passenger";
  return kModes[mode].label;
}

int travel_minutes(Point a, Point b, std::size_t mode) {
  return 3 + static_cast<int>(std::lround(1.3 * distance(a, b) / kModes[mode].speed));
}

struct Tour {
  int depart = 0;
  std::vector<Stop> stops;
};

std::vector<Tour> day_pattern(int age, Rng& rng) {
  auto minutes = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(hi - lo + 1)); };
  std::vector<Tour> tours;
  if (age < 5) {
    if (rng.uniform() < 0.5) tours.push_back({minutes(540, 660), {{"Accompany Someone", 90}}});
    return tours;
  }
  if (age < 18) {
    Tour t{minutes(480, 525), {{"Education", minutes(390, 420)}}};
    if (rng.uniform() < 0.35) t.stops.push_back({"Recreational", minutes(60, 120)});
    tours.push_back(t);
    return tours;
  }
  const bool works = age < 65 && rng.uniform() < (age < 25 ? 0.5 : 0.75);
  if (works) {
    Tour t{minutes(450, 540), {}};
    if (rng.uniform() < 0.2) t.stops.push_back({"Pick-up or Drop-off Someone", 10});
    t.stops.push_back({"Work Related", minutes(450, 540)});
    if (rng.uniform() < 0.25) t.stops.push_back({"Buy Something", minutes(20, 45)});
    tours.push_back(t);
    if (rng.uniform() < 0.15) tours.push_back({minutes(1140, 1170), {{"Social", minutes(90, 150)}}});
    return tours;
  }
  if (age < 25) {
    tours.push_back({minutes(510, 570), {{"Education", minutes(300, 360)}}});
    return tours;
  }
  static const std::array<const char*, 5> kErrands = {
      "Buy Something", "Personal Business", "Social", "Recreational", "Other Purpose"};
  const int n = rng.uniform() < 0.3 ? 2 : 1;
  int clock = minutes(540, 660);
  for (int k = 0; k < n; ++k) {
    Tour t{clock, {{kErrands[rng.below(kErrands.size())], minutes(30, 120)}}};
    if (rng.uniform() < 0.3) t.stops.push_back({kErrands[rng.below(kErrands.size())], minutes(20, 60)});
    tours.push_back(t);
    clock += 300;
  }
  return tours;
}

// Builds one person's trips; returns false when the day overflows.
bool person_trips(const std::vector<Block>& blocks, Point home, int age, Rng& rng,
                  std::vector<SurveyRow>& rows) {
  int clock = 0;
  std::string here = "At Home";
  for (const Tour& tour : day_pattern(age, rng)) {
    const std::size_t mode = tour_mode(age, home, rng);
    clock = std::max(clock, tour.depart);
    Point at = home;
    auto leg = [&](std::string dest, Point to, const char* label, std::size_t speed_mode) {
      SurveyRow r;
      r.orig = here;
      r.dest = std::move(dest);
      r.start = clock;
      r.arrive = clock + travel_minutes(at, to, speed_mode);
      r.from = at;
      r.to = to;
      r.mode = label;
      rows.push_back(r);
      clock = r.arrive;
      here = r.dest;
      at = to;
    };
    const bool transfer = mode == 2 && rng.uniform() < 0.4;
    const char* label = mode_label(mode, rng);
    for (std::size_t s = 0; s < tour.stops.size(); ++s) {
      const Point to = choose_destination(blocks, at, tour.stops[s].purpose, mode, rng);
      if (transfer && s == 0) {
        const Point station{round1(at.x + 0.15 * (to.x - at.x)),
                            round1(at.y + 0.15 * (to.y - at.y))};
        leg("Change Mode", station, "Walking", 0);
        clock += 2;
      }
      leg(tour.stops[s].purpose, to, label, mode);
      clock += tour.stops[s].duration;
    }
    leg("Go Home", home, label, mode);
    here = "At Home";
    clock += 30;
  }
  return clock < kLastMinute - 30;
}

void write_survey(const fs::path& path, const std::vector<Block>& blocks, std::size_t persons,
                  Rng& rng) {
  static const std::array<const char*, 5> kWeekdays = {"Monday", "Tuesday", "Wednesday",
                                                       "Thursday", "Friday"};
  std::ofstream out(path);
  csv::Writer w(out);
  w.row({"PERSID", "ORIGPURP1", "DESTPURP1", "STARTIME", "ARRTIME", "WDTRIPWGT", "WEJTEWGT",
         "CW_WDTRIPWGT_SA3", "ORIGX", "ORIGY", "DESTX", "DESTY", "LINKMODE", "TRAVDOW", "AGE",
         "SEX"});
  std::size_t emitted = 0;
  for (std::size_t n = 0; emitted < persons; ++n) {
    const Block& hb = blocks[pick_home_block(blocks, rng)];
    const Point home = inside(hb, rng, 10.0);
    const int age = draw_age(rng, rng.uniform() < 0.22);
    const char* sex = rng.uniform() < 0.5 ? "F" : "M";
    const bool weekend = rng.uniform() < 0.1;
    const double weight = std::round(8000.0 + 8000.0 * rng.uniform()) / 100.0;
    const double survey_weight = std::round(weight * (90.0 + 20.0 * rng.uniform())) / 100.0;
    std::vector<SurveyRow> rows;
    if (!person_trips(blocks, home, age, rng, rows) || rows.empty()) continue;
    ++emitted;
    const std::string id = fmt::format("S{:05d}", n);
    const std::string wd = weekend ? "" : csv::format_double(weight);
    const std::string we = weekend ? csv::format_double(weight) : "";
    const std::string day = weekend ? (n % 2 ? "Saturday" : "Sunday") : kWeekdays[n % 5];
    for (const auto& r : rows) {
      w.row({id, r.orig, r.dest, std::to_string(r.start), std::to_string(r.arrive), wd, we,
             csv::format_double(survey_weight), csv::format_double(r.from.x),
             csv::format_double(r.from.y), csv::format_double(r.to.x), csv::format_double(r.to.y),
             r.mode, day, std::to_string(age), sex});
    }
  }
}

}  // namespace

FixturePaths write_fixture(const fs::path& dir, const FixtureOptions& options) {
  FixturePaths p;
  p.root = dir;
  p.trips = dir / "trips.csv";
  p.census_dir = dir / "census";
  p.nodes = dir / "network" / "nodes.csv";
  p.edges = dir / "network" / "edges.csv";
  p.meshblocks = dir / "meshblocks.geojson";
  p.addresses = dir / "addresses.csv";
  p.config = dir / "config.json";
  fs::create_directories(dir / "network");

  auto blocks = make_blocks(options.seed);
  Rng addr_rng(derive_seed(options.seed, "addresses"));
  place_addresses(blocks, addr_rng);
  write_meshblocks(p.meshblocks, blocks);
  write_network(p.nodes, p.edges);
  write_addresses(p.addresses, blocks);
  Rng census_rng(derive_seed(options.seed, "census"));
  write_census(p.census_dir, blocks, options.census_persons, census_rng);
  Rng survey_rng(derive_seed(options.seed, "survey"));
  write_survey(p.trips, blocks, options.survey_persons, survey_rng);

  nlohmann::ordered_json config = {{"trip_table", "trips.csv"},
                                   {"census_dir", "census"},
                                   {"nodes", "network/nodes.csv"},
                                   {"edges", "network/edges.csv"},
                                   {"meshblocks", "meshblocks.geojson"},
                                   {"addresses", "addresses.csv"},
                                   {"output_dir", "out"},
                                   {"fraction", 1.0},
                                   {"bins", 48},
                                   {"seed", 42}};
  std::ofstream(p.config) << config.dump(2) << '\n';
  return p;
}

}  // namespace synthpop
