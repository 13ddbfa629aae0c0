#include "synthpop/spatial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/parallel.hpp"

namespace synthpop {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void normalise(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total > 0.0) {
    for (double& x : v) x /= total;
  }
}

}  // namespace

std::vector<Category> location_categories(std::string_view meshblock_category) {
  const std::string c = lower(csv::trim(meshblock_category));
  if (c == "residential" || c == "other") return {Category::Home};
  if (c == "primary production") return {Category::Home, Category::Work};
  if (c == "commercial") return {Category::Work, Category::Commercial};
  if (c == "education") return {Category::Work, Category::Education};
  if (c == "hospital/medical" || c == "industrial") return {Category::Work};
  if (c == "parkland" || c == "water") return {Category::Park};
  return {};
}

// ---------------------------------------------------------------------------

PolygonIndex::PolygonIndex(std::span<const Polygon> polygons) {
  for (const auto& p : polygons) {
    polygons_.push_back(&p);
    bounds_.push_back(p.bounds());
    if (!bounds_.back().empty()) extent_.extend(bounds_.back());
  }
  if (extent_.empty()) return;
  const double w = std::max(extent_.max_x - extent_.min_x, 1e-9);
  const double h = std::max(extent_.max_y - extent_.min_y, 1e-9);
  const double per_side = std::max(1.0, std::sqrt(static_cast<double>(polygons_.size())));
  cell_ = std::max(w, h) / per_side;
  nx_ = std::max(1L, static_cast<long>(std::ceil(w / cell_)));
  ny_ = std::max(1L, static_cast<long>(std::ceil(h / cell_)));
  cells_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  auto cx = [&](double x) {
    return std::clamp(static_cast<long>(std::floor((x - extent_.min_x) / cell_)), 0L, nx_ - 1);
  };
  auto cy = [&](double y) {
    return std::clamp(static_cast<long>(std::floor((y - extent_.min_y) / cell_)), 0L, ny_ - 1);
  };
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const auto& b = bounds_[i];
    if (b.empty()) continue;
    for (long y = cy(b.min_y); y <= cy(b.max_y); ++y) {
      for (long x = cx(b.min_x); x <= cx(b.max_x); ++x) {
        cells_[static_cast<std::size_t>(y * nx_ + x)].push_back(i);
      }
    }
  }
}

std::optional<std::size_t> PolygonIndex::locate(Point p) const {
  if (cells_.empty() || !extent_.contains(p)) return std::nullopt;
  const long x = std::clamp(static_cast<long>(std::floor((p.x - extent_.min_x) / cell_)), 0L,
                            nx_ - 1);
  const long y = std::clamp(static_cast<long>(std::floor((p.y - extent_.min_y) / cell_)), 0L,
                            ny_ - 1);
  for (std::size_t i : cells_[static_cast<std::size_t>(y * nx_ + x)]) {
    if (bounds_[i].contains(p) && point_in_polygon(*polygons_[i], p)) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

RegionHierarchy::RegionHierarchy(std::vector<RegionInfo> regions) : regions_(std::move(regions)) {
  std::sort(regions_.begin(), regions_.end(),
            [](const RegionInfo& a, const RegionInfo& b) { return a.sa1 < b.sa1; });
  std::map<std::string, std::size_t> sa3s;
  for (const auto& r : regions_) sa3s.emplace(r.sa3, 0);
  for (auto& [code, idx] : sa3s) {
    idx = sa3_codes_.size();
    sa3_codes_.push_back(code);
  }
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (!index_.emplace(regions_[i].sa1, i).second) {
      throw DataError("duplicate SA1 code '" + regions_[i].sa1 + "'");
    }
    sa3_of_.push_back(sa3s.at(regions_[i].sa3));
  }
}

std::optional<std::size_t> RegionHierarchy::find(const std::string& sa1) const {
  auto it = index_.find(sa1);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RegionHierarchy build_hierarchy(std::span<const Meshblock> meshblocks, const Network& network,
                                Diagnostics* diag) {
  struct Acc {
    std::string sa2, sa3;
    double pop = 0.0, px = 0.0, py = 0.0, mx = 0.0, my = 0.0;
    std::size_t count = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& mb : meshblocks) {
    auto [it, inserted] = acc.try_emplace(mb.sa1);
    Acc& a = it->second;
    if (inserted) {
      a.sa2 = mb.sa2;
      a.sa3 = mb.sa3;
    } else if (a.sa2 != mb.sa2 || a.sa3 != mb.sa3) {
      throw DataError(fmt::format("SA1 {} is assigned to more than one SA2/SA3", mb.sa1));
    }
    const Point c = mb.shape.centroid();
    a.pop += mb.population;
    a.px += mb.population * c.x;
    a.py += mb.population * c.y;
    a.mx += c.x;
    a.my += c.y;
    ++a.count;
  }

  const auto local = network.local_nodes();
  if (local.empty()) throw DataError("network has no local (<= 60 km/h, all-mode) edges");
  std::vector<Point> local_coords;
  for (std::size_t n : local) local_coords.push_back(network.coord(n));
  PointGrid grid(local_coords);

  std::vector<RegionInfo> regions;
  for (const auto& [sa1, a] : acc) {
    RegionInfo r;
    r.sa1 = sa1;
    r.sa2 = a.sa2;
    r.sa3 = a.sa3;
    if (a.pop > 0.0) {
      r.centroid = {a.px / a.pop, a.py / a.pop};
    } else {
      note(diag, "spatial.sa1_without_population");
      r.centroid = {a.mx / static_cast<double>(a.count), a.my / static_cast<double>(a.count)};
    }
    r.node = local[*grid.nearest(r.centroid)];
    r.node_id = network.id(r.node);
    r.node_coord = network.coord(r.node);
    regions.push_back(std::move(r));
  }
  return RegionHierarchy(std::move(regions));
}

// ---------------------------------------------------------------------------

std::vector<CandidateLocation> build_candidate_locations(const Network& network,
                                                         std::span<const Meshblock> meshblocks,
                                                         const PolygonIndex& index,
                                                         const RegionHierarchy& hierarchy,
                                                         Diagnostics* diag) {
  std::vector<CandidateLocation> out;
  for (std::size_t node : network.local_nodes()) {
    const Point p = network.coord(node);
    auto mb = index.locate(p);
    if (!mb) {
      note(diag, "spatial.nodes_outside_meshblocks");
      continue;
    }
    const auto cats = location_categories(meshblocks[*mb].category);
    if (cats.empty()) {
      note(diag, "spatial.nodes_unclassified_landuse");
      continue;
    }
    const auto region = hierarchy.find(meshblocks[*mb].sa1);
    if (!region) throw InvariantError("meshblock SA1 missing from hierarchy");
    for (Category c : cats) {
      out.push_back({node, network.id(node), p, c, *region, 0.0});
    }
  }
  return out;
}

void assign_address_weights(std::vector<CandidateLocation>& candidates,
                            std::span<const Meshblock> meshblocks, const PolygonIndex& index,
                            const RegionHierarchy& hierarchy, std::span<const Point> addresses,
                            Diagnostics* diag) {
  std::map<std::pair<std::size_t, Category>, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    members[{candidates[i].region, candidates[i].category}].push_back(i);
  }
  std::vector<Point> coords;
  coords.reserve(candidates.size());
  for (const auto& c : candidates) coords.push_back(c.coord);
  const PointGrid grid(coords);

  std::vector<double> counts(candidates.size(), 0.0);
  auto snap = [&](Point p, const Meshblock& mb) {
    const auto region = hierarchy.find(mb.sa1);
    for (Category cat : location_categories(mb.category)) {
      std::optional<std::size_t> best;
      double best_d2 = 0.0;
      if (region) {
        if (auto it = members.find({*region, cat}); it != members.end()) {
          for (std::size_t i : it->second) {
            const double d2 = squared_distance(p, candidates[i].coord);
            if (!best || d2 < best_d2) {
              best = i;
              best_d2 = d2;
            }
          }
        }
      }
      if (!best) {
        best = grid.nearest(p, [&](std::size_t i) { return candidates[i].category == cat; });
        if (!best) {
          note(diag, "spatial.addresses_without_candidate");
          continue;
        }
        note(diag, "spatial.addresses_snapped_outside_sa1");
      }
      counts[*best] += 1.0;
    }
  };

  std::vector<char> has_address(meshblocks.size(), 0);
  for (const Point& a : addresses) {
    auto mb = index.locate(a);
    if (!mb) {
      note(diag, "spatial.addresses_outside_meshblocks");
      continue;
    }
    has_address[*mb] = 1;
    snap(a, meshblocks[*mb]);
  }
  for (std::size_t m = 0; m < meshblocks.size(); ++m) {
    if (!has_address[m]) snap(meshblocks[m].shape.centroid(), meshblocks[m]);
  }

  for (const auto& [key, idx] : members) {
    double total = 0.0;
    for (std::size_t i : idx) total += counts[i];
    for (std::size_t i : idx) {
      candidates[i].address_weight =
          total > 0.0 ? counts[i] / total : 1.0 / static_cast<double>(idx.size());
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<double> kde_at(std::span<const Point> queries, std::span<const WeightedPoint> points,
                           double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError(fmt::format("bandwidth must be > 0, got {}", bandwidth));
  std::vector<double> out(queries.size(), 0.0);
  if (points.empty()) return out;
  std::vector<Point> coords;
  coords.reserve(points.size());
  for (const auto& p : points) coords.push_back(p.p);
  const double cutoff = 10.0 * bandwidth;
  const PointGrid grid(coords, cutoff);
  const double two_h2 = 2.0 * bandwidth * bandwidth;
  parallel_for(queries.size(), [&](std::size_t q) {
    auto near = grid.within(queries[q], cutoff);
    std::sort(near.begin(), near.end());
    double sum = 0.0;
    for (std::size_t i : near) {
      sum += points[i].w * std::exp(-squared_distance(queries[q], points[i].p) / two_h2);
    }
    out[q] = sum;
  });
  return out;
}

double Bandwidths::for_category(Category c) const {
  switch (c) {
    case Category::Work: return work;
    case Category::Education: return education;
    case Category::Commercial: return commercial;
    case Category::Park: return park;
    case Category::Home: break;
  }
  return mode;
}

std::vector<Category> attraction_categories(Activity a) {
  switch (a) {
    case Activity::Work: return {Category::Work};
    case Activity::Study: return {Category::Education};
    case Activity::Shop:
    case Activity::Personal: return {Category::Commercial};
    case Activity::SocialRecreational: return {Category::Commercial, Category::Park};
    default: return {};
  }
}

std::vector<LocatedTrip> locate_survey_trips(std::span<const SurveyTrip> trips,
                                             std::span<const Meshblock> meshblocks,
                                             const PolygonIndex& index,
                                             const RegionHierarchy& hierarchy, const ODMatrix& od,
                                             Diagnostics* diag) {
  std::vector<LocatedTrip> out;
  for (const auto& t : trips) {
    auto om = index.locate(t.origin);
    auto dm = index.locate(t.destination);
    if (!om || !dm) {
      note(diag, "spatial.survey_trips_outside_area");
      continue;
    }
    const auto o = hierarchy.find(meshblocks[*om].sa1);
    const auto d = hierarchy.find(meshblocks[*dm].sa1);
    if (!o || !d) throw InvariantError("meshblock SA1 missing from hierarchy");
    const double dist = od.at(*o, *d);
    if (!std::isfinite(dist)) {
      note(diag, "spatial.survey_trips_unreachable");
      continue;
    }
    out.push_back({*o, *d, t.origin, t.destination, t.mode, t.weight, t.dest_activity, dist});
  }
  return out;
}

namespace {

std::vector<double> sum_by_region(std::span<const double> values,
                                  std::span<const std::size_t> region_of, std::size_t regions) {
  std::vector<double> out(regions, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) out[region_of[i]] += values[i];
  return out;
}

}  // namespace

std::array<std::vector<double>, kNumModes> mode_surfaces(
    std::span<const LocatedTrip> trips, std::span<const CandidateLocation> candidates,
    std::size_t regions, const RegionHierarchy& hierarchy, double bandwidth, Diagnostics* diag) {
  std::vector<Point> nodes;
  std::vector<std::size_t> region_of;
  {
    std::map<std::size_t, std::size_t> seen;
    for (const auto& c : candidates) {
      if (seen.emplace(c.node, c.region).second) {
        nodes.push_back(c.coord);
        region_of.push_back(c.region);
      }
    }
  }
  std::array<std::vector<double>, kNumModes> raw;
  for (Mode m : kAllModes) {
    std::vector<WeightedPoint> pts;
    for (const auto& t : trips) {
      if (t.mode == m) pts.push_back({t.origin, t.weight});
    }
    if (pts.empty()) {
      warn(diag, "spatial.mode_without_trips",
           fmt::format("no survey trips for mode {}", to_string(m)));
    }
    raw[static_cast<std::size_t>(index_of(m))] =
        sum_by_region(kde_at(nodes, pts, bandwidth), region_of, regions);
  }

  std::vector<std::array<double, kNumModes>> by_sa3(hierarchy.sa3_count(), {0, 0, 0, 0});
  for (std::size_t r = 0; r < regions; ++r) {
    for (std::size_t m = 0; m < kNumModes; ++m) by_sa3[hierarchy.sa3_of(r)][m] += raw[m][r];
  }

  std::array<std::vector<double>, kNumModes> out;
  for (auto& v : out) v.assign(regions, 0.0);
  for (std::size_t r = 0; r < regions; ++r) {
    std::array<double, kNumModes> row{};
    double total = 0.0;
    for (std::size_t m = 0; m < kNumModes; ++m) total += row[m] = raw[m][r];
    if (total <= 0.0) {
      row = by_sa3[hierarchy.sa3_of(r)];
      total = 0.0;
      for (double x : row) total += x;
      if (total > 0.0) {
        note(diag, "spatial.mode_surface_sa3_fallback");
      } else {
        note(diag, "spatial.mode_surface_uniform_fallback");
        row.fill(1.0);
        total = kNumModes;
      }
    }
    for (std::size_t m = 0; m < kNumModes; ++m) out[m][r] = row[m] / total;
  }
  return out;
}

std::vector<double> attraction_surface(std::span<const LocatedTrip> trips,
                                       std::span<const CandidateLocation> candidates,
                                       std::size_t regions, Category category, double bandwidth,
                                       Diagnostics* diag) {
  std::vector<Point> at;
  std::vector<std::size_t> region_of;
  for (const auto& c : candidates) {
    if (c.category == category) {
      at.push_back(c.coord);
      region_of.push_back(c.region);
    }
  }
  std::vector<WeightedPoint> pts;
  for (const auto& t : trips) {
    const auto cats = attraction_categories(t.dest_activity);
    if (std::find(cats.begin(), cats.end(), category) != cats.end()) {
      pts.push_back({t.destination, t.weight});
    }
  }
  auto out = sum_by_region(kde_at(at, pts, bandwidth), region_of, regions);
  double total = 0.0;
  for (double x : out) total += x;
  if (total <= 0.0) {
    warn(diag, "spatial.attraction_uniform_fallback",
         fmt::format("no attraction mass for {}; using uniform surface", to_string(category)));
    for (std::size_t r : region_of) out[r] = 1.0;
  }
  normalise(out);
  return out;
}

Surfaces build_surfaces(std::span<const LocatedTrip> trips,
                        std::span<const CandidateLocation> candidates,
                        const RegionHierarchy& hierarchy, const Bandwidths& bandwidths,
                        Diagnostics* diag) {
  Surfaces s;
  s.bandwidths = bandwidths;
  s.mode = mode_surfaces(trips, candidates, hierarchy.size(), hierarchy, bandwidths.mode, diag);
  s.attraction[static_cast<std::size_t>(index_of(Category::Home))].assign(hierarchy.size(), 0.0);
  for (Category c : kDestinationCategories) {
    s.attraction[static_cast<std::size_t>(index_of(c))] = attraction_surface(
        trips, candidates, hierarchy.size(), c, bandwidths.for_category(c), diag);
  }
  return s;
}

// ---------------------------------------------------------------------------

double LogNormal::p5() const { return std::exp(mu - kZ95 * sigma); }
double LogNormal::p95() const { return std::exp(mu + kZ95 * sigma); }

double LogNormal::pdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - mu) / sigma;
  return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * std::numbers::pi));
}

LogNormal fit_weighted_lognormal(std::span<const double> distances,
                                 std::span<const double> weights) {
  LogNormal fit;
  fit.trips = distances.size();
  double sw = 0.0, swl = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    sw += weights[i];
    swl += weights[i] * std::log(distances[i]);
  }
  if (!(sw > 0.0)) return fit;
  fit.mu = swl / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double dev = std::log(distances[i]) - fit.mu;
    ss += weights[i] * dev * dev;
  }
  fit.sigma = std::max(std::sqrt(ss / sw), kMinLogSd);
  return fit;
}

DistanceModel fit_local_lognormal(std::span<const LocatedTrip> trips,
                                  const RegionHierarchy& hierarchy, std::size_t k,
                                  Diagnostics* diag) {
  if (k == 0) throw ConfigError("nearest-trip count must be positive");
  std::array<std::vector<const LocatedTrip*>, kNumModes> by_mode;
  std::vector<const LocatedTrip*> all;
  std::size_t intra = 0;
  for (const auto& t : trips) {
    if (!(t.distance > 0.0) || !std::isfinite(t.distance)) {
      ++intra;
      continue;
    }
    by_mode[static_cast<std::size_t>(index_of(t.mode))].push_back(&t);
    all.push_back(&t);
  }
  if (intra > 0) note(diag, "spatial.lognormal_zero_distance_trips", static_cast<long>(intra));
  if (all.empty()) throw DataError("no survey trips with a positive inter-region distance");

  for (Mode m : kAllModes) {
    const auto n = by_mode[static_cast<std::size_t>(index_of(m))].size();
    if (n == 0) {
      warn(diag, "spatial.lognormal_pooled_fallback",
           fmt::format("no trips for mode {}; fitting all modes pooled", to_string(m)));
    } else if (n < k) {
      warn(diag, "spatial.lognormal_fewer_than_k",
           fmt::format("mode {} has {} trips (< {}); using all of them", to_string(m), n, k));
    }
  }

  DistanceModel model;
  model.by_region.resize(hierarchy.size());
  parallel_for(hierarchy.size(), [&](std::size_t r) {
    const Point c = hierarchy[r].centroid;
    for (Mode m : kAllModes) {
      const auto& src = by_mode[static_cast<std::size_t>(index_of(m))].empty()
                            ? all
                            : by_mode[static_cast<std::size_t>(index_of(m))];
      std::vector<std::pair<double, std::size_t>> order(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
        order[i] = {squared_distance(c, src[i]->origin), i};
      }
      const std::size_t take = std::min(k, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                        order.end());
      std::vector<double> d(take), w(take);
      for (std::size_t i = 0; i < take; ++i) {
        d[i] = src[order[i].second]->distance;
        w[i] = src[order[i].second]->weight;
      }
      model.by_region[r][static_cast<std::size_t>(index_of(m))] = fit_weighted_lognormal(d, w);
    }
  });
  return model;
}

// ---------------------------------------------------------------------------

GlobalTargets build_global_targets(std::span<const LocatedTrip> trips,
                                   const RegionHierarchy& hierarchy) {
  GlobalTargets g;
  const std::size_t n3 = hierarchy.sa3_count();
  for (auto& v : g.attraction) v.assign(n3, 0.0);
  g.distance.resize(n3);
  for (const auto& t : trips) {
    for (Category c : attraction_categories(t.dest_activity)) {
      g.attraction[static_cast<std::size_t>(index_of(c))][hierarchy.sa3_of(t.dest_region)] +=
          t.weight;
    }
    if (t.distance > 0.0 && std::isfinite(t.distance)) {
      auto& hist = g.distance[hierarchy.sa3_of(t.orig_region)]
                             [static_cast<std::size_t>(index_of(t.mode))];
      const auto bin = distance_bin(t.distance);
      if (hist.size() <= bin) hist.resize(bin + 1, 0.0);
      hist[bin] += t.weight;
    }
  }
  for (auto& v : g.attraction) normalise(v);
  for (auto& per_mode : g.distance) {
    for (auto& hist : per_mode) normalise(hist);
  }
  return g;
}

}  // namespace synthpop
