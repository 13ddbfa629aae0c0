#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthpop/csv.hpp"
#include "synthpop/spatial.hpp"

namespace synthpop {
namespace {

using json = nlohmann::json;

std::string property_string(const json& props, const char* key, const std::string& source,
                            std::size_t feature) {
  auto it = props.find(key);
  if (it == props.end() || it->is_null()) {
    throw DataError(fmt::format("{}: feature {} lacks property '{}'", source, feature, key));
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  if (it->is_number()) return csv::format_double(it->get<double>());
  throw DataError(fmt::format("{}: feature {} has a non-scalar '{}'", source, feature, key));
}

Ring parse_ring(const json& coords) {
  Ring ring;
  for (const auto& pt : coords) ring.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
  return ring;
}

std::size_t column(const csv::Reader& r, std::string_view name) { return r.require(name); }

double number(const csv::Reader& r, const csv::Row& row, std::size_t col) {
  auto v = csv::parse_double(row[col]);
  if (!v) {
    throw DataError(fmt::format("{}:{}: '{}' is not a number", r.source(), r.line_number(),
                                row[col]));
  }
  return *v;
}

std::size_t region_of(const csv::Reader& r, const RegionHierarchy& h, const std::string& sa1) {
  auto idx = h.find(sa1);
  if (!idx) {
    throw DataError(fmt::format("{}:{}: unknown SA1 '{}'", r.source(), r.line_number(), sa1));
  }
  return *idx;
}

}  // namespace

std::vector<Meshblock> parse_meshblocks(std::string_view geojson, const std::string& source) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array()) {
    throw DataError(source + ": expected a GeoJSON FeatureCollection");
  }
  std::vector<Meshblock> out;
  std::size_t i = 0;
  for (const auto& f : doc["features"]) {
    try {
      const auto& props = f.at("properties");
      const auto& geom = f.at("geometry");
      Meshblock mb;
      if (props.contains("id")) {
        mb.id = property_string(props, "id", source, i);
      } else if (f.contains("id")) {
        mb.id = f["id"].is_string() ? f["id"].get<std::string>() : f["id"].dump();
      } else {
        mb.id = std::to_string(i);
      }
      mb.category = property_string(props, "category", source, i);
      mb.population = props.value("population", 0.0);
      mb.sa1 = property_string(props, "sa1", source, i);
      mb.sa2 = property_string(props, "sa2", source, i);
      mb.sa3 = property_string(props, "sa3", source, i);
      const auto type = geom.at("type").get<std::string>();
      if (type == "Polygon") {
        for (const auto& ring : geom.at("coordinates")) mb.shape.rings.push_back(parse_ring(ring));
      } else if (type == "MultiPolygon") {
        for (const auto& poly : geom.at("coordinates")) {
          for (const auto& ring : poly) mb.shape.rings.push_back(parse_ring(ring));
        }
      } else {
        throw DataError(fmt::format("{}: feature {} has unsupported geometry {}", source, i, type));
      }
      if (mb.population < 0.0) {
        throw DataError(fmt::format("{}: feature {} has negative population", source, i));
      }
      out.push_back(std::move(mb));
    } catch (const json::exception& e) {
      throw DataError(fmt::format("{}: feature {} is malformed: {}", source, i, e.what()));
    }
    ++i;
  }
  return out;
}

std::vector<Meshblock> read_meshblocks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_meshblocks(buf.str(), path.string());
}

std::vector<Point> read_addresses(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto cx = column(r, "x");
  const auto cy = column(r, "y");
  std::vector<Point> out;
  csv::Row row;
  while (r.next(row)) out.push_back({number(r, row, cx), number(r, row, cy)});
  return out;
}

// ---------------------------------------------------------------------------

void RegionHierarchy::write(const std::filesystem::path& path) const {
  csv::AtomicFile file(path);
  csv::Writer w(file.stream());
  w.row({"sa1", "sa2", "sa3", "centroid_x", "centroid_y", "node_id", "node_x", "node_y"});
  for (const auto& r : regions_) {
    w.row({r.sa1, r.sa2, r.sa3, csv::format_double(r.centroid.x),
           csv::format_double(r.centroid.y), r.node_id, csv::format_double(r.node_coord.x),
           csv::format_double(r.node_coord.y)});
  }
  file.commit();
}

RegionHierarchy RegionHierarchy::read(const std::filesystem::path& path) {
  csv::Reader r(path);
  const auto c_sa1 = column(r, "sa1"), c_sa2 = column(r, "sa2"), c_sa3 = column(r, "sa3");
  const auto c_cx = column(r, "centroid_x"), c_cy = column(r, "centroid_y");
  const auto c_node = column(r, "node_id");
  const auto c_nx = column(r, "node_x"), c_ny = column(r, "node_y");
  std::vector<RegionInfo> regions;
  csv::Row row;
  while (r.next(row)) {
    RegionInfo info;
    info.sa1 = row[c_sa1];
    info.sa2 = row[c_sa2];
    info.sa3 = row[c_sa3];
    info.centroid = {number(r, row, c_cx), number(r, row, c_cy)};
    info.node = regions.size();
    info.node_id = row[c_node];
    info.node_coord = {number(r, row, c_nx), number(r, row, c_ny)};
    regions.push_back(std::move(info));
  }
  return RegionHierarchy(std::move(regions));
}

// ---------------------------------------------------------------------------

const std::vector<std::size_t>& SpatialModel::candidates_in(std::size_t region,
                                                            Category c) const {
  static const std::vector<std::size_t> kEmpty;
  if (region >= by_region_.size()) return kEmpty;
  return by_region_[region][static_cast<std::size_t>(index_of(c))];
}

void SpatialModel::index() {
  by_region_.assign(hierarchy.size(), {});
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    by_region_[candidates[i].region][static_cast<std::size_t>(index_of(candidates[i].category))]
        .push_back(i);
  }
}

void SpatialModel::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  hierarchy.write(dir / "regions.csv");
  od.write(dir / "od_matrix.bin");
  {
    csv::AtomicFile file(dir / "candidates.csv");
    csv::Writer w(file.stream());
    w.row({"node_id", "x", "y", "category", "sa1", "address_weight"});
    for (const auto& c : candidates) {
      w.row({c.node_id, csv::format_double(c.coord.x), csv::format_double(c.coord.y),
             std::string(to_string(c.category)), hierarchy[c.region].sa1,
             csv::format_double(c.address_weight)});
    }
    file.commit();
  }
  {
    csv::AtomicFile file(dir / "surfaces.csv");
    csv::Writer w(file.stream());
    w.row({"kind", "category", "sa1", "probability", "bandwidth"});
    for (Mode m : kAllModes) {
      const auto& v = surfaces.mode[static_cast<std::size_t>(index_of(m))];
      for (std::size_t r = 0; r < v.size(); ++r) {
        w.row({"mode", std::string(to_string(m)), hierarchy[r].sa1, csv::format_double(v[r]),
               csv::format_double(surfaces.bandwidths.mode)});
      }
    }
    for (Category c : kDestinationCategories) {
      const auto& v = surfaces.attraction[static_cast<std::size_t>(index_of(c))];
      for (std::size_t r = 0; r < v.size(); ++r) {
        w.row({"attraction", std::string(to_string(c)), hierarchy[r].sa1,
               csv::format_double(v[r]), csv::format_double(surfaces.bandwidths.for_category(c))});
      }
    }
    file.commit();
  }
  {
    csv::AtomicFile file(dir / "distmodels.csv");
    csv::Writer w(file.stream());
    w.row({"sa1", "mode", "log_mean", "log_sd", "trips"});
    for (std::size_t r = 0; r < distances.by_region.size(); ++r) {
      for (Mode m : kAllModes) {
        const auto& f = distances.get(r, m);
        w.row({hierarchy[r].sa1, std::string(to_string(m)), csv::format_double(f.mu),
               csv::format_double(f.sigma), std::to_string(f.trips)});
      }
    }
    file.commit();
  }
  {
    csv::AtomicFile file(dir / "survey_located.csv");
    csv::Writer w(file.stream());
    w.row({"orig_sa1", "dest_sa1", "orig_x", "orig_y", "dest_x", "dest_y", "mode", "weight",
           "dest_activity", "distance"});
    for (const auto& t : survey_trips) {
      w.row({hierarchy[t.orig_region].sa1, hierarchy[t.dest_region].sa1,
             csv::format_double(t.origin.x), csv::format_double(t.origin.y),
             csv::format_double(t.destination.x), csv::format_double(t.destination.y),
             std::string(to_string(t.mode)), csv::format_double(t.weight),
             std::string(to_string(t.dest_activity)), csv::format_double(t.distance)});
    }
    file.commit();
  }
}

SpatialModel SpatialModel::read(const std::filesystem::path& dir) {
  SpatialModel m;
  m.hierarchy = RegionHierarchy::read(dir / "regions.csv");
  m.od = ODMatrix::read(dir / "od_matrix.bin");
  const std::size_t n = m.hierarchy.size();
  if (m.od.size() != n) {
    throw DataError(fmt::format("OD matrix has {} regions but regions.csv has {}", m.od.size(), n));
  }
  csv::Row row;
  {
    csv::Reader r(dir / "candidates.csv");
    const auto c_node = column(r, "node_id"), c_x = column(r, "x"), c_y = column(r, "y");
    const auto c_cat = column(r, "category"), c_sa1 = column(r, "sa1");
    const auto c_w = column(r, "address_weight");
    std::unordered_map<std::string, std::size_t> node_index;
    while (r.next(row)) {
      auto cat = parse_category(row[c_cat]);
      if (!cat) throw DataError(fmt::format("{}:{}: bad category", r.source(), r.line_number()));
      CandidateLocation c;
      c.node_id = row[c_node];
      c.coord = {number(r, row, c_x), number(r, row, c_y)};
      c.category = *cat;
      c.region = region_of(r, m.hierarchy, row[c_sa1]);
      c.address_weight = number(r, row, c_w);
      c.node = node_index.emplace(c.node_id, node_index.size()).first->second;
      m.candidates.push_back(std::move(c));
    }
  }
  {
    for (auto& v : m.surfaces.mode) v.assign(n, 0.0);
    for (auto& v : m.surfaces.attraction) v.assign(n, 0.0);
    csv::Reader r(dir / "surfaces.csv");
    const auto c_kind = column(r, "kind"), c_cat = column(r, "category");
    const auto c_sa1 = column(r, "sa1"), c_p = column(r, "probability");
    const auto c_bw = column(r, "bandwidth");
    while (r.next(row)) {
      const auto reg = region_of(r, m.hierarchy, row[c_sa1]);
      const double p = number(r, row, c_p);
      const double bw = number(r, row, c_bw);
      if (row[c_kind] == "mode") {
        auto mode = parse_mode(row[c_cat]);
        if (!mode) throw DataError(fmt::format("{}:{}: bad mode", r.source(), r.line_number()));
        m.surfaces.mode[static_cast<std::size_t>(index_of(*mode))][reg] = p;
        m.surfaces.bandwidths.mode = bw;
      } else if (row[c_kind] == "attraction") {
        auto cat = parse_category(row[c_cat]);
        if (!cat) throw DataError(fmt::format("{}:{}: bad category", r.source(), r.line_number()));
        m.surfaces.attraction[static_cast<std::size_t>(index_of(*cat))][reg] = p;
        switch (*cat) {
          case Category::Work: m.surfaces.bandwidths.work = bw; break;
          case Category::Education: m.surfaces.bandwidths.education = bw; break;
          case Category::Commercial: m.surfaces.bandwidths.commercial = bw; break;
          case Category::Park: m.surfaces.bandwidths.park = bw; break;
          case Category::Home: break;
        }
      } else {
        throw DataError(fmt::format("{}:{}: unknown surface kind '{}'", r.source(),
                                    r.line_number(), row[c_kind]));
      }
    }
  }
  {
    m.distances.by_region.assign(n, {});
    csv::Reader r(dir / "distmodels.csv");
    const auto c_sa1 = column(r, "sa1"), c_mode = column(r, "mode");
    const auto c_mu = column(r, "log_mean"), c_sd = column(r, "log_sd");
    const auto c_n = column(r, "trips");
    while (r.next(row)) {
      const auto reg = region_of(r, m.hierarchy, row[c_sa1]);
      auto mode = parse_mode(row[c_mode]);
      auto trips = csv::parse_int(row[c_n]);
      if (!mode || !trips) {
        throw DataError(fmt::format("{}:{}: malformed distance model", r.source(), r.line_number()));
      }
      auto& f = m.distances.by_region[reg][static_cast<std::size_t>(index_of(*mode))];
      f.mu = number(r, row, c_mu);
      f.sigma = number(r, row, c_sd);
      f.trips = static_cast<std::size_t>(*trips);
    }
  }
  {
    csv::Reader r(dir / "survey_located.csv");
    const auto c_o = column(r, "orig_sa1"), c_d = column(r, "dest_sa1");
    const auto c_ox = column(r, "orig_x"), c_oy = column(r, "orig_y");
    const auto c_dx = column(r, "dest_x"), c_dy = column(r, "dest_y");
    const auto c_mode = column(r, "mode"), c_w = column(r, "weight");
    const auto c_act = column(r, "dest_activity"), c_dist = column(r, "distance");
    while (r.next(row)) {
      auto mode = parse_mode(row[c_mode]);
      auto act = parse_activity(row[c_act]);
      if (!mode || !act) {
        throw DataError(fmt::format("{}:{}: malformed survey trip", r.source(), r.line_number()));
      }
      m.survey_trips.push_back({region_of(r, m.hierarchy, row[c_o]),
                                region_of(r, m.hierarchy, row[c_d]),
                                {number(r, row, c_ox), number(r, row, c_oy)},
                                {number(r, row, c_dx), number(r, row, c_dy)},
                                *mode,
                                number(r, row, c_w),
                                *act,
                                number(r, row, c_dist)});
    }
  }
  m.targets = build_global_targets(m.survey_trips, m.hierarchy);
  m.index();
  return m;
}

SpatialModel build_spatial_model(const SpatialInputs& inputs, std::span<const SurveyTrip> trips,
                                 Diagnostics* diag) {
  const Network network = read_network(inputs.nodes, inputs.edges, diag);
  const auto meshblocks = read_meshblocks(inputs.meshblocks);
  if (meshblocks.empty()) throw DataError("meshblock file has no features");
  std::vector<Polygon> shapes;
  shapes.reserve(meshblocks.size());
  for (const auto& mb : meshblocks) shapes.push_back(mb.shape);
  const PolygonIndex index(shapes);

  SpatialModel m;
  m.hierarchy = build_hierarchy(meshblocks, network, diag);
  std::vector<std::size_t> nodes;
  for (const auto& r : m.hierarchy.regions()) nodes.push_back(r.node);
  m.od = build_od_matrix(network, nodes, diag);
  m.candidates = build_candidate_locations(network, meshblocks, index, m.hierarchy, diag);
  std::vector<Point> addresses;
  if (inputs.addresses) addresses = read_addresses(*inputs.addresses);
  assign_address_weights(m.candidates, meshblocks, index, m.hierarchy, addresses, diag);
  m.survey_trips = locate_survey_trips(trips, meshblocks, index, m.hierarchy, m.od, diag);
  if (m.survey_trips.empty()) throw DataError("no survey trips fall inside the study area");
  m.surfaces = build_surfaces(m.survey_trips, m.candidates, m.hierarchy, inputs.bandwidths, diag);
  m.distances = fit_local_lognormal(m.survey_trips, m.hierarchy, inputs.nearest_trips, diag);
  m.targets = build_global_targets(m.survey_trips, m.hierarchy);
  m.index();
  return m;
}

void rebuild_surfaces(SpatialModel& model, const Bandwidths& bandwidths, Diagnostics* diag) {
  model.surfaces =
      build_surfaces(model.survey_trips, model.candidates, model.hierarchy, bandwidths, diag);
}

}  // namespace synthpop
