#include "synthpop/network.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "synthpop/csv.hpp"
#include "synthpop/parallel.hpp"

namespace synthpop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr char kOdMagic[4] = {'S', 'P', 'O', 'D'};
constexpr std::uint32_t kOdVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

std::size_t Network::add_node(std::string id, Point coord) {
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (!inserted) throw DataError("duplicate node id '" + id + "'");
  ids_.push_back(std::move(id));
  coords_.push_back(coord);
  adjacency_ready_ = false;
  return it->second;
}

void Network::add_edge(std::size_t from, std::size_t to, double length, double speed_kmh,
                       bool all_modes) {
  if (from >= ids_.size() || to >= ids_.size()) throw DataError("edge references unknown node");
  if (!(length >= 0.0)) throw DataError(fmt::format("negative edge length {}", length));
  edges_.push_back({from, to, length, speed_kmh, all_modes});
  adjacency_ready_ = false;
}

std::optional<std::size_t> Network::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Network::local_nodes() const {
  std::vector<char> keep(ids_.size(), 0);
  for (const auto& e : edges_) {
    if (e.all_modes && e.speed_kmh <= kLocalSpeedLimit) keep[e.from] = keep[e.to] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

void Network::build_adjacency() const {
  const std::size_t n = ids_.size();
  adj_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++adj_offsets_[e.from + 1];
    ++adj_offsets_[e.to + 1];
  }
  for (std::size_t i = 0; i < n; ++i) adj_offsets_[i + 1] += adj_offsets_[i];
  adj_.assign(adj_offsets_[n], {0, 0.0});
  std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& e : edges_) {
    adj_[fill[e.from]++] = {e.to, e.length};
    adj_[fill[e.to]++] = {e.from, e.length};
  }
  adjacency_ready_ = true;
}

std::vector<double> Network::shortest_paths(std::size_t source) const {
  if (!adjacency_ready_) build_adjacency();
  std::vector<double> dist(ids_.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t k = adj_offsets_[u]; k < adj_offsets_[u + 1]; ++k) {
      const auto [v, w] = adj_[k];
      if (d + w < dist[v]) {
        dist[v] = d + w;
        heap.push({dist[v], v});
      }
    }
  }
  return dist;
}

bool allows_all_modes(std::string_view modes) {
  bool walk = false, cycle = false, car = false;
  std::size_t pos = 0;
  while (pos <= modes.size()) {
    std::size_t end = modes.find_first_of(";,| ", pos);
    if (end == std::string_view::npos) end = modes.size();
    const auto token = csv::trim(modes.substr(pos, end - pos));
    if (token == "walk") walk = true;
    if (token == "cycle" || token == "bike" || token == "bicycle") cycle = true;
    if (token == "car") car = true;
    pos = end + 1;
  }
  return walk && cycle && car;
}

Network read_network(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                     Diagnostics* diag) {
  Network net;
  csv::Row row;
  {
    csv::Reader r(nodes);
    const auto c_id = r.require("node_id");
    const auto c_x = r.require("x");
    const auto c_y = r.require("y");
    while (r.next(row)) {
      auto x = csv::parse_double(row[c_x]);
      auto y = csv::parse_double(row[c_y]);
      if (!x || !y) {
        throw DataError(fmt::format("{}:{}: malformed node coordinate", r.source(),
                                    r.line_number()));
      }
      net.add_node(row[c_id], {*x, *y});
    }
  }
  csv::Reader r(edges);
  const auto c_from = r.require("from");
  const auto c_to = r.require("to");
  const auto c_len = r.require("length_m");
  const auto c_speed = r.require("speed_kmh");
  const auto c_modes = r.require("modes");
  while (r.next(row)) {
    auto from = net.find(row[c_from]);
    auto to = net.find(row[c_to]);
    auto len = csv::parse_double(row[c_len]);
    auto speed = csv::parse_double(row[c_speed]);
    if (!from || !to) {
      note(diag, "spatial.edges_unknown_node");
      continue;
    }
    if (!len || !speed || *len < 0.0) {
      throw DataError(fmt::format("{}:{}: malformed edge", r.source(), r.line_number()));
    }
    net.add_edge(*from, *to, *len, *speed, allows_all_modes(row[c_modes]));
  }
  return net;
}

void ODMatrix::write(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(kOdMagic, 4);
    put_le<std::uint32_t>(out, kOdVersion);
    put_le<std::uint64_t>(out, n_);
    out.write(reinterpret_cast<const char*>(d_.data()),
              static_cast<std::streamsize>(d_.size() * sizeof(double)));
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

ODMatrix ODMatrix::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (std::memcmp(magic, kOdMagic, 4) != 0) {
    throw DataError("'" + path.string() + "' is not an OD matrix file");
  }
  if (get_le<std::uint32_t>(in) != kOdVersion) {
    throw DataError("unsupported OD matrix version in '" + path.string() + "'");
  }
  const auto n = get_le<std::uint64_t>(in);
  ODMatrix od(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(od.d_.data()),
          static_cast<std::streamsize>(od.d_.size() * sizeof(double)));
  if (!in) throw DataError("truncated OD matrix '" + path.string() + "'");
  return od;
}

ODMatrix build_od_matrix(const Network& network, const std::vector<std::size_t>& region_nodes,
                         Diagnostics* diag) {
  const std::size_t n = region_nodes.size();
  ODMatrix od(n);
  if (network.node_count() > 0) network.shortest_paths(0);  // builds adjacency before threads
  parallel_for(n, [&](std::size_t i) {
    const auto dist = network.shortest_paths(region_nodes[i]);
    for (std::size_t j = 0; j < n; ++j) od.at(i, j) = dist[region_nodes[j]];
  });
  std::size_t unreachable = 0;
  for (double v : od.data()) {
    if (v == kInf) ++unreachable;
  }
  if (unreachable > 0) {
    warn(diag, "spatial.od_unreachable_pairs",
         fmt::format("{} region pairs are not connected", unreachable));
  }
  return od;
}

}  // namespace synthpop
