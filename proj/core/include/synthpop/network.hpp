#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "synthpop/common.hpp"
#include "synthpop/geometry.hpp"

namespace synthpop {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double length = 0.0;  // meters
  double speed_kmh = 0.0;
  bool all_modes = false;  // walk, cycle and car all allowed
};

/// Road network with planar node coordinates. Edges are traversable in both
/// directions.
class Network {
 public:
  std::size_t add_node(std::string id, Point coord);
  void add_edge(std::size_t from, std::size_t to, double length, double speed_kmh,
                bool all_modes);

  std::size_t node_count() const { return ids_.size(); }
  const std::string& id(std::size_t node) const { return ids_[node]; }
  Point coord(std::size_t node) const { return coords_[node]; }
  const std::vector<Point>& coords() const { return coords_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<std::size_t> find(const std::string& id) const;

  /// Endpoints of edges with speed <= 60 km/h open to all modes, ascending.
  std::vector<std::size_t> local_nodes() const;

  /// Dijkstra over edge lengths; unreachable nodes get +inf.
  std::vector<double> shortest_paths(std::size_t source) const;

 private:
  void build_adjacency() const;

  std::vector<std::string> ids_;
  std::vector<Point> coords_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  mutable std::vector<std::size_t> adj_offsets_;
  mutable std::vector<std::pair<std::size_t, double>> adj_;
  mutable bool adjacency_ready_ = false;
};

inline constexpr double kLocalSpeedLimit = 60.0;

/// True if a modes field (separated by ';', ',', '|' or spaces) allows walk,
/// cycle (or bike) and car.
bool allows_all_modes(std::string_view modes);

/// nodes.csv: node_id,x,y. edges.csv: from,to,length_m,speed_kmh,modes.
Network read_network(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                     Diagnostics* diag = nullptr);

/// Square matrix of shortest network distances between region nodes.
class ODMatrix {
 public:
  ODMatrix() = default;
  explicit ODMatrix(std::size_t n, double fill = 0.0) : n_(n), d_(n * n, fill) {}
  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
  const std::vector<double>& data() const { return d_; }
  friend bool operator==(const ODMatrix&, const ODMatrix&) = default;

  /// Binary layout: "SPOD" magic, uint32 version (1), uint64 n, then n*n
  /// float64 row-major. All integers and floats little-endian.
  void write(const std::filesystem::path& path) const;
  static ODMatrix read(const std::filesystem::path& path);

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// One Dijkstra per source node, run in parallel. Rows for sources that
/// cannot reach some target hold +inf there.
ODMatrix build_od_matrix(const Network& network, const std::vector<std::size_t>& region_nodes,
                         Diagnostics* diag = nullptr);

}  // namespace synthpop
