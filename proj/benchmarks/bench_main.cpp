#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "synthpop/chains.hpp"
#include "synthpop/network.hpp"
#include "synthpop/rng.hpp"
#include "synthpop/spatial.hpp"

namespace {

using namespace synthpop;

TimeDistributions work_day_targets(int bins) {
  std::vector<ActivityRecord> acts;
  for (int p = 0; p < 400; ++p) {
    const std::string id = "p" + std::to_string(p);
    const int leave = 420 + (p % 7) * 15;
    const int back = 990 + (p % 11) * 20;
    acts.push_back({id, "Home", 0, leave, 1.0});
    acts.push_back({id, p % 3 ? "Work" : "Study", leave + 30, back, 1.0});
    acts.push_back({id, "Home", back + 30, kLastMinute, 1.0});
  }
  return build_distribution_matrices(acts, bins);
}

void BM_GenerateChains(benchmark::State& state) {
  const auto targets = work_day_targets(48);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto out = generate_chains(targets, n, 11);
    benchmark::DoNotOptimize(out.chains.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateChains)->Arg(200)->Arg(5000);

Network grid(int side) {
  Network net;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) net.add_node("n" + std::to_string(y * side + x), {x * 250.0, y * 250.0});
  }
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const auto i = static_cast<std::size_t>(y * side + x);
      if (x + 1 < side) net.add_edge(i, i + 1, 250.0, 50.0, true);
      if (y + 1 < side) net.add_edge(i, i + side, 250.0, 50.0, true);
    }
  }
  return net;
}

void BM_ODMatrix(benchmark::State& state) {
  const auto net = grid(48);
  const auto regions = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> nodes;
  Rng rng(5);
  for (std::size_t r = 0; r < regions; ++r) nodes.push_back(rng.below(net.node_count()));
  for (auto _ : state) {
    auto od = build_od_matrix(net, nodes, nullptr);
    benchmark::DoNotOptimize(od.data().data());
  }
}
BENCHMARK(BM_ODMatrix)->Arg(36)->Arg(144);

void BM_Kde(benchmark::State& state) {
  Rng rng(9);
  std::vector<WeightedPoint> points;
  for (int i = 0; i < state.range(0); ++i) {
    points.push_back({{rng.uniform() * 12000.0, rng.uniform() * 12000.0}, 1.0 + rng.uniform()});
  }
  std::vector<Point> queries;
  for (int i = 0; i < 2304; ++i) queries.push_back({rng.uniform() * 12000.0, rng.uniform() * 12000.0});
  for (auto _ : state) {
    auto v = kde_at(queries, points, 750.0);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_Kde)->Arg(1000)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
