#pragma once

// Independent reference implementations used only by the test suites.

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "gnrrm/rng.hpp"
#include "gnrrm/terrain/dem.hpp"
#include "gnrrm/terrain/graph.hpp"

namespace oracle {

using gnrrm::terrain::DemGrid;
using gnrrm::terrain::Direction;
using gnrrm::terrain::FlowGraph;

// Exhaustive scan: collect every candidate drop, take the maximum, then pick
// the first candidate in clockwise-from-east order attaining it.
inline std::vector<Direction> d8_brute_force(const DemGrid& dem) {
  struct Step {
    int dr, dc;
    Direction dir;
  };
  const Step steps[8] = {{0, 1, Direction::E},   {1, 1, Direction::SE},  {1, 0, Direction::S},
                         {1, -1, Direction::SW}, {0, -1, Direction::W},  {-1, -1, Direction::NW},
                         {-1, 0, Direction::N},  {-1, 1, Direction::NE}};
  std::vector<Direction> out;
  for (int r = 0; r < dem.rows(); ++r) {
    for (int c = 0; c < dem.cols(); ++c) {
      if (dem.is_nodata(r, c)) {
        out.push_back(Direction::Sink);
        continue;
      }
      double drops[8];
      bool valid[8];
      for (int k = 0; k < 8; ++k) {
        const int nr = r + steps[k].dr, nc = c + steps[k].dc;
        valid[k] = nr >= 0 && nr < dem.rows() && nc >= 0 && nc < dem.cols() && !dem.is_nodata(nr, nc);
        const double dist = dem.cell_size_m() * std::sqrt(double(steps[k].dr * steps[k].dr + steps[k].dc * steps[k].dc));
        drops[k] = valid[k] ? (dem.elevation(r, c) - dem.elevation(nr, nc)) / dist : 0.0;
      }
      double best = 0.0;
      for (int k = 0; k < 8; ++k)
        if (valid[k] && drops[k] > best) best = drops[k];
      Direction d = Direction::Sink;
      if (best > 0.0) {
        for (int k = 0; k < 8; ++k) {
          if (valid[k] && drops[k] == best) {
            d = steps[k].dir;
            break;
          }
        }
      }
      out.push_back(d);
    }
  }
  return out;
}

// Breadth-first search from the outlet over reversed edges.
inline std::vector<std::size_t> bfs_hops(const FlowGraph& g) {
  std::map<std::size_t, std::vector<std::size_t>> upstream;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.downstream[i]) upstream[*g.downstream[i]].push_back(i);
  std::vector<std::size_t> dist(g.size(), SIZE_MAX);
  std::deque<std::size_t> q{g.outlet_id};
  dist[g.outlet_id] = 0;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop_front();
    for (auto v : upstream[u]) {
      if (dist[v] != SIZE_MAX) continue;
      dist[v] = dist[u] + 1;
      q.push_back(v);
    }
  }
  return dist;
}

// Random DEM: integer elevations in [0, levels) to force ties, with a few
// nodata holes when `holes` is set.
inline DemGrid random_dem(gnrrm::Rng& rng, int rows, int cols, int levels, bool holes) {
  DemGrid dem(rows, cols, 10.0 + static_cast<double>(rng.below(90)));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (holes && rng.below(20) == 0) dem.set_nodata(r, c);
      else dem.set(r, c, static_cast<double>(rng.below(levels)));
    }
  return dem;
}

// Random in-tree: node i > 0 drains to a uniformly chosen earlier node, then
// ids are shuffled so the outlet is not always node 0.
inline FlowGraph random_tree(gnrrm::Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  FlowGraph g;
  g.nodes.resize(n);
  g.downstream.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t id = perm[i];
    g.nodes[id] = {id, static_cast<int>(id / 12), static_cast<int>(id % 12), 1.0 + rng.uniform() * 15.0};
    if (i > 0) g.downstream[id] = perm[rng.below(i)];
  }
  g.outlet_id = perm[0];
  return g;
}

}  // namespace oracle
