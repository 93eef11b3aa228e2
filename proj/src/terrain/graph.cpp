#include "gnrrm/terrain/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::terrain {

using nlohmann::json;

namespace {

// Areas are summed smallest first so totals do not depend on node numbering.
double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

std::size_t FlowGraph::edge_count() const {
  return static_cast<std::size_t>(std::count_if(downstream.begin(), downstream.end(), [](const auto& d) { return d.has_value(); }));
}

double FlowGraph::total_area_km2() const {
  std::vector<double> a;
  a.reserve(nodes.size());
  for (const auto& n : nodes) a.push_back(n.area_km2);
  return sorted_sum(std::move(a));
}

double HierarchicalGraph::total_area_km2() const {
  double s = 0.0;
  for (const auto& l : levels) s += l.level_area_km2;
  return s;
}

FlowGraph build_graph(const FlowDirField& fd, const std::vector<Cell>& watershed, Cell outlet,
                      const std::vector<double>& areas_km2) {
  if (areas_km2.size() != static_cast<std::size_t>(fd.rows()) * fd.cols())
    throw ValidationError("cell area array does not match raster size");

  std::vector<Cell> cells = watershed;
  std::sort(cells.begin(), cells.end());
  if (std::adjacent_find(cells.begin(), cells.end()) != cells.end())
    throw ValidationError("watershed contains duplicate cells");

  std::map<Cell, NodeId> id_of;
  for (NodeId i = 0; i < cells.size(); ++i) id_of[cells[i]] = i;
  if (!id_of.count(outlet)) throw ValidationError("outlet " + to_string(outlet) + " is not in the watershed");

  FlowGraph g;
  g.nodes.reserve(cells.size());
  g.downstream.assign(cells.size(), std::nullopt);
  g.outlet_id = id_of[outlet];
  for (NodeId i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    const double area = areas_km2[fd.index(cell.row, cell.col)];
    if (!(area > 0.0) || !std::isfinite(area))
      throw ValidationError("cell " + to_string(cell) + " has non-positive area");
    g.nodes.push_back(GraphNode{i, cell.row, cell.col, area});
    if (i == g.outlet_id) continue;
    if (fd.at(cell.row, cell.col) == Direction::Sink)
      throw ValidationError("watershed cell " + to_string(cell) + " is a SINK but not the outlet");
    const Cell down = fd.downstream(cell.row, cell.col);
    auto it = id_of.find(down);
    if (it == id_of.end())
      throw ValidationError("watershed cell " + to_string(cell) + " drains outside the watershed");
    g.downstream[i] = it->second;
  }
  validate_graph(g);
  return g;
}

void validate_graph(const FlowGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) throw ValidationError("graph has no nodes");
  if (g.downstream.size() != n) throw ValidationError("downstream table size mismatch");
  if (g.outlet_id >= n) throw ValidationError("outlet id " + std::to_string(g.outlet_id) + " out of range");
  for (NodeId i = 0; i < n; ++i) {
    if (g.nodes[i].id != i) throw ValidationError("node ids must be 0..n-1 in order");
    const auto& d = g.downstream[i];
    if (i == g.outlet_id) {
      if (d) throw ValidationError("outlet node " + std::to_string(i) + " has a downstream edge");
    } else if (!d) {
      throw ValidationError("node " + std::to_string(i) + " has no downstream edge and is not the outlet");
    } else if (*d >= n) {
      throw ValidationError("node " + std::to_string(i) + " has unknown downstream id " + std::to_string(*d));
    }
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach the outlet.
  std::vector<std::uint8_t> state(n, 0);
  state[g.outlet_id] = 2;
  std::vector<NodeId> path;
  for (NodeId start = 0; start < n; ++start) {
    NodeId cur = start;
    path.clear();
    while (state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      cur = *g.downstream[cur];
    }
    if (state[cur] == 1) throw ValidationError("cycle detected through node " + std::to_string(cur));
    for (NodeId p : path) state[p] = 2;
  }
}

HopIndex hop_distances(const FlowGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnknown = static_cast<std::size_t>(-1);
  HopIndex h;
  h.distance.assign(n, kUnknown);
  h.distance[g.outlet_id] = 0;
  std::vector<NodeId> path;
  for (NodeId start = 0; start < n; ++start) {
    NodeId cur = start;
    path.clear();
    while (h.distance[cur] == kUnknown) {
      path.push_back(cur);
      if (path.size() > n) throw ValidationError("cycle detected through node " + std::to_string(cur));
      cur = g.downstream[cur].value();
    }
    std::size_t d = h.distance[cur];
    for (auto it = path.rbegin(); it != path.rend(); ++it) h.distance[*it] = ++d;
  }
  h.max_distance = n ? *std::max_element(h.distance.begin(), h.distance.end()) : 0;
  return h;
}

HierarchicalGraph build_hierarchy(const FlowGraph& g, const HopIndex& h) {
  HierarchicalGraph hier;
  hier.levels.resize(h.max_distance + 1);
  for (std::size_t d = 0; d < hier.levels.size(); ++d) hier.levels[d].hop = d;
  for (const auto& node : g.nodes) {
    auto& level = hier.levels[h.distance[node.id]];
    level.member_ids.push_back(node.id);
  }
  for (auto& level : hier.levels) {
    std::vector<double> a;
    for (NodeId id : level.member_ids) a.push_back(g.nodes[id].area_km2);
    level.level_area_km2 = sorted_sum(std::move(a));
    level.weights.reserve(level.member_ids.size());
    for (NodeId id : level.member_ids) level.weights.push_back(g.nodes[id].area_km2 / level.level_area_km2);
  }
  return hier;
}

GraphBundle make_bundle(FlowGraph g) {
  validate_graph(g);
  GraphBundle b;
  b.hops = hop_distances(g);
  b.hierarchy = build_hierarchy(g, b.hops);
  b.graph = std::move(g);
  return b;
}

std::string format_graph(const GraphBundle& b) {
  json nodes = json::array();
  for (const auto& n : b.graph.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["row"] = n.row;
    jn["col"] = n.col;
    jn["area_km2"] = n.area_km2;
    const auto& d = b.graph.downstream[n.id];
    jn["downstream"] = d ? json(*d) : json(nullptr);
    jn["hop"] = b.hops.distance[n.id];
    nodes.push_back(std::move(jn));
  }
  json levels = json::array();
  for (const auto& l : b.hierarchy.levels) {
    json jl;
    jl["hop"] = l.hop;
    jl["member_ids"] = l.member_ids;
    jl["level_area_km2"] = l.level_area_km2;
    levels.push_back(std::move(jl));
  }
  json root;
  root["nodes"] = std::move(nodes);
  root["outlet_id"] = b.graph.outlet_id;
  root["max_distance"] = b.hops.max_distance;
  root["levels"] = std::move(levels);
  return root.dump(1) + "\n";
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field '" + key + "' has the wrong type");
  }
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

GraphBundle parse_graph(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
  if (!root.is_object() || !root.contains("nodes") || !root["nodes"].is_array())
    throw ValidationError("graph file: missing 'nodes' array");

  const auto& jnodes = root["nodes"];
  const std::size_t n = jnodes.size();
  FlowGraph g;
  g.nodes.resize(n);
  g.downstream.assign(n, std::nullopt);
  std::vector<std::size_t> file_hops(n);
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto& jn : jnodes) {
    const auto id = field<std::size_t>(jn, "id", "graph file node");
    const std::string where = "graph file node " + std::to_string(id);
    if (id >= n || seen[id]) throw ValidationError(where + ": ids must be unique and cover 0..n-1");
    seen[id] = 1;
    GraphNode node{id, field<int>(jn, "row", where), field<int>(jn, "col", where), field<double>(jn, "area_km2", where)};
    if (!(node.area_km2 > 0.0)) throw ValidationError(where + ": area_km2 must be positive");
    g.nodes[id] = node;
    if (!jn.contains("downstream")) throw ValidationError(where + ": missing field 'downstream'");
    if (!jn["downstream"].is_null()) {
      const auto d = field<std::size_t>(jn, "downstream", where);
      if (d >= n) throw ValidationError(where + ": downstream id " + std::to_string(d) + " does not exist");
      g.downstream[id] = d;
    }
    file_hops[id] = field<std::size_t>(jn, "hop", where);
  }
  g.outlet_id = field<std::size_t>(root, "outlet_id", "graph file");
  validate_graph(g);

  GraphBundle b = make_bundle(std::move(g));
  if (b.hops.distance != file_hops) throw ValidationError("graph file: node hop values disagree with the edges");
  if (field<std::size_t>(root, "max_distance", "graph file") != b.hops.max_distance)
    throw ValidationError("graph file: max_distance disagrees with the edges");

  if (!root.contains("levels") || !root["levels"].is_array() || root["levels"].size() != b.hierarchy.levels.size())
    throw ValidationError("graph file: 'levels' must list every hop 0..max_distance");
  for (const auto& jl : root["levels"]) {
    const auto hop = field<std::size_t>(jl, "hop", "graph file level");
    const std::string where = "graph file level " + std::to_string(hop);
    if (hop >= b.hierarchy.levels.size()) throw ValidationError(where + ": hop out of range");
    const auto& level = b.hierarchy.levels[hop];
    auto members = field<std::vector<NodeId>>(jl, "member_ids", where);
    std::sort(members.begin(), members.end());
    if (members != level.member_ids) throw ValidationError(where + ": member_ids disagree with node hops");
    if (!close(field<double>(jl, "level_area_km2", where), level.level_area_km2))
      throw ValidationError(where + ": level_area_km2 disagrees with member areas");
  }
  return b;
}

void export_graph(const GraphBundle& b, const std::filesystem::path& path) { write_file(path, format_graph(b)); }

GraphBundle import_graph(const std::filesystem::path& path) { return parse_graph(read_file(path)); }

GraphFingerprint fingerprint(const GraphBundle& b) {
  // FNV-1a over a canonical text rendering of the node table.
  std::uint64_t hash = 1469598103934665603ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      hash ^= ch;
      hash *= 1099511628211ULL;
    }
  };
  for (const auto& n : b.graph.nodes) {
    const auto& d = b.graph.downstream[n.id];
    feed(std::to_string(n.id) + "," + std::to_string(n.row) + "," + std::to_string(n.col) + "," +
         format_real(n.area_km2) + "," + (d ? std::to_string(*d) : std::string("-")) + ";");
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
  return GraphFingerprint{b.graph.size(), b.graph.outlet_id, b.hops.max_distance, hex};
}

std::string to_string(const GraphFingerprint& f) {
  return "nodes=" + std::to_string(f.node_count) + " outlet=" + std::to_string(f.outlet_id) +
         " max_distance=" + std::to_string(f.max_distance) + " hash=" + f.content_hash;
}

}  // namespace gnrrm::terrain
