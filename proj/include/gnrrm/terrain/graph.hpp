#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gnrrm/terrain/flow_direction.hpp"

namespace gnrrm::terrain {

using NodeId = std::size_t;

struct GraphNode {
  NodeId id = 0;
  int row = 0;
  int col = 0;
  double area_km2 = 0.0;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

// Watershed as a directed in-tree: every node drains to exactly one
// downstream node except the outlet.
struct FlowGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::optional<NodeId>> downstream;
  NodeId outlet_id = 0;

  std::size_t size() const { return nodes.size(); }
  std::size_t edge_count() const;
  double total_area_km2() const;

  friend bool operator==(const FlowGraph&, const FlowGraph&) = default;
};

struct HopIndex {
  std::vector<std::size_t> distance;  // indexed by node id
  std::size_t max_distance = 0;

  friend bool operator==(const HopIndex&, const HopIndex&) = default;
};

struct HopLevel {
  std::size_t hop = 0;
  std::vector<NodeId> member_ids;  // ascending
  double level_area_km2 = 0.0;
  std::vector<double> weights;  // member_area / level_area, aligned with member_ids

  friend bool operator==(const HopLevel&, const HopLevel&) = default;
};

struct HierarchicalGraph {
  std::vector<HopLevel> levels;  // index == hop distance, 0 is the outlet level

  std::size_t max_distance() const { return levels.empty() ? 0 : levels.size() - 1; }
  double total_area_km2() const;

  friend bool operator==(const HierarchicalGraph&, const HierarchicalGraph&) = default;
};

// `watershed` must be the output of delineate() for `outlet`; `areas_km2`
// holds one value per raster cell. Node ids follow row-major cell order.
FlowGraph build_graph(const FlowDirField& fd, const std::vector<Cell>& watershed, Cell outlet,
                      const std::vector<double>& areas_km2);

// Checks the tree invariants; throws ValidationError describing the first
// violation.
void validate_graph(const FlowGraph& g);

HopIndex hop_distances(const FlowGraph& g);
HierarchicalGraph build_hierarchy(const FlowGraph& g, const HopIndex& h);

struct GraphBundle {
  FlowGraph graph;
  HopIndex hops;
  HierarchicalGraph hierarchy;
};

GraphBundle make_bundle(FlowGraph g);

std::string format_graph(const GraphBundle& b);
GraphBundle parse_graph(const std::string& text);
void export_graph(const GraphBundle& b, const std::filesystem::path& path);
GraphBundle import_graph(const std::filesystem::path& path);

// Identity of a graph as seen by a trained model.
struct GraphFingerprint {
  std::size_t node_count = 0;
  NodeId outlet_id = 0;
  std::size_t max_distance = 0;
  std::string content_hash;  // 16 hex digits

  friend bool operator==(const GraphFingerprint&, const GraphFingerprint&) = default;
};

GraphFingerprint fingerprint(const GraphBundle& b);
std::string to_string(const GraphFingerprint& f);

}  // namespace gnrrm::terrain
