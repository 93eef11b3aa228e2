#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnrrm/terrain/graph.hpp"
#include "gnrrm/timeutil.hpp"

namespace gnrrm::dataset {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Hourly forcing aligned to graph node ids. Rows are time steps; a gap in the
// timestamps starts a new segment and windows never cross a segment break.
struct ForcingSet {
  std::vector<HourStamp> timestamps;
  RowMatrix rain;               // T × N, mm/hr
  Eigen::VectorXd discharge;    // T, m³/s
  std::vector<std::size_t> segment_starts;  // first row of each segment, begins with 0

  std::size_t steps() const { return timestamps.size(); }
  std::size_t nodes() const { return static_cast<std::size_t>(rain.cols()); }
  std::size_t segment_count() const { return segment_starts.size(); }
  // One past the last row of segment k.
  std::size_t segment_end(std::size_t k) const {
    return k + 1 < segment_starts.size() ? segment_starts[k + 1] : steps();
  }
};

// Builds segment_starts from the timestamps and validates the invariants.
void finalize_forcing(ForcingSet& f);

ForcingSet load_forcing(const std::filesystem::path& path, const terrain::FlowGraph& graph);
ForcingSet parse_forcing(const std::string& text, std::size_t node_count, const std::string& source = "<forcing>");

std::string format_forcing(const ForcingSet& f);
void write_forcing(const ForcingSet& f, const std::filesystem::path& path);

}  // namespace gnrrm::dataset
