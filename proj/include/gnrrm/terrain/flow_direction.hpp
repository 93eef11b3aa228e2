#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gnrrm/terrain/dem.hpp"

namespace gnrrm::terrain {

// Neighbour order is also the tie-break order: clockwise starting east.
enum class Direction : std::uint8_t { E = 0, SE, S, SW, W, NW, N, NE, Sink };

inline constexpr std::array<Direction, 8> kNeighbourOrder = {Direction::E,  Direction::SE, Direction::S,
                                                             Direction::SW, Direction::W,  Direction::NW,
                                                             Direction::N,  Direction::NE};
inline constexpr std::array<int, 8> kRowOffset = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, 8> kColOffset = {1, 1, 0, -1, -1, -1, 0, 1};

inline bool is_diagonal(Direction d) { return static_cast<int>(d) % 2 == 1; }
const char* to_string(Direction d);

class FlowDirField {
 public:
  FlowDirField() = default;
  FlowDirField(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }

  Direction at(int r, int c) const { return dirs_[index(r, c)]; }
  bool is_nodata(int r, int c) const { return nodata_[index(r, c)] != 0; }
  // True for a SINK that lies on the raster edge or next to nodata: its water
  // leaves the modelled domain rather than ponding.
  bool exits_domain(int r, int c) const { return exits_[index(r, c)] != 0; }

  // Target cell of a non-SINK direction.
  Cell downstream(int r, int c) const;

  void set(int r, int c, Direction d) { dirs_[index(r, c)] = d; }
  void set_nodata(int r, int c) { nodata_[index(r, c)] = 1; }
  void set_exits_domain(int r, int c, bool v) { exits_[index(r, c)] = v ? 1 : 0; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Direction> dirs_;
  std::vector<std::uint8_t> nodata_;
  std::vector<std::uint8_t> exits_;
};

// Steepest strictly positive descent among the in-bounds, valid neighbours.
// drop = dz / distance with distance = cell size (cardinal) or cell size·√2
// (diagonal). Equal drops keep the earliest direction in kNeighbourOrder.
// Cells with no strictly lower neighbour become SINK. Nodata cells are SINK
// and carry the nodata flag.
FlowDirField compute_d8(const DemGrid& dem);

// Cells draining to `outlet` (outlet included), sorted in row-major order.
// Throws ValidationError when the outlet is out of bounds or nodata.
// The outlet's own direction is ignored.
std::vector<Cell> delineate(const FlowDirField& fd, Cell outlet);

}  // namespace gnrrm::terrain
