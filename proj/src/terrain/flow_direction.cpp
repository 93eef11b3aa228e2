#include "gnrrm/terrain/flow_direction.hpp"

#include <cmath>
#include <deque>
#include <numbers>

#include "gnrrm/error.hpp"

namespace gnrrm::terrain {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::E: return "E";
    case Direction::SE: return "SE";
    case Direction::S: return "S";
    case Direction::SW: return "SW";
    case Direction::W: return "W";
    case Direction::NW: return "NW";
    case Direction::N: return "N";
    case Direction::NE: return "NE";
    case Direction::Sink: return "SINK";
  }
  return "?";
}

FlowDirField::FlowDirField(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      dirs_(static_cast<std::size_t>(rows) * cols, Direction::Sink),
      nodata_(static_cast<std::size_t>(rows) * cols, 0),
      exits_(static_cast<std::size_t>(rows) * cols, 0) {}

Cell FlowDirField::downstream(int r, int c) const {
  const auto d = at(r, c);
  if (d == Direction::Sink) throw Error("downstream() called on a SINK cell " + to_string(Cell{r, c}));
  const auto k = static_cast<int>(d);
  return Cell{r + kRowOffset[k], c + kColOffset[k]};
}

FlowDirField compute_d8(const DemGrid& dem) {
  FlowDirField fd(dem.rows(), dem.cols());
  const double cardinal = dem.cell_size_m();
  const double diagonal = dem.cell_size_m() * std::numbers::sqrt2;

  for (int r = 0; r < dem.rows(); ++r) {
    for (int c = 0; c < dem.cols(); ++c) {
      if (dem.is_nodata(r, c)) {
        fd.set_nodata(r, c);
        continue;
      }
      const double z = dem.elevation(r, c);
      double best_drop = 0.0;
      Direction best = Direction::Sink;
      bool open_boundary = false;
      for (int k = 0; k < 8; ++k) {
        const int nr = r + kRowOffset[k];
        const int nc = c + kColOffset[k];
        if (!dem.in_bounds(nr, nc) || dem.is_nodata(nr, nc)) {
          open_boundary = true;
          continue;
        }
        const double dist = (k % 2 == 1) ? diagonal : cardinal;
        const double drop = (z - dem.elevation(nr, nc)) / dist;
        if (drop > best_drop) {
          best_drop = drop;
          best = kNeighbourOrder[k];
        }
      }
      fd.set(r, c, best);
      fd.set_exits_domain(r, c, best == Direction::Sink && open_boundary);
    }
  }
  return fd;
}

std::vector<Cell> delineate(const FlowDirField& fd, Cell outlet) {
  if (!fd.in_bounds(outlet.row, outlet.col))
    throw ValidationError("outlet " + to_string(outlet) + " is outside the raster");
  if (fd.is_nodata(outlet.row, outlet.col)) throw ValidationError("outlet " + to_string(outlet) + " is a nodata cell");

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(fd.rows()) * fd.cols(), 0);
  std::deque<Cell> queue{outlet};
  seen[fd.index(outlet.row, outlet.col)] = 1;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    // A neighbour at offset k drains into `cur` iff it points back along k.
    for (int k = 0; k < 8; ++k) {
      const int nr = cur.row + kRowOffset[k];
      const int nc = cur.col + kColOffset[k];
      if (!fd.in_bounds(nr, nc) || fd.is_nodata(nr, nc)) continue;
      const auto back = static_cast<Direction>((k + 4) % 8);
      if (fd.at(nr, nc) != back) continue;
      auto& flag = seen[fd.index(nr, nc)];
      if (flag) continue;
      flag = 1;
      queue.push_back(Cell{nr, nc});
    }
  }

  std::vector<Cell> cells;
  for (int r = 0; r < fd.rows(); ++r)
    for (int c = 0; c < fd.cols(); ++c)
      if (seen[fd.index(r, c)]) cells.push_back(Cell{r, c});
  return cells;
}

}  // namespace gnrrm::terrain
