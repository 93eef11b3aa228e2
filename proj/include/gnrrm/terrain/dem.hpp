#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gnrrm::terrain {

struct Cell {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

std::string to_string(const Cell& c);

// Rectangular elevation raster, row 0 is the northern edge.
class DemGrid {
 public:
  DemGrid() = default;
  DemGrid(int rows, int cols, double cell_size_m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size_m() const { return cell_size_m_; }
  std::size_t size() const { return elevations_.size(); }

  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }

  double elevation(int r, int c) const { return elevations_[index(r, c)]; }
  bool is_nodata(int r, int c) const { return nodata_[index(r, c)] != 0; }

  void set(int r, int c, double z);
  void set_nodata(int r, int c);

  const std::vector<double>& elevations() const { return elevations_; }

  // Georeferencing carried through for output only.
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double nodata_value = -9999.0;

  // Per-cell area in km² assuming every cell lies fully inside the basin.
  std::vector<double> default_cell_areas_km2() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double cell_size_m_ = 1.0;
  std::vector<double> elevations_;
  std::vector<std::uint8_t> nodata_;
};

// ESRI ASCII grid reader. Throws ParseError naming the offending line.
DemGrid load_dem(const std::filesystem::path& path);
DemGrid parse_dem(const std::string& text, const std::string& source = "<dem>");

void write_dem(const DemGrid& dem, const std::filesystem::path& path);
std::string format_dem(const DemGrid& dem);

}  // namespace gnrrm::terrain
