#include "gnrrm/terrain/dem.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::terrain {

std::string to_string(const Cell& c) { return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")"; }

DemGrid::DemGrid(int rows, int cols, double cell_size_m)
    : rows_(rows),
      cols_(cols),
      cell_size_m_(cell_size_m),
      elevations_(static_cast<std::size_t>(rows) * cols, 0.0),
      nodata_(static_cast<std::size_t>(rows) * cols, 0) {
  if (rows <= 0 || cols <= 0) throw ValidationError("DEM dimensions must be positive");
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) throw ValidationError("DEM cell size must be positive");
}

void DemGrid::set(int r, int c, double z) {
  if (!std::isfinite(z)) throw ValidationError("non-finite elevation at " + to_string(Cell{r, c}));
  elevations_[index(r, c)] = z;
  nodata_[index(r, c)] = 0;
}

void DemGrid::set_nodata(int r, int c) {
  elevations_[index(r, c)] = nodata_value;
  nodata_[index(r, c)] = 1;
}

std::vector<double> DemGrid::default_cell_areas_km2() const {
  const double a = cell_size_m_ * cell_size_m_ / 1e6;
  return std::vector<double>(size(), a);
}

DemGrid parse_dem(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, double> header;

  // Header lines are `key value`; the first line starting with a number
  // begins the data block.
  std::vector<std::pair<std::size_t, std::string>> data_lines;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    const bool numeric = parse_real(tokens[0]).has_value();
    if (!numeric && data_lines.empty()) {
      if (tokens.size() != 2) throw ParseError(source, line_no, "malformed header line");
      auto v = parse_real(tokens[1]);
      if (!v) throw ParseError(source, line_no, "non-numeric header value for " + std::string(tokens[0]));
      const auto key = to_lower(tokens[0]);
      if (header.count(key)) throw ParseError(source, line_no, "duplicate header key " + key);
      header[key] = *v;
      continue;
    }
    if (!numeric) throw ParseError(source, line_no, "non-numeric cell value '" + std::string(tokens[0]) + "'");
    data_lines.emplace_back(line_no, line);
  }

  auto require = [&](const char* key) {
    auto it = header.find(key);
    if (it == header.end()) throw ParseError(source, 0, std::string("missing header key ") + key);
    return it->second;
  };
  const double ncols = require("ncols");
  const double nrows = require("nrows");
  const double cellsize = require("cellsize");
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows))
    throw ParseError(source, 0, "ncols/nrows must be positive integers");
  if (!(cellsize > 0.0)) throw ParseError(source, 0, "cellsize must be positive");

  DemGrid dem(static_cast<int>(nrows), static_cast<int>(ncols), cellsize);
  if (header.count("xllcorner")) dem.xllcorner = header["xllcorner"];
  else if (header.count("xllcenter"))
    dem.xllcorner = header["xllcenter"] - cellsize / 2;
  if (header.count("yllcorner")) dem.yllcorner = header["yllcorner"];
  else if (header.count("yllcenter"))
    dem.yllcorner = header["yllcenter"] - cellsize / 2;
  const bool has_nodata = header.count("nodata_value") > 0;
  if (has_nodata) dem.nodata_value = header["nodata_value"];

  if (data_lines.size() != static_cast<std::size_t>(dem.rows())) {
    const std::size_t at = data_lines.empty() ? line_no : data_lines.back().first;
    throw ParseError(source, at,
                     "expected " + std::to_string(dem.rows()) + " data rows, found " + std::to_string(data_lines.size()));
  }
  for (int r = 0; r < dem.rows(); ++r) {
    const auto& [ln, content] = data_lines[r];
    auto tokens = split_whitespace(content);
    if (tokens.size() != static_cast<std::size_t>(dem.cols()))
      throw ParseError(source, ln,
                       "row has " + std::to_string(tokens.size()) + " values, header declares ncols " +
                           std::to_string(dem.cols()));
    for (int c = 0; c < dem.cols(); ++c) {
      auto v = parse_real(tokens[c]);
      if (!v) throw ParseError(source, ln, "non-numeric cell value '" + std::string(tokens[c]) + "'");
      if (has_nodata && *v == dem.nodata_value) {
        dem.set_nodata(r, c);
      } else {
        if (!std::isfinite(*v)) throw ParseError(source, ln, "non-finite elevation");
        dem.set(r, c, *v);
      }
    }
  }
  return dem;
}

DemGrid load_dem(const std::filesystem::path& path) { return parse_dem(read_file(path), path.string()); }

std::string format_dem(const DemGrid& dem) {
  std::ostringstream out;
  out << "ncols " << dem.cols() << "\n"
      << "nrows " << dem.rows() << "\n"
      << "xllcorner " << format_real(dem.xllcorner) << "\n"
      << "yllcorner " << format_real(dem.yllcorner) << "\n"
      << "cellsize " << format_real(dem.cell_size_m()) << "\n"
      << "NODATA_value " << format_real(dem.nodata_value) << "\n";
  for (int r = 0; r < dem.rows(); ++r) {
    for (int c = 0; c < dem.cols(); ++c) {
      if (c) out << ' ';
      out << format_real(dem.is_nodata(r, c) ? dem.nodata_value : dem.elevation(r, c));
    }
    out << '\n';
  }
  return out.str();
}

void write_dem(const DemGrid& dem, const std::filesystem::path& path) { write_file(path, format_dem(dem)); }

}  // namespace gnrrm::terrain
